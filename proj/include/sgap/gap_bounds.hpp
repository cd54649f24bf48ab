#pragma once

// Closed-form uncertainty-principle thresholds. Each function is a pure
// formula in (s, t, delta, mu, m, N); nothing here looks at a dictionary.
//
// Regimes in which a formula gives no usable guarantee are reported through
// Threshold::status rather than thrown, so sweeps can flag the row. Genuine
// precondition violations (delta > s, mu outside [0, 1], ...) throw.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sgap {

enum class ThresholdStatus {
  ok,
  unbounded,            // mu = 0: no finite threshold
  vacuous,              // t mu^2 >= 1 in the overlap condition
  inapplicable,         // s - delta < 2 in the reverted quadratic
  hypothesis_violated,  // N <= 2m for the weak-incoherence gap
  not_evaluated,        // m and N were not supplied
};

inline std::string_view to_string(ThresholdStatus s) {
  switch (s) {
    case ThresholdStatus::ok: return "ok";
    case ThresholdStatus::unbounded: return "unbounded";
    case ThresholdStatus::vacuous: return "vacuous";
    case ThresholdStatus::inapplicable: return "inapplicable";
    case ThresholdStatus::hypothesis_violated: return "hypothesis_violated";
    case ThresholdStatus::not_evaluated: return "not_evaluated";
  }
  return "unknown";
}

struct Threshold {
  double value = std::numeric_limits<double>::quiet_NaN();
  ThresholdStatus status = ThresholdStatus::ok;

  bool ok() const noexcept { return status == ThresholdStatus::ok; }
  static Threshold of(double v) { return {v, ThresholdStatus::ok}; }
  static Threshold flagged(ThresholdStatus s) {
    return {s == ThresholdStatus::unbounded ? std::numeric_limits<double>::infinity()
                                            : std::numeric_limits<double>::quiet_NaN(),
            s};
  }
};

namespace detail {

inline void check_mu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("coherence must lie in [0, 1]");
}

inline void check_overlap(long s, long delta) {
  if (s < 1) throw std::invalid_argument("s must be at least 1");
  if (delta < 0 || delta > s)
    throw std::invalid_argument("overlap delta = " + std::to_string(delta) + " must lie in [0, s = " +
                                std::to_string(s) + "]");
}

inline void check_dims(long m, long n_atoms) {
  if (m < 1 || n_atoms < 1) throw std::invalid_argument("m and N must be positive");
}

}  // namespace detail

/// |S| + |T| > 1/mu.
inline Threshold donoho_elad_threshold(double mu) {
  detail::check_mu(mu);
  if (mu == 0.0) return Threshold::flagged(ThresholdStatus::unbounded);
  return Threshold::of(1.0 / mu);
}

/// |S| + |T| > sqrt(s) / mu for T disjoint from S.
inline Threshold strong_gap_threshold(long s, double mu) {
  detail::check_overlap(s, 0);
  detail::check_mu(mu);
  if (mu == 0.0) return Threshold::flagged(ThresholdStatus::unbounded);
  return Threshold::of(std::sqrt(static_cast<double>(s)) / mu);
}

/// Decision for delta < s - (t - 1) t mu^2 / (1 - t mu^2). Strict in delta.
struct OverlapDecision {
  long s = 0, t = 0, delta = 0;
  double mu = 0.0;
  Threshold rhs;
  bool holds = false;  // delta < rhs; false whenever rhs is not ok
  static constexpr std::string_view comparison = "delta < rhs";
};

inline OverlapDecision overlap_condition(long s, long t, long delta, double mu) {
  detail::check_overlap(s, delta);
  detail::check_mu(mu);
  if (t < 0) throw std::invalid_argument("t must be nonnegative");
  if (delta > t) throw std::invalid_argument("overlap delta cannot exceed t");
  OverlapDecision d{s, t, delta, mu, {}, false};
  const double sd = static_cast<double>(s);
  const double td = static_cast<double>(t);
  const double tmu2 = td * mu * mu;
  if (tmu2 >= 1.0) {
    d.rhs = Threshold::flagged(ThresholdStatus::vacuous);
    return d;
  }
  d.rhs = Threshold::of(sd * (1.0 - ((td - 1.0) / sd) * (tmu2 / (1.0 - tmu2))));
  d.holds = static_cast<double>(delta) < d.rhs.value;
  return d;
}

/// Upper limit on t from reverting the overlap condition, a quadratic in t:
/// t < (k - 1) [sqrt((1 + 1/(k - 1)) mu^{-2} / (k - 1) + 1/4) - 1], k = s - delta.
inline Threshold t_threshold_given_overlap(long s, long delta, double mu) {
  detail::check_overlap(s, delta);
  detail::check_mu(mu);
  if (s - delta < 2) return Threshold::flagged(ThresholdStatus::inapplicable);
  if (mu == 0.0) return Threshold::flagged(ThresholdStatus::unbounded);
  const double k1 = static_cast<double>(s - delta - 1);
  const double inner = (1.0 + 1.0 / k1) * (1.0 / (mu * mu)) / k1 + 0.25;
  return Threshold::of(k1 * (std::sqrt(inner) - 1.0));
}

/// |S| + |T| > delta + sqrt(s - delta) / mu.
inline Threshold generic_up_threshold(long s, long delta, double mu) {
  detail::check_overlap(s, delta);
  detail::check_mu(mu);
  if (mu == 0.0) return Threshold::flagged(ThresholdStatus::unbounded);
  return Threshold::of(static_cast<double>(delta) + std::sqrt(static_cast<double>(s - delta)) / mu);
}

/// t < (s - 2 delta m / N) (1 - 2m / N)^{-1}, valid when N > 2m.
inline Threshold weak_gap_threshold(long s, long delta, long m, long n_atoms) {
  detail::check_overlap(s, delta);
  detail::check_dims(m, n_atoms);
  if (n_atoms <= 2 * m) return Threshold::flagged(ThresholdStatus::hypothesis_violated);
  const double a = 2.0 * static_cast<double>(m) / static_cast<double>(n_atoms);
  return Threshold::of((static_cast<double>(s) - static_cast<double>(delta) * a) / (1.0 - a));
}

/// t <= s + 2 (s - delta) m / N; a weaker sufficient condition than the above.
inline Threshold weak_gap_simplified(long s, long delta, long m, long n_atoms) {
  detail::check_overlap(s, delta);
  detail::check_dims(m, n_atoms);
  if (n_atoms <= 2 * m) return Threshold::flagged(ThresholdStatus::hypothesis_violated);
  const double a = 2.0 * static_cast<double>(m) / static_cast<double>(n_atoms);
  return Threshold::of(static_cast<double>(s) + static_cast<double>(s - delta) * a);
}

/// Every threshold evaluated at one parameter point. Pass m = N = 0 to skip
/// the two weak-incoherence thresholds.
struct GapThresholds {
  long s = 0, t = 0, delta = 0;
  double mu = 0.0;
  long m = 0, n_atoms = 0;

  long donoho_elad_lhs = 0;  // s + t
  Threshold donoho_elad_rhs;  // 1/mu
  Threshold strong_gap_rhs;
  OverlapDecision overlap;
  Threshold t_threshold;
  Threshold generic_up_rhs;
  Threshold weak_gap_rhs;
  Threshold weak_gap_simplified_rhs;
};

inline GapThresholds compute_gap_thresholds(long s, long t, long delta, double mu, long m, long n_atoms) {
  GapThresholds g;
  g.s = s;
  g.t = t;
  g.delta = delta;
  g.mu = mu;
  g.m = m;
  g.n_atoms = n_atoms;
  g.donoho_elad_lhs = s + t;
  g.donoho_elad_rhs = donoho_elad_threshold(mu);
  g.strong_gap_rhs = strong_gap_threshold(s, mu);
  g.overlap = overlap_condition(s, t, delta, mu);
  g.t_threshold = t_threshold_given_overlap(s, delta, mu);
  g.generic_up_rhs = generic_up_threshold(s, delta, mu);
  if (m == 0 && n_atoms == 0) {
    g.weak_gap_rhs = Threshold::flagged(ThresholdStatus::not_evaluated);
    g.weak_gap_simplified_rhs = Threshold::flagged(ThresholdStatus::not_evaluated);
  } else {
    g.weak_gap_rhs = weak_gap_threshold(s, delta, m, n_atoms);
    g.weak_gap_simplified_rhs = weak_gap_simplified(s, delta, m, n_atoms);
  }
  return g;
}

}  // namespace sgap
