#pragma once

// Monte Carlo tests of representability for generic signals u = Phi_S x.
//
// A generic signal lands in range(Phi_T) with probability zero unless
// range(Phi_S) is contained in range(Phi_T). Numerically that dichotomy is
// read off the relative least-squares residual of u over Phi_T, with a
// ceiling below which u counts as representable and a strictly larger floor
// above which it does not.

#include "sgap/dictionary.hpp"
#include "sgap/gap_bounds.hpp"
#include "sgap/parallel.hpp"
#include "sgap/random_sets.hpp"
#include "sgap/schatten_rank.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgap {

struct GenericSignal {
  AtomSet support;
  Vector coefficients;
  Vector signal;
  std::uint64_t rng_seed = 0;
};

/// u = Phi_S x with x i.i.d. standard complex Gaussian.
inline GenericSignal draw_generic_signal(const Dictionary& d, const AtomSet& s, std::uint64_t seed) {
  if (s.empty()) throw std::invalid_argument("generic signal needs a nonempty support");
  const Matrix phi_s = d.columns(s);
  detail::require_independent(phi_s);
  Rng rng(seed);
  GenericSignal g;
  g.support = s;
  g.coefficients = complex_gaussian_vector(s.size(), rng);
  g.signal = phi_s * g.coefficients;
  g.rng_seed = seed;
  return g;
}

struct RankCondition {
  bool holds = false;  // |T| < rank(Phi_{S u T})
  Index t_size = 0;
  RankReport report;   // for Phi_{S u T}
};

inline RankCondition rank_condition(const Dictionary& d, const AtomSet& s, const AtomSet& t) {
  detail::require_independent(d.columns(s));
  RankCondition rc;
  rc.t_size = t.size();
  rc.report = make_rank_report(d, set_union(s, t));
  rc.holds = rc.t_size < rc.report.exact_rank;
  return rc;
}

struct ResidualTolerances {
  double ceiling = 1e-10;  // residual <= ceiling: representable
  double floor = 1e-6;     // residual > floor: not representable

  void validate() const {
    if (!(floor > ceiling) || !(ceiling >= 0.0))
      throw std::invalid_argument("residual floor must be strictly above the ceiling");
  }
};

enum class Verdict { not_representable, representable, inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::not_representable: return "NOT_REPRESENTABLE";
    case Verdict::representable: return "REPRESENTABLE";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

inline Verdict classify_residual(double residual, const ResidualTolerances& tol) {
  if (residual <= tol.ceiling) return Verdict::representable;
  if (residual > tol.floor) return Verdict::not_representable;
  return Verdict::inconclusive;
}

struct RepresentabilityVerdict {
  std::optional<bool> rank_condition_holds;  // known when the signal carries its support
  double residual = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

/// ||u - P_T u|| / ||u|| with P_T the orthogonal projector onto range(Phi_T).
inline double relative_residual(const Matrix& phi_t, const Vector& u) {
  const double norm_u = u.norm();
  if (norm_u == 0.0) throw std::invalid_argument("representability test needs a nonzero signal");
  const Matrix q = range_basis(phi_t);
  const Vector r = u - q * (q.adjoint() * u);
  return r.norm() / norm_u;
}

inline RepresentabilityVerdict test_representability(const Dictionary& d, const AtomSet& t, const Vector& u,
                                                     const ResidualTolerances& tol = {}) {
  if (t.empty()) throw std::invalid_argument("representability test needs a nonempty T");
  tol.validate();
  RepresentabilityVerdict v;
  v.residual = relative_residual(d.columns(t), u);
  v.verdict = classify_residual(v.residual, tol);
  return v;
}

inline RepresentabilityVerdict test_representability(const Dictionary& d, const AtomSet& t,
                                                     const GenericSignal& signal,
                                                     const ResidualTolerances& tol = {}) {
  RepresentabilityVerdict v = test_representability(d, t, signal.signal, tol);
  v.rank_condition_holds = rank_condition(d, signal.support, t).holds;
  return v;
}

// ---------------------------------------------------------------------------
// Experiment reports

/// One (S, T) pair and the algebraic facts about it.
struct PairRecord {
  Index pair = 0;
  std::uint64_t seed = 0;
  AtomSet s;
  AtomSet t;
  Index delta = 0;
  Index rank_r = 0;  // rank(Phi_{S u T})
  Index rank_t = 0;  // rank(Phi_T)
  bool rank_condition = false;
  bool containment = false;  // rank_r == rank_t, i.e. range(Phi_S) inside range(Phi_T)
  std::optional<bool> predicted;  // the experiment's closed-form condition, when it has one
  double condition_t = 1.0;
  int s_redraws = 0;
  int t_redraws = 0;
};

struct TrialRecord {
  Index pair = 0;
  Index trial = 0;
  std::uint64_t seed = 0;
  double residual = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

struct ExperimentSummary {
  Index pairs = 0;
  Index trials = 0;
  Index representable = 0;
  Index not_representable = 0;
  Index inconclusive = 0;
  Index rank_condition_failures = 0;  // pairs with |T| >= rank(Phi_R)
  Index predicted_pairs = 0;
  Index soundness_violations = 0;     // rank condition holds, yet residual <= ceiling
  Index completeness_violations = 0;  // containment holds, yet residual > ceiling
  Index prediction_violations = 0;    // predicted non-representable, yet REPRESENTABLE
  Index conditioning_redraws = 0;
  Index independence_redraws = 0;

  bool consistent() const noexcept {
    return soundness_violations == 0 && completeness_violations == 0 && prediction_violations == 0 &&
           inconclusive == 0;
  }
};

struct ExperimentReport {
  std::string experiment;
  std::string prediction_rule;  // empty when no closed-form prediction applies
  Provenance dictionary;
  Index m = 0, n_atoms = 0;
  double coherence = 0.0;
  std::vector<std::pair<std::string, double>> params;
  ResidualTolerances tolerances;
  std::vector<PairRecord> pairs;
  std::vector<TrialRecord> trials;
  ExperimentSummary summary;
  std::vector<std::string> notes;
};

struct ExperimentOptions {
  ResidualTolerances tolerances;
  double max_condition = 1e6;  // T with cond(Phi_T) above this is redrawn
  int max_redraws = 100;
  int threads = 1;
};

namespace detail {

/// sigma_max / sigma_min over the min(rows, cols) singular values.
inline double row_or_column_condition(const Matrix& a) {
  const RealVector sigma = singular_values(a);
  if (sigma.size() == 0) return 1.0;
  const double lo = sigma(sigma.size() - 1);
  return lo > 0.0 ? sigma(0) / lo : kInfinity;
}

inline void fill_algebra(const Dictionary& d, PairRecord& p) {
  p.delta = intersection_size(p.s, p.t);
  p.rank_r = numerical_rank(d.columns(set_union(p.s, p.t)));
  p.rank_t = p.t.empty() ? 0 : numerical_rank(d.columns(p.t));
  p.rank_condition = p.t.size() < p.rank_r;
  p.containment = p.rank_r == p.rank_t;
  p.condition_t = p.t.empty() ? 1.0 : row_or_column_condition(d.columns(p.t));
}

inline void run_trials(const Dictionary& d, const PairRecord& p, Index trials, std::uint64_t master,
                       const ResidualTolerances& tol, std::vector<TrialRecord>& out) {
  const Matrix phi_t = d.columns(p.t);
  const Matrix q = range_basis(phi_t);
  for (Index k = 0; k < trials; ++k) {
    TrialRecord tr;
    tr.pair = p.pair;
    tr.trial = k;
    tr.seed = derive_seed(master, {1, static_cast<std::uint64_t>(p.pair), static_cast<std::uint64_t>(k)});
    const GenericSignal g = draw_generic_signal(d, p.s, tr.seed);
    const Vector r = g.signal - q * (q.adjoint() * g.signal);
    tr.residual = r.norm() / g.signal.norm();
    tr.verdict = classify_residual(tr.residual, tol);
    out.push_back(tr);
  }
}

inline ExperimentSummary summarize(const std::vector<PairRecord>& pairs, const std::vector<TrialRecord>& trials,
                                   const ResidualTolerances& tol) {
  ExperimentSummary s;
  s.pairs = static_cast<Index>(pairs.size());
  s.trials = static_cast<Index>(trials.size());
  for (const PairRecord& p : pairs) {
    if (!p.rank_condition) ++s.rank_condition_failures;
    if (p.predicted.value_or(false)) ++s.predicted_pairs;
    s.conditioning_redraws += p.t_redraws;
    s.independence_redraws += p.s_redraws;
  }
  for (const TrialRecord& t : trials) {
    const PairRecord& p = pairs[static_cast<std::size_t>(t.pair)];
    switch (t.verdict) {
      case Verdict::representable: ++s.representable; break;
      case Verdict::not_representable: ++s.not_representable; break;
      case Verdict::inconclusive: ++s.inconclusive; break;
    }
    if (p.rank_condition && t.residual <= tol.ceiling) ++s.soundness_violations;
    if (p.containment && t.residual > tol.ceiling) ++s.completeness_violations;
    if (p.predicted.value_or(false) && t.verdict == Verdict::representable) ++s.prediction_violations;
  }
  return s;
}

/// Draws S (uniform, redrawn until independent) and T with |S n T| = delta
/// exactly: delta uniform atoms of S plus t - delta uniform atoms outside S.
/// T is redrawn while cond(Phi_T) exceeds the options' limit.
inline PairRecord sample_pair(const Dictionary& d, Index s, Index t, Index delta, Rng& rng,
                              const ExperimentOptions& opts) {
  PairRecord p;
  for (;;) {
    p.s = sample_uniform_subset(d.n_atoms(), s, rng);
    if (numerical_rank(d.columns(p.s)) == s) break;
    if (++p.s_redraws > opts.max_redraws)
      throw std::runtime_error("could not draw a linearly independent S of size " + std::to_string(s) +
                               " from dictionary '" + d.provenance().kind + "' (m = " + std::to_string(d.m()) +
                               ", N = " + std::to_string(d.n_atoms()) + ")");
  }
  const AtomSet outside = complement(p.s, d.n_atoms());
  for (;;) {
    p.t = set_union(sample_from(p.s, delta, rng), sample_from(outside, t - delta, rng));
    const double cond = row_or_column_condition(d.columns(p.t));
    if (cond <= opts.max_condition) break;
    if (++p.t_redraws > opts.max_redraws)
      throw std::runtime_error("could not draw a T with cond(Phi_T) <= " + std::to_string(opts.max_condition));
  }
  return p;
}

template <class Predict>
ExperimentReport pair_experiment(const Dictionary& d, std::string name, std::string rule, Index s, Index t_min,
                                 Index t_max, Index delta, Index pairs, Index trials, std::uint64_t seed,
                                 const ExperimentOptions& opts, Predict&& predict) {
  opts.tolerances.validate();
  if (s < 1) throw std::invalid_argument(name + ": s must be at least 1");
  if (t_min > t_max) throw std::invalid_argument(name + ": empty range of t");
  if (t_min < 0 || delta < 0 || delta > std::min(s, t_min))
    throw std::invalid_argument(name + ": need 0 <= delta <= min(s, t)");
  if (s + t_max - delta > d.n_atoms()) throw std::invalid_argument(name + ": s + t - delta exceeds N");
  if (pairs < 0 || trials < 0) throw std::invalid_argument(name + ": pair and trial counts must be nonnegative");

  ExperimentReport rep;
  rep.experiment = std::move(name);
  rep.prediction_rule = std::move(rule);
  rep.dictionary = d.provenance();
  rep.m = d.m();
  rep.n_atoms = d.n_atoms();
  rep.coherence = d.coherence();
  rep.tolerances = opts.tolerances;
  if (t_max == 0) {
    rep.notes.push_back("t = 0: no alternative representation to test");
    return rep;
  }

  rep.pairs.resize(static_cast<std::size_t>(pairs));
  std::vector<std::vector<TrialRecord>> per_pair(static_cast<std::size_t>(pairs));
  parallel_for(static_cast<std::size_t>(pairs), opts.threads, [&](std::size_t i) {
    const std::uint64_t pair_seed = derive_seed(seed, {0, static_cast<std::uint64_t>(i)});
    Rng rng(pair_seed);
    Index t = t_min;
    if (t_max > t_min) t = std::uniform_int_distribution<Index>(t_min, t_max)(rng);
    PairRecord p = sample_pair(d, s, t, delta, rng, opts);
    p.pair = static_cast<Index>(i);
    p.seed = pair_seed;
    fill_algebra(d, p);
    p.predicted = predict(p);
    run_trials(d, p, trials, seed, opts.tolerances, per_pair[i]);
    rep.pairs[i] = std::move(p);
  });
  for (auto& chunk : per_pair) rep.trials.insert(rep.trials.end(), chunk.begin(), chunk.end());
  rep.summary = summarize(rep.pairs, rep.trials, opts.tolerances);
  return rep;
}

}  // namespace detail

/// Repeated generic signals on a fixed (S, T): checks that the rank condition
/// forces non-representability and that range containment forces
/// representability.
inline ExperimentReport equivalence_experiment(const Dictionary& d, const AtomSet& s, const AtomSet& t, Index trials,
                                               std::uint64_t seed, const ExperimentOptions& opts = {}) {
  opts.tolerances.validate();
  if (t.empty()) throw std::invalid_argument("equivalence experiment needs a nonempty T");
  detail::require_independent(d.columns(s));
  ExperimentReport rep;
  rep.experiment = "equivalence";
  rep.dictionary = d.provenance();
  rep.m = d.m();
  rep.n_atoms = d.n_atoms();
  rep.coherence = d.coherence();
  rep.tolerances = opts.tolerances;
  rep.params = {{"s", double(s.size())}, {"t", double(t.size())}, {"trials", double(trials)}, {"seed", double(seed)}};
  PairRecord p;
  p.s = s;
  p.t = t;
  p.seed = seed;
  detail::fill_algebra(d, p);
  detail::run_trials(d, p, trials, seed, opts.tolerances, rep.trials);
  rep.pairs.push_back(std::move(p));
  rep.summary = detail::summarize(rep.pairs, rep.trials, opts.tolerances);
  return rep;
}

/// Random (S, T) with |S| = s, |T| = t, |S n T| = delta; each pair is scored
/// against the overlap condition delta < s - (t-1) t mu^2 / (1 - t mu^2).
inline ExperimentReport gap_experiment(const Dictionary& d, Index s, Index t, Index delta, Index pairs,
                                       Index trials, std::uint64_t seed, const ExperimentOptions& opts = {}) {
  const OverlapDecision decision =
      t > 0 ? overlap_condition(s, t, delta, d.coherence()) : OverlapDecision{};
  ExperimentReport rep = detail::pair_experiment(
      d, "gap", "overlap: delta < s - (t-1) t mu^2 / (1 - t mu^2)", s, t, t, delta, pairs, trials, seed, opts,
      [&](const PairRecord&) -> std::optional<bool> {
        if (!decision.rhs.ok()) return std::nullopt;
        return decision.holds;
      });
  rep.params = {{"s", double(s)},         {"t", double(t)},           {"delta", double(delta)},
                {"pairs", double(pairs)}, {"trials", double(trials)}, {"seed", double(seed)}};
  if (t > 0 && !decision.rhs.ok())
    rep.notes.push_back(std::string("overlap condition is ") + std::string(to_string(decision.rhs.status)) +
                        " at t mu^2 = " + std::to_string(double(t) * d.coherence() * d.coherence()) +
                        "; no closed-form prediction");
  return rep;
}

/// Random S and T disjoint from S with |T| uniform in [t_min, t_max], scored
/// against t <= s + 2 (s - delta) m / N (delta = 0 here).
inline ExperimentReport weak_gap_experiment(const Dictionary& d, Index s, Index t_min, Index t_max, Index pairs,
                                            Index trials, std::uint64_t seed, const ExperimentOptions& opts = {}) {
  const Threshold simplified = weak_gap_simplified(s, 0, d.m(), d.n_atoms());
  ExperimentReport rep = detail::pair_experiment(
      d, "weak_gap", "t <= s + 2 (s - delta) m / N", s, t_min, t_max, 0, pairs, trials, seed, opts,
      [&](const PairRecord& p) -> std::optional<bool> {
        if (!simplified.ok()) return std::nullopt;
        return static_cast<double>(p.t.size()) <= simplified.value;
      });
  rep.params = {{"s", double(s)},         {"t_min", double(t_min)},   {"t_max", double(t_max)},
                {"pairs", double(pairs)}, {"trials", double(trials)}, {"seed", double(seed)}};
  if (!simplified.ok()) rep.notes.push_back("N <= 2m: weak-incoherence hypothesis violated, no prediction");
  return rep;
}

}  // namespace sgap
