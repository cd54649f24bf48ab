#pragma once

// Numerical rank of a matrix and the analytic lower bounds on it: Schatten
// norm ratios, the trace/Frobenius and Frobenius/spectral estimates, the
// coherence bound for a set of atoms, and the Schur-complement machinery that
// splits the rank of Phi_R into |S| plus the rank of a projected block.

#include "sgap/dictionary.hpp"
#include "sgap/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace sgap {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

inline void check_schatten_order(double p) {
  if (std::isnan(p) || p < 1.0) {
    std::ostringstream msg;
    msg << "Schatten order must satisfy p >= 1, got " << p;
    throw std::invalid_argument(msg.str());
  }
}

// l_p norm of a nonnegative, weakly decreasing vector, scaled by its first
// entry so large p does not overflow.
inline double lp_norm_sorted(const RealVector& sigma, double p) {
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0.0;
  const double top = sigma(0);
  if (std::isinf(p)) return top;
  double acc = 0.0;
  for (Index i = 0; i < sigma.size(); ++i) acc += std::pow(sigma(i) / top, p);
  return top * std::pow(acc, 1.0 / p);
}

inline double norm_ratio_bound(const RealVector& sigma, double p, double q) {
  const double num = lp_norm_sorted(sigma, p);
  const double den = lp_norm_sorted(sigma, q);
  if (den == 0.0) return 0.0;
  const double exponent = std::isinf(q) ? p : p * q / (q - p);
  return std::pow(num / den, exponent);
}

inline double frobenius_squared(const RealVector& sigma) { return sigma.squaredNorm(); }

}  // namespace detail

/// ||sigma(A)||_p for p >= 1; pass kInfinity for the spectral norm.
inline double schatten_norm(const Matrix& a, double p) {
  detail::check_schatten_order(p);
  return detail::lp_norm_sorted(singular_values(a), p);
}

/// rank(A) >= (||A||_Sp / ||A||_Sq)^(pq/(q-p)), exponent p when q is infinite.
inline double rank_lb_norm_ratio(const Matrix& a, double p, double q) {
  detail::check_schatten_order(p);
  detail::check_schatten_order(q);
  if (!(p < q)) {
    std::ostringstream msg;
    msg << "norm-ratio bound requires p < q, got p = " << p << ", q = " << q;
    throw std::invalid_argument(msg.str());
  }
  return detail::norm_ratio_bound(singular_values(a), p, q);
}

/// trace(A)^2 / ||A||_F^2 for Hermitian positive-semidefinite A.
inline double rank_lb_trace_frobenius(const Matrix& a) {
  if (a.rows() != a.cols() || !is_hermitian(a, 1e-10))
    throw std::invalid_argument("trace/Frobenius bound requires a Hermitian matrix");
  const RealVector eig = hermitian_eigenvalues(a);
  if (eig.size() == 0) return 0.0;
  const double sigma_max = std::max(std::abs(eig(0)), std::abs(eig(eig.size() - 1)));
  if (eig(0) < -1e-8 * sigma_max) {
    std::ostringstream msg;
    msg << "trace/Frobenius bound requires a psd matrix; most negative eigenvalue " << eig(0);
    throw std::invalid_argument(msg.str());
  }
  const double fro2 = a.squaredNorm();
  if (fro2 == 0.0) return 0.0;
  const double tr = a.trace().real();
  return tr * tr / fro2;
}

/// ||A||_F^2 / ||A||^2.
inline double rank_lb_frobenius_spectral(const Matrix& a) {
  const RealVector sigma = singular_values(a);
  if (sigma.size() == 0 || sigma(0) == 0.0)
    throw std::invalid_argument("Frobenius/spectral bound requires a nonzero matrix");
  return detail::frobenius_squared(sigma) / (sigma(0) * sigma(0));
}

/// r / (1 + (r - 1) mu^2): rank of any r atoms with pairwise inner products at most mu.
inline double rank_lb_coherence(Index r, double mu) {
  if (r < 1) throw std::invalid_argument("coherence rank bound requires r >= 1");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("coherence rank bound requires 0 <= mu <= 1");
  const double rd = static_cast<double>(r);
  return rd / (1.0 + (rd - 1.0) * mu * mu);
}

struct NormRatioBound {
  double p = 1.0;
  double q = 2.0;
  double value = 0.0;
};

/// Exact numerical rank of one matrix alongside every analytic lower bound.
struct RankReport {
  Index rows = 0;
  Index cols = 0;
  Index exact_rank = 0;
  double tolerance_used = 0.0;
  double lb_trace_frobenius = 0.0;      // ||A||_S1^2 / ||A||_F^2
  double lb_frobenius_spectral = 0.0;   // ||A||_F^2 / ||A||^2
  std::optional<NormRatioBound> lb_norm_ratio;
  std::optional<double> lb_coherence;   // only for column submatrices of a dictionary
  RealVector singular_values;

  /// Largest analytic bound in the report.
  double best_lower_bound() const {
    double b = std::max(lb_trace_frobenius, lb_frobenius_spectral);
    if (lb_norm_ratio) b = std::max(b, lb_norm_ratio->value);
    if (lb_coherence) b = std::max(b, *lb_coherence);
    return b;
  }
};

struct RankReportOptions {
  std::optional<double> tolerance;
  std::optional<std::pair<double, double>> norm_ratio;  // (p, q)
  std::optional<double> coherence;  // mu; treats A as r = cols atoms
};

inline RankReport make_rank_report(const Matrix& a, const RankReportOptions& opts = {}) {
  RankReport r;
  r.rows = a.rows();
  r.cols = a.cols();
  r.singular_values = singular_values(a);
  r.tolerance_used = opts.tolerance.value_or(default_rank_tolerance(r.singular_values, a.rows(), a.cols()));
  r.exact_rank = count_above(r.singular_values, r.tolerance_used);
  const RealVector& s = r.singular_values;
  if (s.size() > 0 && s(0) > 0.0) {
    const double s1 = detail::lp_norm_sorted(s, 1.0);
    const double fro2 = detail::frobenius_squared(s);
    r.lb_trace_frobenius = s1 * s1 / fro2;
    r.lb_frobenius_spectral = fro2 / (s(0) * s(0));
  }
  if (opts.norm_ratio) {
    const auto [p, q] = *opts.norm_ratio;
    detail::check_schatten_order(p);
    detail::check_schatten_order(q);
    if (!(p < q)) throw std::invalid_argument("norm-ratio bound requires p < q");
    r.lb_norm_ratio = NormRatioBound{p, q, detail::norm_ratio_bound(s, p, q)};
  }
  if (opts.coherence && a.cols() >= 1) r.lb_coherence = rank_lb_coherence(a.cols(), *opts.coherence);
  return r;
}

/// Rank report for Phi_R, including the coherence bound at the dictionary's mu.
inline RankReport make_rank_report(const Dictionary& d, const AtomSet& r,
                                   std::optional<std::pair<double, double>> norm_ratio = std::nullopt) {
  RankReportOptions opts;
  opts.norm_ratio = norm_ratio;
  if (!r.empty()) opts.coherence = d.coherence();
  return make_rank_report(d.columns(r), opts);
}

// ---------------------------------------------------------------------------
// Schur complements

class SingularBlockError : public std::runtime_error {
 public:
  SingularBlockError(double smallest_eigenvalue, double threshold)
      : std::runtime_error(message(smallest_eigenvalue, threshold)), smallest_eigenvalue_(smallest_eigenvalue) {}
  double smallest_eigenvalue() const noexcept { return smallest_eigenvalue_; }

 private:
  static std::string message(double lo, double thr) {
    std::ostringstream msg;
    msg << "leading block is singular: smallest eigenvalue " << lo << " <= gate " << thr;
    return msg.str();
  }
  double smallest_eigenvalue_;
};

inline constexpr double kNonsingularGate = 1e-10;

namespace detail {

struct SchurParts {
  Matrix complement;
  double leading_min_eig = 0.0;
  double leading_max_eig = 0.0;
  double sigma_max = 0.0;
};

inline SchurParts schur_parts(const Matrix& x, Index k) {
  if (x.rows() != x.cols()) throw std::invalid_argument("Schur complement requires a square matrix");
  const Index n = x.rows();
  if (k < 1 || k > n) throw std::invalid_argument("Schur split must satisfy 1 <= k <= n");
  if (!is_hermitian(x, 1e-10)) throw std::invalid_argument("Schur complement requires a Hermitian matrix");
  const RealVector eig_x = hermitian_eigenvalues(x);
  SchurParts out;
  out.sigma_max = std::max(std::abs(eig_x(0)), std::abs(eig_x(n - 1)));
  if (eig_x(0) < -1e-8 * out.sigma_max) throw std::invalid_argument("Schur complement requires a psd matrix");

  const Matrix a = x.topLeftCorner(k, k);
  const RealVector eig_a = hermitian_eigenvalues(a);
  out.leading_min_eig = eig_a(0);
  out.leading_max_eig = eig_a(k - 1);
  const double gate = kNonsingularGate * out.sigma_max;
  if (!(out.leading_min_eig > gate)) throw SingularBlockError(out.leading_min_eig, gate);

  const Matrix b = x.topRightCorner(k, n - k);
  const Matrix c = x.bottomRightCorner(n - k, n - k);
  const Eigen::LLT<Matrix> llt(0.5 * (a + a.adjoint()));
  const Matrix s = c - b.adjoint() * llt.solve(b);
  out.complement = 0.5 * (s + s.adjoint());
  return out;
}

}  // namespace detail

/// X/A = C - B* A^{-1} B for X = [[A, B], [B*, C]] with A the leading k x k block.
inline Matrix schur_complement(const Matrix& x, Index k) { return detail::schur_parts(x, k).complement; }

struct SchurRankCheck {
  Index rank_x = 0;
  Index rank_leading = 0;
  Index rank_complement = 0;
  double tolerance_x = 0.0;
  double tolerance_complement = 0.0;
  double leading_condition = 1.0;
  bool holds() const noexcept { return rank_x == rank_leading + rank_complement; }
};

/// Checks rank(X) = rank(A) + rank(X/A) as an integer identity.
///
/// rank(X) and rank(A) use the cutoff sigma_max(X) * n * eps; the complement
/// uses that cutoff times kappa(A), the growth factor of its forward error.
inline SchurRankCheck verify_schur_rank_identity(const Matrix& x, Index k) {
  const detail::SchurParts parts = detail::schur_parts(x, k);
  const double eps = std::numeric_limits<double>::epsilon();
  SchurRankCheck out;
  out.tolerance_x = parts.sigma_max * static_cast<double>(x.rows()) * eps;
  out.leading_condition = parts.leading_max_eig / parts.leading_min_eig;
  out.tolerance_complement = out.tolerance_x * out.leading_condition;
  out.rank_x = numerical_rank(x, out.tolerance_x);
  out.rank_leading = numerical_rank(x.topLeftCorner(k, k), out.tolerance_x);
  out.rank_complement = parts.complement.size() == 0 ? 0 : numerical_rank(parts.complement, out.tolerance_complement);
  return out;
}

// ---------------------------------------------------------------------------
// Projected-block decomposition of rank(Phi_R), R = S u V.

namespace detail {

inline void check_disjoint(const AtomSet& s, const AtomSet& v) {
  if (intersection_size(s, v) != 0) throw std::invalid_argument("V must be disjoint from S");
}

/// Throws unless Phi_S has full column rank under the default cutoff.
inline void require_independent(const Matrix& phi_s, const std::string& what = "S") {
  const Index r = numerical_rank(phi_s);
  if (r != phi_s.cols())
    throw DependentSetError(what + " is linearly dependent (rank " + std::to_string(r) + " < " +
                                std::to_string(phi_s.cols()) + ")",
                            r, phi_s.cols());
}

}  // namespace detail

struct ProjectedRankDecomposition {
  Index s_size = 0;
  Index projected_rank = 0;  // rank((I - P_S) Phi_V)
  Index rank_r = 0;          // rank(Phi_{S u V})
  double tolerance_projected = 0.0;
  Index sum() const noexcept { return s_size + projected_rank; }
  bool holds() const noexcept { return rank_r == sum(); }
};

/// (I - P_S) Phi_V with P_S the orthogonal projector onto range(Phi_S).
inline Matrix projected_block(const Dictionary& d, const AtomSet& s, const AtomSet& v) {
  const Matrix phi_s = d.columns(s);
  const Matrix phi_v = d.columns(v);
  if (s.empty()) return phi_v;
  const Eigen::HouseholderQR<Matrix> qr(phi_s);
  const Matrix q = qr.householderQ() * Matrix::Identity(phi_s.rows(), phi_s.cols());
  return phi_v - q * (q.adjoint() * phi_v);
}

inline ProjectedRankDecomposition rank_decompose_projected(const Dictionary& d, const AtomSet& s, const AtomSet& v) {
  detail::check_disjoint(s, v);
  const Matrix phi_s = d.columns(s);
  detail::require_independent(phi_s);
  const AtomSet r = set_union(s, v);
  const Matrix phi_r = d.columns(r);
  const RealVector sigma_r = singular_values(phi_r);

  ProjectedRankDecomposition out;
  out.s_size = s.size();
  out.rank_r = count_above(sigma_r, default_rank_tolerance(sigma_r, phi_r.rows(), phi_r.cols()));
  const double kappa = s.empty() ? 1.0 : condition_number(phi_s);
  out.tolerance_projected = default_rank_tolerance(sigma_r, phi_r.rows(), phi_r.cols()) * kappa;
  out.projected_rank = v.empty() ? 0 : numerical_rank(projected_block(d, s, v), out.tolerance_projected);
  return out;
}

/// max_{v not in S} ||Phi_S* phi_v||; zero when S holds every atom.
inline double max_cross_correlation(const Dictionary& d, const AtomSet& s) {
  if (s.empty()) return 0.0;
  const Matrix cross = d.columns(s).adjoint() * d.atoms();
  double best = 0.0;
  for (Index j = 0; j < d.n_atoms(); ++j)
    if (!s.contains(j)) best = std::max(best, cross.col(j).norm());
  return best;
}

/// rank((I - P_S) Phi_V) >= rho^{-1} |V| (1 - ||Phi_S^+||^2 max_{v not in S} ||Phi_S* phi_v||^2),
/// clamped below at zero. ||Phi_S^+|| is evaluated as 1 / sigma_min(Phi_S).
inline double rank_lb_weak(const Dictionary& d, const AtomSet& s, const AtomSet& v) {
  detail::check_disjoint(s, v);
  const Matrix phi_s = d.columns(s);
  detail::require_independent(phi_s);
  if (v.empty()) return 0.0;
  double pinv_sq = 1.0;
  if (!s.empty()) {
    const double lo = smallest_singular_value(phi_s);
    pinv_sq = 1.0 / (lo * lo);
  }
  const double cross = max_cross_correlation(d, s);
  const double bound = static_cast<double>(v.size()) / d.redundancy() * (1.0 - pinv_sq * cross * cross);
  return std::max(0.0, bound);
}

}  // namespace sgap
