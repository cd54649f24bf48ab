#pragma once

#include "sgap/linalg.hpp"
#include "sgap/types.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

namespace sgap {

/// How a dictionary was built: kind, seed (for random constructions) and
/// numeric parameters.
struct Provenance {
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> params;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

inline constexpr double kColumnNormTolerance = 1e-12;
inline constexpr double kTightnessTolerance = 1e-8;

/// max_{j != k} |<phi_j, phi_k>| over the exact Gram matrix.
inline double coherence(const Matrix& atoms) {
  if (atoms.cols() < 2) throw std::invalid_argument("coherence requires at least two atoms");
  const Matrix gram = atoms.adjoint() * atoms;
  double mu = 0.0;
  for (Index k = 0; k < gram.cols(); ++k)
    for (Index j = 0; j < k; ++j) mu = std::max(mu, std::abs(gram(j, k)));
  return mu;
}

/// Squared spectral norm.
inline double redundancy(const Matrix& atoms) {
  const double s = spectral_norm(atoms);
  return s * s;
}

/// Lower bound on the coherence of any N unit vectors in C^m.
inline double welch_lower_bound(Index m, Index n_atoms) {
  if (m < 1) throw std::invalid_argument("welch_lower_bound: m must be positive");
  if (n_atoms <= m) return 0.0;
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n_atoms);
  return std::sqrt((nd - md) / (md * (nd - 1.0)));
}

/// An m x N matrix of unit-norm atoms spanning C^m, with cached coherence and
/// redundancy. Immutable after construction.
class Dictionary {
 public:
  /// Validates unit column norms and spanning, then caches the metrics.
  static Dictionary from_atoms(Matrix atoms, Provenance provenance) {
    if (atoms.rows() < 1 || atoms.cols() < 1) throw std::invalid_argument("dictionary must be non-empty");
    for (Index j = 0; j < atoms.cols(); ++j) {
      const double norm = atoms.col(j).norm();
      if (std::abs(norm - 1.0) > kColumnNormTolerance) {
        std::ostringstream msg;
        msg << "atom " << j << " has norm " << norm << ", expected 1";
        throw std::invalid_argument(msg.str());
      }
    }
    const Index rank = numerical_rank(atoms);
    if (rank != atoms.rows())
      throw std::invalid_argument("atoms do not span the ambient space (rank " + std::to_string(rank) +
                                  " < m = " + std::to_string(atoms.rows()) + ")");
    Dictionary d;
    d.coherence_ = atoms.cols() >= 2 ? sgap::coherence(atoms) : 0.0;
    d.redundancy_ = sgap::redundancy(atoms);
    d.atoms_ = std::move(atoms);
    d.provenance_ = std::move(provenance);
    return d;
  }

  const Matrix& atoms() const noexcept { return atoms_; }
  Index m() const noexcept { return atoms_.rows(); }
  Index n_atoms() const noexcept { return atoms_.cols(); }
  double coherence() const noexcept { return coherence_; }
  double redundancy() const noexcept { return redundancy_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  Matrix columns(const AtomSet& s) const { return sgap::columns(atoms_, s); }
  Vector atom(Index j) const { return atoms_.col(j); }

  /// ||Phi||^2 == N/m within `tol`.
  bool is_tight_frame(double tol = kTightnessTolerance) const {
    return std::abs(redundancy_ - static_cast<double>(n_atoms()) / static_cast<double>(m())) <= tol;
  }

 private:
  Dictionary() = default;

  Matrix atoms_;
  double coherence_ = 0.0;
  double redundancy_ = 0.0;
  Provenance provenance_;
};

inline double coherence(const Dictionary& d) {
  if (d.n_atoms() < 2) throw std::invalid_argument("coherence requires at least two atoms");
  return d.coherence();
}
inline double redundancy(const Dictionary& d) { return d.redundancy(); }

namespace detail {

inline void normalize_columns(Matrix& a) {
  for (Index j = 0; j < a.cols(); ++j) a.col(j) /= a.col(j).norm();
}

}  // namespace detail

/// m x m identity: the standard orthonormal basis.
inline Dictionary build_identity(Index m) {
  if (m < 1) throw std::invalid_argument("identity dictionary requires m >= 1");
  return Dictionary::from_atoms(Matrix::Identity(m, m), {"identity", std::nullopt, {{"m", double(m)}}});
}

/// Identity followed by the unitary DFT, F(j, k) = exp(-2 pi i jk / m) / sqrt(m).
inline Dictionary build_spikes_sines(Index m) {
  if (m < 2) throw std::invalid_argument("spikes_sines requires m >= 2, got " + std::to_string(m));
  Matrix phi = Matrix::Zero(m, 2 * m);
  phi.leftCols(m).setIdentity();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index k = 0; k < m; ++k) {
    for (Index j = 0; j < m; ++j) {
      // Reduce jk mod m before forming the angle to keep it in [0, 2 pi).
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % m) / static_cast<double>(m);
      phi(j, m + k) = std::polar(scale, angle);
    }
  }
  return Dictionary::from_atoms(std::move(phi), {"spikes-sines", std::nullopt, {{"m", double(m)}}});
}

/// Independent columns uniform on the complex unit sphere (normalized complex
/// Gaussians). Redraws the whole matrix if it fails to span, which happens
/// with probability zero.
inline Dictionary build_random_unit_norm(Index m, Index n_atoms, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("random_unit_norm requires m >= 1");
  if (n_atoms < m) throw std::invalid_argument("random_unit_norm requires n_atoms >= m");
  Rng rng(seed);
  Matrix phi = complex_gaussian_matrix(m, n_atoms, rng);
  detail::normalize_columns(phi);
  return Dictionary::from_atoms(std::move(phi),
                                {"random-unit-norm", seed, {{"m", double(m)}, {"n_atoms", double(n_atoms)}}});
}

struct TightFrameOptions {
  int max_iterations = 10000;
  double tightness_tolerance = kTightnessTolerance;
  double column_norm_tolerance = kTightnessTolerance;
};

class TightFrameNonConvergence : public std::runtime_error {
 public:
  TightFrameNonConvergence(int iterations, double tightness_residual, double column_norm_residual)
      : std::runtime_error(message(iterations, tightness_residual, column_norm_residual)),
        iterations_(iterations),
        tightness_residual_(tightness_residual),
        column_norm_residual_(column_norm_residual) {}

  int iterations() const noexcept { return iterations_; }
  double tightness_residual() const noexcept { return tightness_residual_; }
  double column_norm_residual() const noexcept { return column_norm_residual_; }

 private:
  static std::string message(int it, double tr, double cr) {
    std::ostringstream msg;
    msg << "tight frame construction did not converge after " << it << " iterations (|rho - N/m| = " << tr
        << ", max | ||phi_j|| - 1 | = " << cr << ")";
    return msg.str();
  }

  int iterations_;
  double tightness_residual_;
  double column_norm_residual_;
};

/// Unit-norm tight frame by alternating projections: replace Phi with the
/// nearest scaled co-isometry sqrt(N/m) U V*, then renormalize the columns,
/// until ||Phi||^2 = N/m and unit norms hold together.
inline Dictionary build_random_tight_frame(Index m, Index n_atoms, std::uint64_t seed,
                                           const TightFrameOptions& opts = {}) {
  if (m < 1) throw std::invalid_argument("random_tight_frame requires m >= 1");
  if (n_atoms <= m) throw std::invalid_argument("random_tight_frame requires n_atoms > m");
  const double target = static_cast<double>(n_atoms) / static_cast<double>(m);
  Rng rng(seed);
  Matrix phi = complex_gaussian_matrix(m, n_atoms, rng);
  detail::normalize_columns(phi);

  double tight_residual = std::abs(redundancy(phi) - target);
  double norm_residual = 0.0;
  int it = 0;
  while (tight_residual > opts.tightness_tolerance && it < opts.max_iterations) {
    ++it;
    Eigen::BDCSVD<Matrix> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    phi = std::sqrt(target) * svd.matrixU() * svd.matrixV().adjoint();
    detail::normalize_columns(phi);
    tight_residual = std::abs(redundancy(phi) - target);
  }
  for (Index j = 0; j < phi.cols(); ++j) norm_residual = std::max(norm_residual, std::abs(phi.col(j).norm() - 1.0));
  if (tight_residual > opts.tightness_tolerance || norm_residual > opts.column_norm_tolerance)
    throw TightFrameNonConvergence(it, tight_residual, norm_residual);
  return Dictionary::from_atoms(
      std::move(phi),
      {"random-tight-frame", seed, {{"m", double(m)}, {"n_atoms", double(n_atoms)}, {"iterations", double(it)}}});
}

/// Outcome of checking ||Phi||^2 = N/m and mu <= c / log N.
struct WeakIncoherenceCheck {
  bool tight = false;
  double tightness_residual = 0.0;  // |rho - N/m|
  double tightness_margin = 0.0;    // tolerance - residual
  bool incoherent = false;
  double coherence = 0.0;
  double coherence_limit = 0.0;  // c / log N
  double coherence_margin = 0.0;  // limit - mu
  bool passes() const noexcept { return tight && incoherent; }
};

inline WeakIncoherenceCheck is_weakly_incoherent(const Dictionary& d, double c,
                                                 double tightness_tol = kTightnessTolerance) {
  if (!(c > 0.0)) throw std::invalid_argument("is_weakly_incoherent: c must be positive");
  if (d.n_atoms() < 2) throw std::invalid_argument("is_weakly_incoherent: requires N >= 2");
  WeakIncoherenceCheck r;
  const double target = static_cast<double>(d.n_atoms()) / static_cast<double>(d.m());
  r.tightness_residual = std::abs(d.redundancy() - target);
  r.tightness_margin = tightness_tol - r.tightness_residual;
  r.tight = r.tightness_residual <= tightness_tol;
  r.coherence = d.coherence();
  r.coherence_limit = c / std::log(static_cast<double>(d.n_atoms()));
  r.coherence_margin = r.coherence_limit - r.coherence;
  r.incoherent = r.coherence <= r.coherence_limit;
  return r;
}

}  // namespace sgap
