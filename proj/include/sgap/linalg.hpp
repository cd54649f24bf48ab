#pragma once

#include "sgap/types.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <optional>

namespace sgap {

/// Singular values in weakly decreasing order. Empty input gives an empty vector.
inline RealVector singular_values(const Matrix& a) {
  if (a.size() == 0) return RealVector(0);
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

/// Cutoff sigma_max * max(rows, cols) * machine epsilon.
inline double default_rank_tolerance(const RealVector& sigma, Index rows, Index cols) {
  if (sigma.size() == 0) return 0.0;
  return sigma(0) * static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

inline Index count_above(const RealVector& sigma, double tol) {
  Index r = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > tol) ++r;
  return r;
}

/// Number of singular values strictly above `tol` (default cutoff when absent).
inline Index numerical_rank(const Matrix& a, std::optional<double> tol = std::nullopt) {
  const RealVector sigma = singular_values(a);
  return count_above(sigma, tol.value_or(default_rank_tolerance(sigma, a.rows(), a.cols())));
}

inline double spectral_norm(const Matrix& a) {
  const RealVector sigma = singular_values(a);
  return sigma.size() == 0 ? 0.0 : sigma(0);
}

/// Smallest singular value of `a` acting on its column space. A wide matrix
/// cannot be injective, so it reports zero.
inline double smallest_singular_value(const Matrix& a) {
  const RealVector sigma = singular_values(a);
  if (sigma.size() == 0) return 0.0;
  if (a.cols() > a.rows()) return 0.0;
  return sigma(sigma.size() - 1);
}

/// sigma_max / sigma_min over the columns; infinity for rank-deficient or wide input.
inline double condition_number(const Matrix& a) {
  const RealVector sigma = singular_values(a);
  if (sigma.size() == 0) return 1.0;
  if (a.cols() > a.rows()) return std::numeric_limits<double>::infinity();
  const double lo = sigma(sigma.size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return sigma(0) / lo;
}

/// Column submatrix Phi_S.
inline Matrix columns(const Matrix& phi, const AtomSet& s) {
  if (s.max_index() >= phi.cols())
    throw std::out_of_range("atom index " + std::to_string(s.max_index()) + " out of range for " +
                            std::to_string(phi.cols()) + " atoms");
  Matrix out(phi.rows(), s.size());
  for (Index k = 0; k < s.size(); ++k) out.col(k) = phi.col(s[k]);
  return out;
}

/// Orthonormal basis for range(A), from the left singular vectors above the
/// default cutoff.
inline Matrix range_basis(const Matrix& a, std::optional<double> tol = std::nullopt) {
  if (a.size() == 0) return Matrix(a.rows(), 0);
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const RealVector& sigma = svd.singularValues();
  const Index r = count_above(sigma, tol.value_or(default_rank_tolerance(sigma, a.rows(), a.cols())));
  return svd.matrixU().leftCols(r);
}

inline bool is_hermitian(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Eigenvalues of the Hermitian part, ascending.
inline RealVector hermitian_eigenvalues(const Matrix& a) {
  if (a.size() == 0) return RealVector(0);
  const Matrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace sgap
