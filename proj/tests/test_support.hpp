#pragma once

// Random instance generators shared by the property tests.

#include "sgap/dictionary.hpp"
#include "sgap/random_sets.hpp"
#include "sgap/types.hpp"

#include <random>

namespace sgap::testing {

inline Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// rows x cols matrix of prescribed rank with singular values spread over a
/// few decades; real-valued when `real` is set.
inline Matrix random_low_rank(Rng& rng, Index rows, Index cols, Index rank, bool real = false) {
  auto draw = [&](Index r, Index c) {
    Matrix g = complex_gaussian_matrix(r, c, rng);
    if (real) g = g.real().cast<Complex>();
    return g;
  };
  const Matrix left = Eigen::HouseholderQR<Matrix>(draw(rows, rank)).householderQ() * Matrix::Identity(rows, rank);
  const Matrix right = Eigen::HouseholderQR<Matrix>(draw(cols, rank)).householderQ() * Matrix::Identity(cols, rank);
  std::uniform_real_distribution<double> log_scale(-3.0, 0.0);
  Matrix core = Matrix::Zero(rank, rank);
  for (Index i = 0; i < rank; ++i) core(i, i) = std::pow(10.0, log_scale(rng));
  return left * core * right.adjoint();
}

/// Random matrix of random shape (at most 32 x 64) and random rank.
inline Matrix random_matrix(Rng& rng) {
  const Index rows = uniform_index(rng, 1, 32);
  const Index cols = uniform_index(rng, 1, 64);
  const Index rank = uniform_index(rng, 1, std::min(rows, cols));
  const bool real = uniform_index(rng, 0, 1) == 0;
  return random_low_rank(rng, rows, cols, rank, real);
}

/// A small pool of structurally different dictionaries.
inline std::vector<Dictionary> dictionary_pool() {
  return {build_spikes_sines(16), build_random_unit_norm(16, 40, 101), build_random_tight_frame(16, 48, 102),
          build_random_tight_frame(12, 40, 103), build_identity(10)};
}

inline AtomSet random_subset(Rng& rng, Index n, Index k) { return sample_uniform_subset(n, k, rng); }

}  // namespace sgap::testing
