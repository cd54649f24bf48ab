#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgap {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when a precondition on linear independence of an atom set fails.
class DependentSetError : public std::runtime_error {
 public:
  DependentSetError(const std::string& what, Index rank, Index size)
      : std::runtime_error(what), rank_(rank), size_(size) {}
  Index rank() const noexcept { return rank_; }
  Index size() const noexcept { return size_; }

 private:
  Index rank_;
  Index size_;
};

/// Ordered set of column indices into a dictionary.
///
/// Indices are kept strictly increasing; construction from an unsorted list
/// sorts it and rejects duplicates.
class AtomSet {
 public:
  AtomSet() = default;
  AtomSet(std::initializer_list<Index> indices) : AtomSet(std::vector<Index>(indices)) {}
  explicit AtomSet(std::vector<Index> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] < 0) throw std::invalid_argument("AtomSet: negative index");
      if (i > 0 && indices_[i] == indices_[i - 1])
        throw std::invalid_argument("AtomSet: duplicate index " + std::to_string(indices_[i]));
    }
  }

  static AtomSet range(Index first, Index last) {
    std::vector<Index> v;
    for (Index i = first; i < last; ++i) v.push_back(i);
    return AtomSet(std::move(v));
  }

  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  bool empty() const noexcept { return indices_.empty(); }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool contains(Index j) const { return std::binary_search(indices_.begin(), indices_.end(), j); }
  Index max_index() const { return indices_.empty() ? -1 : indices_.back(); }

  friend bool operator==(const AtomSet&, const AtomSet&) = default;

 private:
  std::vector<Index> indices_;
};

inline AtomSet set_union(const AtomSet& a, const AtomSet& b) {
  std::vector<Index> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return AtomSet(std::move(out));
}

inline AtomSet set_difference(const AtomSet& a, const AtomSet& b) {
  std::vector<Index> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return AtomSet(std::move(out));
}

inline Index intersection_size(const AtomSet& a, const AtomSet& b) {
  std::vector<Index> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return static_cast<Index>(out.size());
}

/// All indices in [0, n_atoms) not in `s`.
inline AtomSet complement(const AtomSet& s, Index n_atoms) {
  std::vector<Index> out;
  for (Index j = 0; j < n_atoms; ++j)
    if (!s.contains(j)) out.push_back(j);
  return AtomSet(std::move(out));
}

using Rng = std::mt19937_64;

/// Derives an independent 64-bit stream seed from a master seed and a path
/// of indices (e.g. pair, trial). Schedule-independent by construction.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.push_back(static_cast<std::uint32_t>(master & 0xffffffffu));
  words.push_back(static_cast<std::uint32_t>(master >> 32));
  for (std::uint64_t p : path) {
    words.push_back(static_cast<std::uint32_t>(p & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
inline Complex complex_gaussian(Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

inline Vector complex_gaussian_vector(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = complex_gaussian(rng);
  return v;
}

inline Matrix complex_gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = complex_gaussian(rng);
  return a;
}

}  // namespace sgap
