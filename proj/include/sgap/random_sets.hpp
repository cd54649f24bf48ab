#pragma once

// Random atom subsets and the conditioning statistics of Phi_S that control
// the weak-incoherence rank bound.

#include "sgap/dictionary.hpp"
#include "sgap/parallel.hpp"
#include "sgap/schatten_rank.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

namespace sgap {

/// Uniform s-subset of [0, n_atoms): the first s slots of a Fisher-Yates shuffle.
inline AtomSet sample_uniform_subset(Index n_atoms, Index s, Rng& rng) {
  if (s < 0 || s > n_atoms)
    throw std::invalid_argument("cannot sample " + std::to_string(s) + " of " + std::to_string(n_atoms) + " atoms");
  std::vector<Index> pool(static_cast<std::size_t>(n_atoms));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, n_atoms - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(s));
  return AtomSet(std::move(pool));
}

inline AtomSet sample_uniform_subset(Index n_atoms, Index s, std::uint64_t seed) {
  if (s < 1) throw std::invalid_argument("subset size must be at least 1");
  Rng rng(seed);
  return sample_uniform_subset(n_atoms, s, rng);
}

/// Uniform k-subset of the given pool of indices.
inline AtomSet sample_from(const AtomSet& pool, Index k, Rng& rng) {
  const AtomSet local = sample_uniform_subset(pool.size(), k, rng);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Index i : local) out.push_back(pool[i]);
  return AtomSet(std::move(out));
}

struct SubsetStatistics {
  double max_cross_correlation = 0.0;  // max_{v not in S} ||Phi_S* phi_v||
  double gram_deviation = 0.0;         // ||Phi_S* Phi_S - I||
  double pinv_norm = 1.0;              // 1 / sigma_min(Phi_S)
  Index s = 0;
  std::uint64_t seed = 0;
};

inline constexpr double kCrossGate = 0.5;
inline const double kPinvGate = std::sqrt(2.0);

inline SubsetStatistics subset_statistics(const Dictionary& d, const AtomSet& s, std::uint64_t seed = 0) {
  if (s.empty()) throw std::invalid_argument("subset statistics require a nonempty set");
  const Matrix phi_s = d.columns(s);
  SubsetStatistics st;
  st.s = s.size();
  st.seed = seed;
  st.max_cross_correlation = max_cross_correlation(d, s);
  const Matrix dev = phi_s.adjoint() * phi_s - Matrix::Identity(s.size(), s.size());
  const RealVector eig = hermitian_eigenvalues(dev);
  st.gram_deviation = std::max(std::abs(eig(0)), std::abs(eig(eig.size() - 1)));
  const double lo = smallest_singular_value(phi_s);
  st.pinv_norm = lo > 0.0 ? 1.0 / lo : kInfinity;
  return st;
}

/// Empirical quantile by nearest rank: sorted[ceil(q n) - 1].
inline double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

struct SweepConfig {
  std::vector<Index> s_values;
  Index trials_per_s = 0;
  double beta = 1.0;             // upper quantile level is 1 - N^{-beta}
  std::uint64_t master_seed = 0;
  double c_sparsity = 1.0;       // s <= c m / log N when in_regime
  bool in_regime = false;
  int threads = 1;
};

struct SweepTrial {
  Index s = 0;
  Index trial = 0;
  SubsetStatistics stats;
  bool cross_gate = false;  // max cross <= 1/2
  bool pinv_gate = false;   // pinv norm <= sqrt(2)
};

struct StatisticQuantiles {
  double median = 0.0;
  double upper = 0.0;
};

struct SweepSummary {
  Index s = 0;
  Index trials = 0;
  StatisticQuantiles max_cross_correlation;
  StatisticQuantiles gram_deviation;
  StatisticQuantiles pinv_norm;
  double gate_violation_fraction = 0.0;  // either gate fails
};

struct SweepReport {
  Provenance dictionary;
  Index m = 0, n_atoms = 0;
  double coherence = 0.0;
  SweepConfig config;
  double upper_quantile_level = 0.0;
  std::optional<WeakIncoherenceCheck> regime_check;
  std::vector<SweepTrial> trials;
  std::vector<SweepSummary> per_s;
};

class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void check_sparsity_regime(const Dictionary& d, Index s, double c) {
  const double limit = c * static_cast<double>(d.m()) / std::log(static_cast<double>(d.n_atoms()));
  if (static_cast<double>(s) > limit)
    throw HypothesisError("sparsity s = " + std::to_string(s) + " exceeds c m / log N = " + std::to_string(limit));
}

}  // namespace detail

inline SweepReport statistics_sweep(const Dictionary& d, const SweepConfig& config) {
  if (config.trials_per_s < 1) throw std::invalid_argument("trials_per_s must be positive");
  if (!(config.beta >= 1.0)) throw std::invalid_argument("beta must be at least 1");
  SweepReport rep;
  rep.dictionary = d.provenance();
  rep.m = d.m();
  rep.n_atoms = d.n_atoms();
  rep.coherence = d.coherence();
  rep.config = config;
  rep.upper_quantile_level = 1.0 - std::pow(static_cast<double>(d.n_atoms()), -config.beta);
  if (config.in_regime) {
    rep.regime_check = is_weakly_incoherent(d, config.c_sparsity);
    if (!rep.regime_check->passes())
      throw HypothesisError("dictionary is not a weakly incoherent tight frame for c = " +
                            std::to_string(config.c_sparsity));
    for (Index s : config.s_values) detail::check_sparsity_regime(d, s, config.c_sparsity);
  }
  for (Index s : config.s_values)
    if (s < 1 || s > d.n_atoms()) throw std::invalid_argument("sweep s out of range: " + std::to_string(s));

  const std::size_t per = static_cast<std::size_t>(config.trials_per_s);
  rep.trials.resize(config.s_values.size() * per);
  parallel_for(rep.trials.size(), config.threads, [&](std::size_t i) {
    const std::size_t si = i / per;
    const Index s = config.s_values[si];
    const Index trial = static_cast<Index>(i % per);
    const std::uint64_t seed =
        derive_seed(config.master_seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(trial)});
    Rng rng(seed);
    const AtomSet set = sample_uniform_subset(d.n_atoms(), s, rng);
    SweepTrial& row = rep.trials[i];
    row.s = s;
    row.trial = trial;
    row.stats = subset_statistics(d, set, seed);
    row.cross_gate = row.stats.max_cross_correlation <= kCrossGate;
    row.pinv_gate = row.stats.pinv_norm <= kPinvGate;
  });

  for (std::size_t si = 0; si < config.s_values.size(); ++si) {
    std::vector<double> cross, dev, pinv;
    Index violations = 0;
    for (std::size_t k = 0; k < per; ++k) {
      const SweepTrial& row = rep.trials[si * per + k];
      cross.push_back(row.stats.max_cross_correlation);
      dev.push_back(row.stats.gram_deviation);
      pinv.push_back(row.stats.pinv_norm);
      if (!(row.cross_gate && row.pinv_gate)) ++violations;
    }
    SweepSummary sum;
    sum.s = config.s_values[si];
    sum.trials = config.trials_per_s;
    const double q = rep.upper_quantile_level;
    sum.max_cross_correlation = {nearest_rank_quantile(cross, 0.5), nearest_rank_quantile(cross, q)};
    sum.gram_deviation = {nearest_rank_quantile(dev, 0.5), nearest_rank_quantile(dev, q)};
    sum.pinv_norm = {nearest_rank_quantile(pinv, 0.5), nearest_rank_quantile(pinv, q)};
    sum.gate_violation_fraction = static_cast<double>(violations) / static_cast<double>(per);
    rep.per_s.push_back(sum);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// rank(Phi_{S u V}) against |S| + (constant) m |V| / N on random S, V.

struct WeakRankConfig {
  Index s = 0;
  Index v_size = 0;
  Index trials = 0;
  std::uint64_t master_seed = 0;
  std::optional<double> c_sparsity;  // checks s <= c m / log N when set
  int threads = 1;
};

struct WeakRankTrial {
  Index trial = 0;
  std::uint64_t seed = 0;
  bool s_independent = true;
  Index rank_r = 0;
  SubsetStatistics stats;
  bool gated = false;
  double bound_stated = 0.0;     // |S| + 2 m |V| / N
  double bound_gate_lemma = 0.0;  // |S| + m |V| / (2N): gate values put into the projected-block bound
  double bound_measured = 0.0;   // |S| + projected-block bound with this S's own statistics
  bool violates_stated = false;
  bool violates_gate_lemma = false;
  bool violates_measured = false;
};

struct ViolationCounts {
  Index trials = 0;
  Index stated = 0;
  Index gate_lemma = 0;
  Index measured = 0;
};

struct WeakRankReport {
  Provenance dictionary;
  Index m = 0, n_atoms = 0;
  WeakRankConfig config;
  std::vector<WeakRankTrial> trials;
  ViolationCounts gated;
  ViolationCounts ungated;
  Index dependent_s = 0;
};

inline WeakRankReport weak_rank_bound_experiment(const Dictionary& d, const WeakRankConfig& config) {
  if (d.n_atoms() <= 2 * d.m())
    throw HypothesisError("weak rank bound requires N > 2m (N = " + std::to_string(d.n_atoms()) +
                          ", m = " + std::to_string(d.m()) + ")");
  if (!d.is_tight_frame()) throw HypothesisError("weak rank bound requires a tight frame");
  if (config.s < 1 || config.v_size < 0 || config.s + config.v_size > d.n_atoms())
    throw std::invalid_argument("weak rank bound: need 1 <= s and s + |V| <= N");
  if (config.trials < 1) throw std::invalid_argument("weak rank bound: trials must be positive");
  if (config.c_sparsity) detail::check_sparsity_regime(d, config.s, *config.c_sparsity);

  WeakRankReport rep;
  rep.dictionary = d.provenance();
  rep.m = d.m();
  rep.n_atoms = d.n_atoms();
  rep.config = config;
  rep.trials.resize(static_cast<std::size_t>(config.trials));

  const double md = static_cast<double>(d.m());
  const double nd = static_cast<double>(d.n_atoms());
  const double vd = static_cast<double>(config.v_size);
  const double sd = static_cast<double>(config.s);

  parallel_for(rep.trials.size(), config.threads, [&](std::size_t i) {
    WeakRankTrial& row = rep.trials[i];
    row.trial = static_cast<Index>(i);
    row.seed = derive_seed(config.master_seed, {static_cast<std::uint64_t>(i)});
    Rng rng(row.seed);
    const AtomSet s = sample_uniform_subset(d.n_atoms(), config.s, rng);
    const AtomSet v = sample_from(complement(s, d.n_atoms()), config.v_size, rng);
    row.stats = subset_statistics(d, s, row.seed);
    row.gated = row.stats.max_cross_correlation <= kCrossGate && row.stats.pinv_norm <= kPinvGate;
    row.rank_r = numerical_rank(d.columns(set_union(s, v)));
    row.s_independent = numerical_rank(d.columns(s)) == s.size();
    row.bound_stated = sd + 2.0 * md * vd / nd;
    row.bound_gate_lemma = sd + md * vd / (2.0 * nd);
    row.bound_measured = row.s_independent ? sd + rank_lb_weak(d, s, v) : 0.0;
    const double r = static_cast<double>(row.rank_r);
    row.violates_stated = r + 1e-9 < row.bound_stated;
    row.violates_gate_lemma = r + 1e-9 < row.bound_gate_lemma;
    row.violates_measured = row.s_independent && r + 1e-9 < row.bound_measured;
  });

  for (const WeakRankTrial& row : rep.trials) {
    if (!row.s_independent) {
      ++rep.dependent_s;
      continue;
    }
    ViolationCounts& c = row.gated ? rep.gated : rep.ungated;
    ++c.trials;
    c.stated += row.violates_stated;
    c.gate_lemma += row.violates_gate_lemma;
    c.measured += row.violates_measured;
  }
  return rep;
}

}  // namespace sgap
