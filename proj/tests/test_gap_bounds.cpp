#include "sgap/gap_bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sgap;

namespace {

// Eq. (9) right-hand side written out independently of the library.
double overlap_rhs_oracle(double s, double t, double mu) {
  const double tm = t * mu * mu;
  return s * (1.0 - ((t - 1.0) / s) * (tm / (1.0 - tm)));
}

}  // namespace

TEST(DonohoElad, Values) {
  EXPECT_DOUBLE_EQ(donoho_elad_threshold(0.25).value, 4.0);
  EXPECT_DOUBLE_EQ(donoho_elad_threshold(1.0).value, 1.0);
  const Threshold zero = donoho_elad_threshold(0.0);
  EXPECT_EQ(zero.status, ThresholdStatus::unbounded);
  EXPECT_TRUE(std::isinf(zero.value));
  EXPECT_THROW(donoho_elad_threshold(-0.1), std::invalid_argument);
  EXPECT_THROW(donoho_elad_threshold(1.1), std::invalid_argument);
}

TEST(DonohoElad, CombPairExceedsThreshold) {
  // Four spikes and four sines represent the same comb in m = 16.
  EXPECT_GT(4 + 4, donoho_elad_threshold(0.25).value);
}

TEST(StrongGap, Values) {
  EXPECT_DOUBLE_EQ(strong_gap_threshold(1, 0.25).value, 4.0);
  EXPECT_DOUBLE_EQ(strong_gap_threshold(16, 0.125).value, 32.0);
  EXPECT_DOUBLE_EQ(strong_gap_threshold(4, 1.0).value, 2.0);
  EXPECT_THROW(strong_gap_threshold(0, 0.5), std::invalid_argument);
  EXPECT_EQ(strong_gap_threshold(3, 0.0).status, ThresholdStatus::unbounded);
}

TEST(Overlap, Values) {
  const OverlapDecision d = overlap_condition(4, 4, 0, 0.1);
  ASSERT_TRUE(d.rhs.ok());
  EXPECT_NEAR(d.rhs.value, 3.875, 1e-12);
  EXPECT_TRUE(d.holds);

  const OverlapDecision orth = overlap_condition(5, 5, 4, 0.0);
  EXPECT_DOUBLE_EQ(orth.rhs.value, 5.0);
  EXPECT_TRUE(orth.holds);
  EXPECT_FALSE(overlap_condition(5, 5, 5, 0.0).holds);
}

TEST(Overlap, VacuousWhenDenominatorNonpositive) {
  const OverlapDecision d = overlap_condition(8, 8, 0, 0.5);  // t mu^2 = 2
  EXPECT_EQ(d.rhs.status, ThresholdStatus::vacuous);
  EXPECT_FALSE(d.holds);
  EXPECT_EQ(overlap_condition(4, 4, 0, 0.5).rhs.status, ThresholdStatus::vacuous);  // exactly 1
}

TEST(Overlap, RejectsInvalidOverlap) {
  EXPECT_THROW(overlap_condition(4, 4, 5, 0.1), std::invalid_argument);
  EXPECT_THROW(overlap_condition(4, 2, 3, 0.1), std::invalid_argument);
  EXPECT_THROW(overlap_condition(4, 4, -1, 0.1), std::invalid_argument);
}

TEST(Overlap, MatchesOracleOnGrid) {
  for (long s = 1; s <= 30; ++s)
    for (long t = 1; t <= 30; ++t)
      for (double mu : {0.01, 0.05, 0.1, 0.17}) {
        if (t * mu * mu >= 1.0) continue;
        const double expected = overlap_rhs_oracle(double(s), double(t), mu);
        EXPECT_NEAR(overlap_condition(s, t, 0, mu).rhs.value, expected, 1e-12 * std::max(1.0, std::abs(expected)));
      }
}

TEST(Overlap, EqualSizeRepresentationsNeedHalfTheAtoms) {
  for (long m : {36, 64, 144}) {
    const long s = m / 3;
    const double mu = 1.0 / std::sqrt(double(m));
    const OverlapDecision d = overlap_condition(s, s, 0, mu);
    ASSERT_TRUE(d.rhs.ok());
    EXPECT_GE(d.rhs.value, double(s) / 2.0 - 1e-9) << "m = " << m;
  }
  EXPECT_NEAR(overlap_condition(12, 12, 0, 1.0 / 6.0).rhs.value, 6.5, 1e-12);
}

TEST(TThreshold, Values) {
  EXPECT_NEAR(t_threshold_given_overlap(2, 0, 0.1).value, 13.150971698084906, 1e-12);
  // delta = s - 2: unit leading factor.
  for (double mu : {0.05, 0.2, 0.7})
    EXPECT_NEAR(t_threshold_given_overlap(9, 7, mu).value, std::sqrt(2.0 / (mu * mu) + 0.25) - 1.0, 1e-12);
  EXPECT_EQ(t_threshold_given_overlap(5, 4, 0.1).status, ThresholdStatus::inapplicable);
  EXPECT_EQ(t_threshold_given_overlap(1, 0, 0.1).status, ThresholdStatus::inapplicable);
  EXPECT_EQ(t_threshold_given_overlap(5, 0, 0.0).status, ThresholdStatus::unbounded);
}

TEST(TThreshold, RevertsOverlapConditionSoundly) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<long> s_dist(2, 60);
  std::uniform_real_distribution<double> log_mu(std::log(0.005), std::log(1.0));
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const long s = s_dist(rng);
    const long delta = std::uniform_int_distribution<long>(0, s - 2)(rng);
    const double mu = std::exp(log_mu(rng));
    const Threshold bound = t_threshold_given_overlap(s, delta, mu);
    ASSERT_TRUE(bound.ok());
    for (long t = std::max(delta, 1L); double(t) < bound.value; ++t) {
      const OverlapDecision d = overlap_condition(s, t, delta, mu);
      ASSERT_TRUE(d.holds) << "s=" << s << " delta=" << delta << " mu=" << mu << " t=" << t;
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(GenericUp, Values) {
  EXPECT_NEAR(generic_up_threshold(16, 4, 0.125).value, 31.712812921102035, 1e-12);
  EXPECT_DOUBLE_EQ(generic_up_threshold(7, 7, 0.3).value, 7.0);
  EXPECT_DOUBLE_EQ(generic_up_threshold(16, 0, 0.125).value, 32.0);
  EXPECT_THROW(generic_up_threshold(4, 5, 0.1), std::invalid_argument);
}

TEST(ReductionChain, StrongGapAndDonohoElad) {
  for (long s = 1; s <= 100; ++s)
    for (int i = 1; i <= 100; ++i) {
      const double mu = double(i) / 100.0;
      const double strong = strong_gap_threshold(s, mu).value;
      EXPECT_NEAR(generic_up_threshold(s, 0, mu).value, strong, 1e-12 * strong);
      if (s == 1) {
        EXPECT_NEAR(generic_up_threshold(1, 0, mu).value, donoho_elad_threshold(mu).value, 1e-12 * strong);
      }
    }
}

TEST(WeakGap, Values) {
  EXPECT_NEAR(weak_gap_threshold(10, 0, 32, 128).value, 20.0, 1e-12);
  EXPECT_NEAR(weak_gap_threshold(10, 10, 32, 128).value, 10.0, 1e-12);
  EXPECT_NEAR(weak_gap_simplified(20, 5, 32, 128).value, 27.5, 1e-12);
  EXPECT_NEAR(weak_gap_simplified(8, 0, 32, 128).value, 12.0, 1e-12);
  EXPECT_NEAR(weak_gap_simplified(8, 8, 32, 128).value, 8.0, 1e-12);
  EXPECT_EQ(weak_gap_threshold(4, 0, 16, 32).status, ThresholdStatus::hypothesis_violated);
  EXPECT_EQ(weak_gap_simplified(4, 0, 16, 20).status, ThresholdStatus::hypothesis_violated);
  EXPECT_THROW(weak_gap_threshold(4, 0, 0, 32), std::invalid_argument);
}

TEST(WeakGap, SimplifiedConditionImpliesTheoremCondition) {
  for (long m : {8, 16, 32})
    for (double ratio : {2.5, 3.0, 4.0, 8.0}) {
      const long n = std::lround(ratio * double(m));
      const double a = 2.0 * double(m) / double(n);
      for (long s = 1; s <= 64; ++s)
        for (long delta = 0; delta <= s; ++delta) {
          const double simple = weak_gap_simplified(s, delta, m, n).value;
          const double full = weak_gap_threshold(s, delta, m, n).value;
          const double gap = double(s - delta) * a * a / (1.0 - a);
          EXPECT_NEAR(full - simple, gap, 1e-9 * full);
          if (delta < s) {
            // every t <= simple also satisfies t < full
            const double largest_t = std::floor(simple);
            EXPECT_LT(largest_t, full) << "s=" << s << " delta=" << delta;
          } else {
            EXPECT_NEAR(simple, full, 1e-12 * full);
          }
        }
    }
}

TEST(Monotonicity, WeakThresholdsNonincreasingInDelta) {
  for (long s = 1; s <= 40; ++s)
    for (long delta = 1; delta <= s; ++delta) {
      EXPECT_LE(weak_gap_threshold(s, delta, 32, 128).value, weak_gap_threshold(s, delta - 1, 32, 128).value);
      EXPECT_LE(weak_gap_simplified(s, delta, 32, 128).value, weak_gap_simplified(s, delta - 1, 32, 128).value);
      EXPECT_DOUBLE_EQ(overlap_condition(s, s, delta, 0.01).rhs.value, overlap_condition(s, s, 0, 0.01).rhs.value);
    }
}

TEST(Monotonicity, CoherenceThresholdsNonincreasingWhenIncoherent) {
  // With mu sqrt(s) <= 1/4 both coherence thresholds fall as delta grows.
  for (long s = 2; s <= 64; ++s)
    for (double scale : {0.05, 0.15, 0.25}) {
      const double mu = scale / std::sqrt(double(s));
      for (long delta = 1; delta <= s; ++delta) {
        EXPECT_LE(generic_up_threshold(s, delta, mu).value, generic_up_threshold(s, delta - 1, mu).value + 1e-12);
        if (s - delta >= 2) {
          EXPECT_LE(t_threshold_given_overlap(s, delta, mu).value,
                    t_threshold_given_overlap(s, delta - 1, mu).value + 1e-12);
        }
      }
    }
}

TEST(Monotonicity, CoherenceThresholdsCanGrowInCoherentRegime) {
  // d/d(delta) of delta + sqrt(s - delta)/mu is 1 - 1/(2 mu sqrt(s - delta)).
  EXPECT_GT(generic_up_threshold(16, 1, 0.3).value, generic_up_threshold(16, 0, 0.3).value);
  EXPECT_GT(t_threshold_given_overlap(16, 1, 0.3).value, t_threshold_given_overlap(16, 0, 0.3).value);
}

TEST(ComputeAll, FillsEveryField) {
  const GapThresholds g = compute_gap_thresholds(8, 8, 2, 0.125, 64, 128 + 64);
  EXPECT_EQ(g.donoho_elad_lhs, 16);
  EXPECT_DOUBLE_EQ(g.donoho_elad_rhs.value, 8.0);
  EXPECT_NEAR(g.strong_gap_rhs.value, 8.0 * std::sqrt(8.0), 1e-12);
  EXPECT_TRUE(g.overlap.rhs.ok());
  EXPECT_TRUE(g.t_threshold.ok());
  EXPECT_NEAR(g.generic_up_rhs.value, 2.0 + 8.0 * std::sqrt(6.0), 1e-12);
  EXPECT_TRUE(g.weak_gap_rhs.ok());
  EXPECT_TRUE(g.weak_gap_simplified_rhs.ok());

  const GapThresholds bare = compute_gap_thresholds(8, 8, 2, 0.125, 0, 0);
  EXPECT_EQ(bare.weak_gap_rhs.status, ThresholdStatus::not_evaluated);
  EXPECT_EQ(to_string(bare.weak_gap_simplified_rhs.status), "not_evaluated");
}

TEST(ComputeAll, Deterministic) {
  const GapThresholds a = compute_gap_thresholds(12, 9, 3, 0.07, 32, 128);
  const GapThresholds b = compute_gap_thresholds(12, 9, 3, 0.07, 32, 128);
  EXPECT_EQ(a.overlap.rhs.value, b.overlap.rhs.value);
  EXPECT_EQ(a.t_threshold.value, b.t_threshold.value);
  EXPECT_EQ(a.weak_gap_rhs.value, b.weak_gap_rhs.value);
}
