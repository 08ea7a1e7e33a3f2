#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tpi/analytic.hpp"
#include "tpi/commands.hpp"
#include "tpi/pathamp.hpp"

using namespace tpi;
using namespace tpi::pathamp;

namespace {

const SourceModel kLimit(0.03, 115e-12, 10.0);

}  // namespace

TEST(Pairings, FourPerOrdering) {
  const InterferometerConfig cfg{0.3, 0.7, 0.6, 0.4, 1e-9, 0.0, 1.0};
  for (Detector d : {Detector::D1, Detector::D2}) {
    const auto p = enumerate_pairings(cfg, d);
    int zero = 0, plus = 0, minus = 0;
    for (const auto& x : p) {
      zero += x.delay_signature == DelaySignature::Zero;
      plus += x.delay_signature == DelaySignature::PlusDt;
      minus += x.delay_signature == DelaySignature::MinusDt;
      EXPECT_EQ(x.detector_first, d);
      EXPECT_NEAR(x.amplitude_weight, std::abs(x.amplitude), 1e-15);
    }
    EXPECT_EQ(zero, 2);
    EXPECT_EQ(plus, 1);
    EXPECT_EQ(minus, 1);
  }
}

TEST(Pairings, WeightIsRootOfTraversedCoefficients) {
  const InterferometerConfig cfg{0.3, 0.7, 0.6, 0.4, 1e-9, 0.0, 1.0};
  for (const auto& p : enumerate_pairings(cfg, Detector::D1)) {
    // D1 first: short arm reaches D1 in transmission, long arm in reflection.
    const double first = (p.path_first == Arm::Short ? cfg.r_a * cfg.t_b : cfg.t_a * cfg.r_b);
    const double second = (p.path_second == Arm::Short ? cfg.r_a * cfg.r_b : cfg.t_a * cfg.t_b);
    EXPECT_NEAR(p.amplitude_weight, std::sqrt(first * second), 1e-15);
  }
}

TEST(Pairings, DiagonalWeightsSumToNormalization) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const double ra = u(rng), rb = u(rng);
    const InterferometerConfig cfg{ra, 1 - ra, rb, 1 - rb, 1e-9, 0.0, 1.0};
    EXPECT_NEAR(pairing_weight_sum(cfg), normalization(cfg), 1e-15);
  }
}

TEST(Oracle, CrossTermsReproduceEquationCoefficients) {
  // With g2 = 1 except at one delay class, the oracle isolates each
  // coefficient of the cross-polarization expression.
  const InterferometerConfig cfg{0.3, 0.7, 0.6, 0.4, 1e-6, 0.0, 1.0};
  const SourceModel src(0.0, 1e-12, 1.0);
  const double n = normalization(cfg);
  const double same = (0.3 * 0.3 + 0.7 * 0.7) * 0.6 * 0.4;
  const double lead = 0.3 * 0.7 * 0.6 * 0.6;
  const double lag = 0.3 * 0.7 * 0.4 * 0.4;
  EXPECT_NEAR(oracle_g2(cfg, src, PolarizationMode::Cross, 0.0), (lead + lag) / n, 1e-12);
  EXPECT_NEAR(oracle_g2(cfg, src, PolarizationMode::Cross, -1e-6), (same + lag) / n, 1e-12);
  EXPECT_NEAR(oracle_g2(cfg, src, PolarizationMode::Cross, 1e-6), (same + lead) / n, 1e-12);
}

TEST(Oracle, CrossMatchesAnalyticEverywhere) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double ra = 0.01 + 0.98 * u(rng), rb = 0.01 + 0.98 * u(rng);
    const InterferometerConfig cfg{ra, 1 - ra, rb, 1 - rb, 5e-9 * u(rng), 1e9 * u(rng), u(rng)};
    const SourceModel src(2 * u(rng), 1e-10, 1e-6);
    const double tau = (u(rng) - 0.5) * 2e-8;
    EXPECT_NEAR(oracle_g2(cfg, src, PolarizationMode::Cross, tau), g2_cross(cfg, src, tau), 1e-13);
  }
}

TEST(Oracle, ParallelCentralValue) {
  const auto cfg = InterferometerConfig::symmetric(2.1e-9);
  const double v = oracle_g2(cfg, kLimit, PolarizationMode::Parallel, 0.0);
  EXPECT_NEAR(v, 0.015, 1e-6);
  EXPECT_NEAR(v, g2_parallel(cfg, kLimit, 0.0), 1e-12);
}

TEST(Oracle, ParallelWithoutOverlapIsCross) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double ra = 0.01 + 0.98 * u(rng), rb = 0.01 + 0.98 * u(rng);
    const InterferometerConfig cfg{ra, 1 - ra, rb, 1 - rb, 5e-9 * u(rng), 1e9 * u(rng), 0.0};
    const double tau = (u(rng) - 0.5) * 2e-8;
    EXPECT_EQ(oracle_g2(cfg, kLimit, PolarizationMode::Parallel, tau),
              oracle_g2(cfg, kLimit, PolarizationMode::Cross, tau));
  }
}

TEST(Oracle, ExchangeTermVanishesWithoutCoherence) {
  const auto cfg = InterferometerConfig::symmetric(2.1e-9, 3e8);
  const auto src = SourceModel::paper_device();
  const double tau = 1e-3;  // 100 tau_c
  EXPECT_NEAR(oracle_g2(cfg, src, PolarizationMode::Parallel, tau),
              oracle_g2(cfg, src, PolarizationMode::Cross, tau), 1e-15);
}

TEST(Oracle, ExchangeTermVanishesInQuadrature) {
  const double tau = 7e-9;
  const auto cfg = InterferometerConfig::symmetric(2.1e-9, std::acos(-1.0) / (2 * tau));
  EXPECT_NEAR(oracle_g2(cfg, kLimit, PolarizationMode::Parallel, tau),
              oracle_g2(cfg, kLimit, PolarizationMode::Cross, tau), 1e-15);
  EXPECT_NEAR(oracle_g2(cfg, kLimit, PolarizationMode::Parallel, -tau),
              oracle_g2(cfg, kLimit, PolarizationMode::Cross, -tau), 1e-15);
}

TEST(Oracle, EquivalenceSweep) {
  const auto r = cli::oracle_sweep(10000, 2024);
  EXPECT_EQ(r.points, 10000u);
  EXPECT_LT(r.max_relative_error, 1e-9);
  EXPECT_LT(r.max_weight_sum_error, 1e-15);
}

TEST(Oracle, CorruptedRuleIsCaught) {
  const auto r = cli::oracle_sweep(1000, 2024, ExchangeRule::AllPairs);
  EXPECT_GT(r.max_relative_error, 1e-3);
}
