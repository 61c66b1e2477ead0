#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <driftscan/error.hpp>
#include <driftscan/fbm.hpp>
#include <driftscan/rng.hpp>

#include "support/oracles.hpp"

namespace driftscan {
namespace {

using testing::mean_se;

/// Pfaff transformation: maps z in [-50, -0.5] to z/(z-1) in [1/3, 0.99)
/// where the power series converges.
double pfaff_series(double a, double b, double c, double z) {
  return std::pow(1.0 - z, -a) * hyp2f1_series(a, c - b, c, z / (z - 1.0));
}

TEST(Hyp2f1, TrivialValues) {
  for (double H : {0.2, 0.4, 0.7}) {
    for (double z : {-40.0, -3.0, -0.3, 0.0}) {
      EXPECT_EQ(hyp2f1(H - 0.5, 0.0, H + 0.5, z), 1.0);
      EXPECT_EQ(hyp2f1(0.0, 0.5 - H, H + 0.5, z), 1.0);
    }
    EXPECT_EQ(hyp2f1(H - 0.5, 0.5 - H, H + 0.5, 0.0), 1.0);
  }
  EXPECT_NEAR(hyp2f1(1.0, 1.0, 2.0, -1.0), std::log(2.0), 1e-12);
  EXPECT_NEAR(pfaff_series(1.0, 1.0, 2.0, -1.0), std::log(2.0), 1e-12);
}

TEST(Hyp2f1, SeriesRegion) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> hdist(0.05, 0.95);
  std::uniform_real_distribution<double> zdist(-0.5, 0.0);
  for (int i = 0; i < 500; ++i) {
    const double H = hdist(rng);
    const double z = zdist(rng);
    const double a = H - 0.5, b = 0.5 - H, c = H + 0.5;
    EXPECT_NEAR(hyp2f1(a, b, c, z), hyp2f1_series(a, b, c, z, 200), 1e-10);
  }
}

TEST(Hyp2f1, EulerIntegralMatchesTransformedSeries) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> hdist(0.05, 0.95);
  std::uniform_real_distribution<double> zdist(-50.0, -0.5);
  for (int i = 0; i < 500; ++i) {
    const double H = hdist(rng);
    const double z = zdist(rng);
    const double a = H - 0.5, b = 0.5 - H, c = H + 0.5;
    EXPECT_NEAR(hyp2f1(a, b, c, z), pfaff_series(a, b, c, z), 1e-8) << H << ' ' << z;
  }
}

TEST(Hyp2f1, UnsupportedArguments) {
  EXPECT_THROW((void)hyp2f1(0.2, -0.2, 0.9, 0.8), UnsupportedError);
  EXPECT_THROW((void)hyp2f1(1.5, 1.5, 0.9, -2.0), UnsupportedError);
}

TEST(VolterraKernel, BrownianCase) {
  for (double t : {0.3, 1.0, 7.0}) {
    for (double f : {0.01, 0.5, 0.99}) EXPECT_NEAR(volterra_kernel(0.5, t, f * t), 1.0, 1e-14);
  }
}

TEST(VolterraKernel, DomainErrors) {
  EXPECT_THROW((void)volterra_kernel(0.7, 1.0, 1.0), DomainError);
  EXPECT_THROW((void)volterra_kernel(0.7, 1.0, 0.0), DomainError);
  EXPECT_THROW((void)volterra_kernel(0.7, 1.0, 1.5), DomainError);
}

TEST(VolterraKernel, NonNegative) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double H : {0.3, 0.7}) {
    for (int i = 0; i < 300; ++i) {
      const double t = 0.01 + 5.0 * u(rng);
      const double s = t * (0.001 + 0.998 * u(rng));
      EXPECT_GE(volterra_kernel(H, t, s), 0.0);
    }
  }
}

TEST(VolterraKernel, CovarianceIdentity) {
  EXPECT_NEAR(fbm_covariance(0.7, 1.0, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(kernel_covariance(0.7, 1.0, 0.5), 0.5, 1e-4);
  for (double H : {0.3, 0.7}) {
    EXPECT_NEAR(kernel_covariance(H, 1.0, 1.0), 1.0, 1e-4);
    EXPECT_NEAR(kernel_covariance(H, 0.8, 0.3), fbm_covariance(H, 0.8, 0.3), 1e-4);
  }
}

TEST(HurstKernelTable, BrownianWeightsAreDt) {
  const double dt = 0.013;
  const HurstKernelTable table(0.5, 60, dt);
  for (std::size_t i = 1; i <= 60; ++i) {
    for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(table.weight(i, j), dt);
  }
  EXPECT_THROW((void)table.weight(3, 3), DomainError);
  EXPECT_THROW((void)table.weight(61, 0), DomainError);
}

TEST(HurstKernelTable, ImpliedCovarianceCloseToExact) {
  const std::size_t n = 100;
  const double dt = 0.01;
  for (double H : {0.4, 0.6}) {
    const HurstKernelTable table(H, n, dt);
    for (std::size_t a : {25u, 50u, 100u}) {
      for (std::size_t b : {25u, 50u, 100u}) {
        double cov = 0.0;
        for (std::size_t j = 0; j < std::min(a, b); ++j) cov += table.weight(a, j) * table.weight(b, j) / dt;
        EXPECT_NEAR(cov, fbm_covariance(H, a * dt, b * dt), 5e-3);
      }
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < i; ++j) EXPECT_TRUE(std::isfinite(table.weight(i, j)));
    }
  }
}

TEST(SimulateFbm, BrownianCaseIsDrivingPath) {
  const auto path = simulate_fbm(0.5, 1.0, 200, 77);
  const auto dw = brownian_increments(200, 0.005, 77);
  double w = 0.0;
  ASSERT_EQ(path.size(), 201u);
  EXPECT_EQ(path.values[0], 0.0);
  for (std::size_t i = 0; i < dw.size(); ++i) {
    w += dw[i];
    EXPECT_NEAR(path.values[i + 1], w, 1e-12);
  }
}

TEST(SimulateFbm, MomentsMatchCovariance) {
  for (double H : {0.3, 0.7}) {
    const HurstKernelTable table(H, 200, 0.005);
    std::vector<double> end, half_end;
    for (std::uint64_t r = 0; r < 2000; ++r) {
      const auto p = simulate_fbm(table, derive_seed(55, r));
      end.push_back(p.values[200]);
      half_end.push_back(p.values[100] * p.values[200]);
    }
    const auto v = mean_se(end);
    EXPECT_NEAR(v.var, 1.0, 4 * v.var_se) << H;
    if (H == 0.7) {
      const auto c = mean_se(half_end);
      EXPECT_NEAR(c.mean, 0.5, 4 * c.se);
    }
  }
}

TEST(SimulateFractionalSde, BrownianCaseReproducesEuler) {
  const auto b = DriftSpec::b_alt();
  const auto em = simulate_em(b, 0.2, 5.0, 0.01, 6);
  const auto fr = simulate_fractional_sde(b, 0.5, 0.2, 5.0, 0.01, 6);
  ASSERT_EQ(em.size(), fr.size());
  for (std::size_t i = 0; i < em.size(); ++i) EXPECT_NEAR(em.values[i], fr.values[i], 1e-12);
}

TEST(SimulateFractionalSde, ZeroDriftIsScaledFbm) {
  const auto zero = DriftSpec::linear(0.0, {1.0, 1.0, 1.0, 2.0});
  const auto x = simulate_fractional_sde(zero, 0.7, 0.5, 1.0, 0.01, 8);
  const auto w = simulate_fbm(0.7, 1.0, 100, 8);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x.values[i], 0.5 + 2.0 * w.values[i], 1e-12);
}

TEST(SimulateFractionalSde, CoupledGapIsFinite) {
  const auto b = DriftSpec::linear(-1.0);
  const auto x = simulate_em(b, 0.0, 10.0, 0.02, 4);
  const auto xh = simulate_fractional_sde(b, 0.45, 0.0, 10.0, 0.02, 4);
  double gap = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) gap = std::max(gap, std::abs(x.values[i] - xh.values[i]));
  EXPECT_TRUE(std::isfinite(gap));
  EXPECT_GT(gap, 0.0);
}

TEST(Stability, RowsSortedAndBrownianRowZero) {
  StabilityConfig c;
  c.test.y_step = c.test.h_step = c.test.h_min = 0.1;
  const auto rows = stability_experiment(DriftSpec::linear(-1.0), 20.0, 0.05, {0.55, 0.5, 0.45}, 4, c);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].H, 0.45);
  EXPECT_EQ(rows[1].H, 0.5);
  EXPECT_EQ(rows[2].H, 0.55);
  EXPECT_NEAR(rows[1].median_sup_gap, 0.0, 1e-12);
  EXPECT_NEAR(rows[1].median_stat_gap, 0.0, 1e-12);
  for (const auto& r : rows) EXPECT_EQ(r.reps, 4u);
  EXPECT_THROW((void)stability_experiment(DriftSpec::linear(-1.0), 20.0, 0.05, {0.45}, 2, c),
               ConfigError);
}

TEST(Stability, Median) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

}  // namespace
}  // namespace driftscan
