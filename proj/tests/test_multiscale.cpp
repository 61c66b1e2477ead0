#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <driftscan/error.hpp>
#include <driftscan/multiscale.hpp>
#include <driftscan/rng.hpp>
#include <driftscan/sde.hpp>

namespace driftscan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quartic(double u) { return std::abs(u) < 1 ? 15.0 / 16.0 * std::pow(1 - u * u, 2) : 0.0; }
double quartic_prime(double u) { return std::abs(u) < 1 ? -15.0 / 4.0 * u * (1 - u * u) : 0.0; }
double quartic_primitive(double u) {
  u = std::clamp(u, -1.0, 1.0);
  return 15.0 / 16.0 * (u - 2.0 * u * u * u / 3.0 + u * u * u * u * u / 5.0) + 0.5;
}

SamplePath constant_path(double value, std::size_t n = 100, double dt = 0.01) {
  SamplePath p;
  p.dt = dt;
  p.values.assign(n, value);
  return p;
}

/// Local score straight from the definitions, quartic kernel only.
LocalScore score_oracle(const SamplePath& path, double y, double h, const TestConfig& c) {
  const auto& x = path.values;
  const double T = path.horizon();
  double ik = 0.0, ik2 = 0.0, ikb = 0.0, ikp = 0.0, inside = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double u = (x[i] - y) / h;
    ik += quartic(u) * path.dt;
    ik2 += quartic(u) * quartic(u) * path.dt;
    ikb += quartic(u) * c.b0(x[i]) * path.dt;
    ikp += quartic_prime(u) / h * path.dt;
    inside += (std::abs(x[i]) <= c.A ? 1.0 : 0.0) * path.dt;
  }
  const double itilde = h * (quartic_primitive((x.back() - y) / h) - quartic_primitive((x.front() - y) / h)) -
                        0.5 * c.sigma * c.sigma * ikp;
  LocalScore s;
  s.y = y;
  s.h = h;
  s.sigma_hat_sq = ik2 / T;
  s.psi = (itilde - ikb) / (c.sigma * std::sqrt(ik2));
  s.lambda = c.eta * ik / (c.sigma * std::sqrt(ik2));
  s.correction = std::sqrt(2.0 * std::log(std::max(1.0, (inside / T) / s.sigma_hat_sq)));
  const double side = c.side == Side::TwoSided ? std::abs(s.psi) : c.side == Side::Greater ? s.psi : -s.psi;
  s.score = side - s.lambda - s.correction;
  s.active = true;
  return s;
}

TEST(PathwiseIntegral, ConstantPathAtCentre) {
  EXPECT_NEAR(pathwise_integral(constant_path(0.3), 0.3, 0.2, Kernel::quartic(), 1.0), 0.0, 1e-15);
}

TEST(PathwiseIntegral, SymmetricTraversal) {
  const double y = 0.1;
  const double h = 0.25;
  SamplePath p;
  p.dt = 0.001;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) p.values.push_back(y - 2 * h + 4 * h * i / n);
  EXPECT_NEAR(pathwise_integral(p, y, h, Kernel::quartic(), 1.0), h, 1e-12);
}

TEST(PathwiseIntegral, RejectsNonSmoothKernel) {
  EXPECT_THROW((void)pathwise_integral(constant_path(0.0), 0.0, 0.5, Kernel::optimal_recovery(1.0), 1.0),
               NonDifferentiableKernelError);
}

double median_ito_gap(double dt) {
  std::vector<double> gaps;
  const auto ou = DriftSpec::linear(-1.0);
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto path = simulate_em(ou, 0.0, 50.0, dt, derive_seed(99, r));
    double ito = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      ito += quartic(path.values[i] / 0.5) * (path.values[i + 1] - path.values[i]);
    }
    gaps.push_back(std::abs(pathwise_integral(path, 0.0, 0.5, Kernel::quartic(), 1.0) - ito));
  }
  std::nth_element(gaps.begin(), gaps.begin() + 25, gaps.end());
  return gaps[25];
}

TEST(PathwiseIntegral, ItoSumGapShrinks) {
  const double coarse = median_ito_gap(1e-2);
  const double mid = median_ito_gap(3e-3);
  const double fine = median_ito_gap(1e-3);
  EXPECT_LT(mid, coarse);
  EXPECT_LT(fine, mid);
  EXPECT_LE(2.0 * fine, coarse);
}

TEST(SigmaHat, Examples) {
  EXPECT_DOUBLE_EQ(sigma_hat_sq(constant_path(0.4), 0.4, 0.3, Kernel::quartic()), 0.87890625);
  EXPECT_EQ(sigma_hat_sq(constant_path(0.9), 0.4, 0.3, Kernel::quartic()), 0.0);
  SamplePath p;
  p.dt = 0.1;
  p.values = {0.0, 0.5, -0.9, 1.0, -1.0, 0.2};
  EXPECT_EQ(sigma_hat_max_sq(p, 1.0), 1.0);
  p.values = {0.0, 1.5, 2.0, 0.3, 9.0};
  EXPECT_DOUBLE_EQ(sigma_hat_max_sq(p, 1.0), 0.5);
}

TEST(LocalScore, ConstantPathAtOrigin) {
  TestConfig c;
  const auto s = local_score(constant_path(0.0), 0.0, 0.5, c);
  EXPECT_TRUE(s.active);
  EXPECT_NEAR(s.psi, 0.0, 1e-15);
  EXPECT_EQ(s.lambda, 0.0);
  EXPECT_NEAR(s.score, -correction(0.87890625), 1e-12);
  EXPECT_NEAR(s.score, -0.5080886, 1e-7);
}

TEST(LocalScore, InactiveOutsideSupport) {
  TestConfig c;
  const auto s = local_score(constant_path(0.8), -0.5, 0.2, c);
  EXPECT_FALSE(s.active);
}

TEST(LocalScore, MatchesOracleAndIndex) {
  TestConfig c;
  c.eta = 0.2;
  c.b0 = DriftSpec::linear(-1.0);
  const auto path = simulate_em(DriftSpec::b_alt(), 0.0, 40.0, 0.01, 5);
  for (Side side : {Side::TwoSided, Side::Greater, Side::Less}) {
    c.side = side;
    const OccupationIndex idx(path, c);
    for (double h : {0.1, 0.23, 0.5, 1.0}) {
      for (double y = -1.0 + h; y <= 1.0 - h + 1e-12; y += 0.07) {
        const auto direct = local_score(path, y, h, c);
        const auto fast = idx.score(y, h);
        const auto oracle = score_oracle(path, y, h, c);
        ASSERT_TRUE(direct.active);
        EXPECT_NEAR(direct.psi, oracle.psi, 1e-9);
        EXPECT_NEAR(direct.lambda, oracle.lambda, 1e-9);
        EXPECT_NEAR(direct.correction, oracle.correction, 1e-9);
        EXPECT_NEAR(direct.score, oracle.score, 1e-9);
        EXPECT_NEAR(fast.score, direct.score, 1e-9);
        EXPECT_NEAR(fast.sigma_hat_sq, direct.sigma_hat_sq, 1e-12);
      }
    }
  }
}

TEST(LocalScore, SideAndAllowanceProperties) {
  TestConfig c;
  const auto path = simulate_em(DriftSpec::linear(-1.0), 0.0, 30.0, 0.01, 8);
  for (double y : {-0.5, 0.0, 0.4}) {
    c.side = Side::TwoSided;
    c.eta = 0.0;
    const auto two = local_score(path, y, 0.3, c);
    c.side = Side::Greater;
    const auto gt = local_score(path, y, 0.3, c);
    c.side = Side::Less;
    const auto lt = local_score(path, y, 0.3, c);
    EXPECT_GE(two.score, gt.score);
    EXPECT_GE(two.score, lt.score);
    EXPECT_DOUBLE_EQ(std::max(gt.score, lt.score), two.score);

    c.side = Side::TwoSided;
    c.eta = 0.1;
    const double l1 = local_score(path, y, 0.3, c).lambda;
    c.eta = 0.3;
    const double l3 = local_score(path, y, 0.3, c).lambda;
    EXPECT_GE(l1, 0.0);
    EXPECT_NEAR(l3, 3.0 * l1, 1e-12);
  }
}

TEST(LocalScore, CorrectionDecreasesWithVariance) {
  double prev = kInf;
  for (double r : {0.01, 0.05, 0.2, 0.5, 0.9, 1.0}) {
    const double c = correction(r);
    EXPECT_LT(c, prev);
    prev = c;
  }
}

TEST(BuildGrid, FourPointExample) {
  TestConfig c;
  c.y_step = c.h_step = c.h_min = 0.5;
  const auto g = build_grid(c);
  const std::vector<GridPoint> expected{{-0.5, 0.5}, {0.0, 0.5}, {0.5, 0.5}, {0.0, 1.0}};
  ASSERT_EQ(g.size(), expected.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(g[i].y, expected[i].y, 1e-12);
    EXPECT_NEAR(g[i].h, expected[i].h, 1e-12);
  }
}

TEST(BuildGrid, CountMatchesEnumeration) {
  TestConfig c;
  c.y_step = c.h_step = c.h_min = 0.1;
  std::size_t oracle = 0;
  for (int hk = 1; hk <= 10; ++hk) {
    for (int yk = -10; yk <= 10; ++yk) {
      if (std::abs(yk) + hk <= 10) ++oracle;
    }
  }
  EXPECT_EQ(oracle, 100u);
  EXPECT_EQ(build_grid(c).size(), oracle);
}

TEST(BuildGrid, EmptyGridIsConfigError) {
  TestConfig c;
  c.y_step = c.h_step = 0.1;
  c.h_min = 1.5;
  EXPECT_THROW((void)build_grid(c), ConfigError);
}

TEST(BuildGrid, DefaultsFromHorizon) {
  TestConfig c;
  const auto r = c.resolved(400.0);
  EXPECT_DOUBLE_EQ(r.y_step, 0.05);
  EXPECT_DOUBLE_EQ(r.h_step, 0.05);
  EXPECT_NEAR(r.h_min, std::cbrt(std::log(400.0) / 400.0), 1e-15);
}

TEST(TestStatistic, MaxOverActivePoints) {
  TestConfig c;
  c.y_step = c.h_step = 0.05;
  c.h_min = 0.1;
  const auto path = simulate_em(DriftSpec::b_alt(), 0.0, 50.0, 0.01, 12);
  const auto res = test_statistic(path, c);
  double best = -kInf;
  for (const auto& p : res.points) {
    if (p.active) best = std::max(best, p.score);
  }
  EXPECT_EQ(res.statistic, best);
  EXPECT_EQ(res.points.size(), build_grid(c).size());
}

TEST(TestStatistic, WorkerCountDoesNotMatter) {
  TestConfig c;
  const auto path = simulate_em(DriftSpec::b_alt(), 0.0, 100.0, 0.01, 13);
  c.workers = 1;
  const auto a = test_statistic(path, c);
  c.workers = 4;
  const auto b = test_statistic(path, c);
  EXPECT_EQ(a.statistic, b.statistic);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i].score, b.points[i].score);
}

TEST(TestStatistic, PartialSupportDeactivatesPoints) {
  TestConfig c;
  c.y_step = c.h_step = c.h_min = 0.1;
  auto path = simulate_em(DriftSpec::linear(-1.0), 0.0, 20.0, 0.01, 3);
  for (double& v : path.values) v = 0.75 + 0.05 * std::tanh(v);
  const auto res = test_statistic(path, c);
  std::size_t inactive = 0;
  for (const auto& p : res.points) inactive += !p.active;
  EXPECT_GT(inactive, 0u);
  EXPECT_TRUE(std::isfinite(res.statistic));
}

TEST(TestStatistic, DegeneratePath) {
  TestConfig c;
  EXPECT_THROW((void)test_statistic(constant_path(5.0, 1000), c), DegeneratePathError);
}

TEST(Detections, MinimalIntervalsExample) {
  const std::vector<GridPoint> det{{0.0, 0.5}, {0.0, 0.2}, {0.3, 0.1}};
  const auto m = minimal_intervals(det);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_TRUE(std::find(m.begin(), m.end(), GridPoint{0.0, 0.2}) != m.end());
  EXPECT_TRUE(std::find(m.begin(), m.end(), GridPoint{0.3, 0.1}) != m.end());
  EXPECT_EQ(minimal_intervals({{0.1, 0.2}}), (std::vector<GridPoint>{{0.1, 0.2}}));
  EXPECT_TRUE(minimal_intervals({}).empty());
}

TEST(Detections, ThresholdAndCorrectionless) {
  std::vector<LocalScore> pts(3);
  pts[0] = {0.0, 0.5, 1.0, 0.0, 0.5, 0.4, 0.6, true};
  pts[1] = {0.2, 0.1, 0.2, 0.0, 0.1, 1.0, -0.8, true};
  pts[2] = {0.5, 0.1, 9.0, 0.0, 0.0, 0.0, 9.0, false};
  EXPECT_EQ(detections(pts, 0.5), (std::vector<GridPoint>{{0.0, 0.5}}));
  EXPECT_EQ(detections(pts, 0.15, true), (std::vector<GridPoint>{{0.0, 0.5}, {0.2, 0.1}}));
}

TEST(Decide, InfiniteThresholds) {
  TestConfig c;
  const auto path = simulate_em(DriftSpec::linear(-1.0), 0.0, 50.0, 0.01, 21);
  const auto never = decide(path, c, kInf);
  EXPECT_FALSE(never.reject);
  EXPECT_TRUE(never.detected.empty());
  const auto always = decide(path, c, -kInf);
  EXPECT_TRUE(always.reject);
  EXPECT_FALSE(always.detected.empty());
  EXPECT_FALSE(always.minimal.empty());
}

TEST(Decide, InvariantsOnSimulatedRuns) {
  TestConfig c;
  c.eta = 0.05;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto path = simulate_em(DriftSpec::b_alt(), 0.0, 300.0, 0.01, derive_seed(31, r));
    const double kappa = 1.5 + 0.1 * static_cast<double>(r);
    const auto res = decide(path, c, kappa);
    EXPECT_EQ(res.reject, res.statistic > kappa);
    EXPECT_EQ(res.reject, !res.detected.empty());
    for (const auto& m : res.minimal) {
      EXPECT_TRUE(std::find(res.detected.begin(), res.detected.end(), m) != res.detected.end());
      for (const auto& d : res.detected) {
        const bool inside = d.y - d.h >= m.y - m.h - 1e-12 && d.y + d.h <= m.y + m.h + 1e-12;
        EXPECT_FALSE(inside && !(d == m)) << "minimal interval contains another detection";
      }
    }
  }
}

TEST(TestConfig, Validation) {
  TestConfig base;
  base.y_step = base.h_step = base.h_min = 0.1;
  EXPECT_NO_THROW(base.validate());
  auto c = base;
  c.kernel = Kernel::optimal_recovery(1.0);
  EXPECT_THROW(c.validate(), NonDifferentiableKernelError);
  c = base;
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = base;
  c.eta = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = base;
  c.h_min = 0.05;
  EXPECT_THROW(c.validate(), ConfigError);
  c = base;
  c.sigma = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(TestConfig{}.resolved(100.0).validate());
  EXPECT_EQ(parse_side("greater"), Side::Greater);
  EXPECT_EQ(to_string(Side::Less), "less");
  EXPECT_THROW((void)parse_side("up"), ConfigError);
}

}  // namespace
}  // namespace driftscan
