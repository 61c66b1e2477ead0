#include "driftscan/fbm.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "driftscan/error.hpp"
#include "driftscan/parallel.hpp"
#include "driftscan/rng.hpp"

namespace driftscan {
namespace {

constexpr double kSeriesRadius = 0.5;

void check_hurst(double H) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("Hurst index must lie in (0, 1)");
}

// Euler integral for c > b > 0, z < 1, split at 1/2 with the endpoint
// singularities t^(b-1) and (1-t)^(c-b-1) subtracted and integrated exactly.
double hyp2f1_euler(double a, double b, double c, double z) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  const double e = c - b - 1.0;
  const double at_one = std::pow(1.0 - z, -a);
  const auto near_zero = [&](double t) {
    const double g = std::pow(1.0 - t, e) * std::pow(1.0 - t * z, -a);
    return std::pow(t, b - 1.0) * (g - 1.0);
  };
  const auto near_one = [&](double u) {
    const double t = 1.0 - u;
    const double g = std::pow(t, b - 1.0) * std::pow(1.0 - t * z, -a);
    return std::pow(u, e) * (g - at_one);
  };
  const double left = integrator.integrate(near_zero, 0.0, 0.5, 1e-13) + std::pow(0.5, b) / b;
  const double right = integrator.integrate(near_one, 0.0, 0.5, 1e-13) + at_one * std::pow(0.5, c - b) / (c - b);
  const double log_beta = std::lgamma(c) - std::lgamma(b) - std::lgamma(c - b);
  return std::exp(log_beta) * (left + right);
}

double kernel_with_gap(double H, double gap, double s, double t) {
  const double a = H - 0.5;
  const double z = 1.0 - t / s;
  return volterra_constant(H) * std::pow(gap, a) / std::tgamma(H + 0.5) * hyp2f1(a, -a, H + 0.5, z);
}

}  // namespace

double hyp2f1_series(double a, double b, double c, double z, int max_terms) {
  if (!(std::abs(z) < 1.0)) throw DomainError("hypergeometric series needs |z| < 1");
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < max_terms; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
    if (term == 0.0 || std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double hyp2f1(double a, double b, double c, double z) {
  if (a == 0.0 || b == 0.0) return 1.0;
  if (!std::isfinite(z)) throw UnsupportedError("hyp2f1 argument must be finite");
  if (std::abs(z) <= kSeriesRadius) {
    if (c <= 0.0 && c == std::floor(c)) throw UnsupportedError("hyp2f1 needs c outside the non-positive integers");
    return hyp2f1_series(a, b, c, z);
  }
  if (z > 0.0) throw UnsupportedError("hyp2f1 supports z <= 0 only");
  if (!(c > b && b > 0.0)) std::swap(a, b);
  if (!(c > b && b > 0.0)) {
    throw UnsupportedError("hyp2f1 needs c > b > 0 (after swapping a and b)");
  }
  return hyp2f1_euler(a, b, c, z);
}

double volterra_constant(double H) {
  check_hurst(H);
  if (H == 0.5) return 1.0;
  return std::sqrt(2.0 * H * std::tgamma(1.5 - H) * std::tgamma(H + 0.5) / std::tgamma(2.0 - 2.0 * H));
}

double volterra_kernel(double H, double t, double s) {
  check_hurst(H);
  if (!(s > 0.0) || !(s < t)) throw DomainError("volterra kernel needs 0 < s < t");
  if (H == 0.5) return 1.0;
  return kernel_with_gap(H, t - s, s, t);
}

double kernel_covariance(double H, double t, double s) {
  check_hurst(H);
  if (!(t > 0.0) || !(s > 0.0)) throw DomainError("kernel covariance needs t, s > 0");
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  const double m = std::min(t, s);
  const auto f = [&](double u, double uc) {
    const double from_left = uc < 0.0 ? -uc : u;
    const double to_m = uc > 0.0 ? uc : m - u;
    if (from_left <= 0.0 || to_m <= 0.0) return 0.0;
    const double gap_t = t == m ? to_m : t - from_left;
    const double gap_s = s == m ? to_m : s - from_left;
    return kernel_with_gap(H, gap_t, from_left, t) * kernel_with_gap(H, gap_s, from_left, s);
  };
  return integrator.integrate(f, 0.0, m, 1e-10);
}

double fbm_covariance(double H, double t, double s) {
  const double e = 2.0 * H;
  return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

HurstKernelTable::HurstKernelTable(double H, std::size_t steps, double dt)
    : H_(H), steps_(steps), dt_(dt) {
  check_hurst(H);
  if (steps < 1 || !(dt > 0.0)) throw DomainError("kernel table needs steps >= 1 and dt > 0");
  weights_.resize(steps * (steps + 1) / 2);
  if (H == 0.5) {
    std::fill(weights_.begin(), weights_.end(), dt);
    return;
  }
  const double p = H + 0.5;
  const double a = H - 0.5;
  // F(a, -a, p; 1 - e^v) on v in [0, log(2 steps)], since 1 - z = i / (j + 1/2).
  const double v_max = std::log(2.0 * static_cast<double>(steps)) + 1e-9;
  const std::size_t nodes = 2049;
  const double hv = v_max / static_cast<double>(nodes - 1);
  std::vector<double> fv(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    fv[k] = hyp2f1(a, -a, p, -std::expm1(hv * static_cast<double>(k)));
  }
  const boost::math::interpolators::cardinal_cubic_b_spline<double> spline(fv.begin(), fv.end(), 0.0, hv);

  std::vector<double> diff(steps + 1, 0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    diff[k] = std::pow(static_cast<double>(k), p) - std::pow(static_cast<double>(k - 1), p);
  }
  const double coef = volterra_constant(H) / (std::tgamma(p) * p) * std::pow(dt, p);
  for (std::size_t i = 1; i <= steps; ++i) {
    double* w = &weights_[(i - 1) * i / 2];
    for (std::size_t j = 0; j < i; ++j) {
      const double v = std::log(static_cast<double>(i) / (static_cast<double>(j) + 0.5));
      w[j] = coef * spline(v) * diff[i - j];
    }
  }
}

double HurstKernelTable::weight(std::size_t i, std::size_t j) const {
  if (i < 1 || i > steps_ || j >= i) throw DomainError("kernel table index out of range");
  return row(i)[j];
}

std::vector<double> HurstKernelTable::integrate(const std::vector<double>& dw) const {
  if (dw.size() != steps_) throw DomainError("increment vector length must equal the step count");
  std::vector<double> out(steps_ + 1, 0.0);
  if (H_ == 0.5) {
    for (std::size_t i = 1; i <= steps_; ++i) out[i] = out[i - 1] + dw[i - 1];
    return out;
  }
  const double inv_dt = 1.0 / dt_;
  for (std::size_t i = 1; i <= steps_; ++i) {
    const double* w = row(i);
    double s0 = 0.0, s1 = 0.0;
    std::size_t j = 0;
    for (; j + 2 <= i; j += 2) {
      s0 += w[j] * dw[j];
      s1 += w[j + 1] * dw[j + 1];
    }
    if (j < i) s0 += w[j] * dw[j];
    out[i] = (s0 + s1) * inv_dt;
  }
  return out;
}

std::vector<double> brownian_increments(std::size_t steps, double dt, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  const double root = std::sqrt(dt);
  std::vector<double> dw(steps);
  for (auto& v : dw) v = root * normal(rng);
  return dw;
}

SamplePath simulate_fbm(const HurstKernelTable& table, std::uint64_t seed) {
  SamplePath path;
  path.dt = table.dt();
  path.hurst = table.hurst();
  path.seed = seed;
  path.drift_id = "zero";
  path.values = table.integrate(brownian_increments(table.steps(), table.dt(), seed));
  return path;
}

SamplePath simulate_fbm(double H, double T, std::size_t n, std::uint64_t seed) {
  if (n < 2 || !(T > 0.0)) throw DomainError("simulate_fbm needs n >= 2 and T > 0");
  return simulate_fbm(HurstKernelTable(H, n, T / static_cast<double>(n)), seed);
}

SamplePath simulate_fractional_sde(const DriftSpec& drift, const HurstKernelTable& table, double x0,
                                   std::uint64_t seed) {
  const std::size_t steps = table.steps();
  const double dt = table.dt();
  const auto dw = brownian_increments(steps, dt, seed);
  std::vector<double> inc;
  if (table.hurst() == 0.5) {
    inc = dw;
  } else {
    const auto w = table.integrate(dw);
    inc.resize(steps);
    for (std::size_t i = 0; i < steps; ++i) inc[i] = w[i + 1] - w[i];
  }
  SamplePath path;
  path.dt = dt;
  path.hurst = table.hurst();
  path.seed = seed;
  path.sigma = drift.sigma();
  path.drift_id = drift.id();
  path.values.resize(steps + 1);
  path.values[0] = x0;
  const double sigma = drift.sigma();
  double x = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    x += drift.eval(x) * dt + sigma * inc[i];
    if (!std::isfinite(x)) throw BlowUpError(i + 1);
    path.values[i + 1] = x;
  }
  return path;
}

SamplePath simulate_fractional_sde(const DriftSpec& drift, double H, double x0, double T, double dt,
                                   std::uint64_t seed) {
  return simulate_fractional_sde(drift, HurstKernelTable(H, step_count(T, dt), dt), x0, seed);
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<StabilityRow> stability_experiment(const DriftSpec& b, double T, double dt,
                                               std::vector<double> hursts, std::size_t reps,
                                               const StabilityConfig& config) {
  if (std::find(hursts.begin(), hursts.end(), 0.5) == hursts.end()) {
    throw ConfigError("stability experiment needs H = 0.5 among the Hurst indices");
  }
  if (reps < 1) throw ConfigError("stability experiment needs at least one replication");
  std::sort(hursts.begin(), hursts.end());
  hursts.erase(std::unique(hursts.begin(), hursts.end()), hursts.end());
  TestConfig test = config.test;
  test.workers = 1;
  const std::size_t steps = step_count(T, dt);

  std::vector<SamplePath> base(reps);
  std::vector<double> base_stat(reps);
  parallel_for(reps, config.workers, [&](std::size_t r) {
    base[r] = simulate_em(b, config.x0, T, dt, derive_seed(config.master_seed, r));
    base_stat[r] = test_statistic(base[r], test).statistic;
  });

  std::vector<StabilityRow> rows;
  for (double H : hursts) {
    const HurstKernelTable table(H, steps, dt);
    std::vector<double> sup_gap(reps);
    std::vector<double> stat_gap(reps);
    parallel_for(reps, config.workers, [&](std::size_t r) {
      const auto path = simulate_fractional_sde(b, table, config.x0, derive_seed(config.master_seed, r));
      double gap = 0.0;
      for (std::size_t i = 0; i < path.size(); ++i) {
        gap = std::max(gap, std::abs(path.values[i] - base[r].values[i]));
      }
      sup_gap[r] = gap;
      stat_gap[r] = std::abs(test_statistic(path, test).statistic - base_stat[r]);
    });
    StabilityRow row;
    row.H = H;
    row.median_sup_gap = median(sup_gap);
    row.median_stat_gap = median(stat_gap);
    row.reps = reps;
    row.T = T;
    row.dt = dt;
    row.seed = config.master_seed;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace driftscan
