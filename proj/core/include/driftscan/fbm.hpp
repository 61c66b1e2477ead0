#pragma once

#include <cstdint>
#include <vector>

#include "driftscan/multiscale.hpp"
#include "driftscan/sde.hpp"

namespace driftscan {

/// Truncated Gauss series sum_n (a)_n (b)_n / ((c)_n n!) z^n, |z| < 1.
double hyp2f1_series(double a, double b, double c, double z, int max_terms = 100000);

/// Gauss hypergeometric F(a, b, c; z) for z <= 0 (and |z| <= 0.5).
/// Series for |z| <= 0.5, Euler integral otherwise; needs c > b > 0 after
/// swapping a and b. Other parameters raise UnsupportedError.
double hyp2f1(double a, double b, double c, double z);

/// Normalizing constant of the Volterra kernel, 1 at H = 1/2.
double volterra_constant(double H);

/// K_H(t, s) for 0 < s < t.
double volterra_kernel(double H, double t, double s);

/// int_0^{min(t,s)} K_H(t, u) K_H(s, u) du by quadrature.
double kernel_covariance(double H, double t, double s);

/// R_H(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double H, double t, double s);

/// Cell-integrated kernel weights on a uniform grid of `steps` cells of width dt.
/// Row i (1..steps) holds w_{i,j}, j < i.
class HurstKernelTable {
public:
  HurstKernelTable(double H, std::size_t steps, double dt);

  double hurst() const noexcept { return H_; }
  double dt() const noexcept { return dt_; }
  std::size_t steps() const noexcept { return steps_; }
  double weight(std::size_t i, std::size_t j) const;

  /// W^H at the grid times from the Brownian increments dW (length steps).
  std::vector<double> integrate(const std::vector<double>& dw) const;

private:
  const double* row(std::size_t i) const noexcept { return &weights_[(i - 1) * i / 2]; }

  double H_;
  std::size_t steps_;
  double dt_;
  std::vector<double> weights_;
};

/// Brownian increments sqrt(dt) Z_j, drawn from the same stream as simulate_em.
std::vector<double> brownian_increments(std::size_t steps, double dt, std::uint64_t seed);

SamplePath simulate_fbm(double H, double T, std::size_t n, std::uint64_t seed);
SamplePath simulate_fbm(const HurstKernelTable& table, std::uint64_t seed);

SamplePath simulate_fractional_sde(const DriftSpec& drift, double H, double x0, double T, double dt,
                                   std::uint64_t seed);
SamplePath simulate_fractional_sde(const DriftSpec& drift, const HurstKernelTable& table, double x0,
                                   std::uint64_t seed);

struct StabilityConfig {
  TestConfig test;
  double x0 = 0.0;
  std::uint64_t master_seed = 7;
  unsigned workers = 1;
};

struct StabilityRow {
  double H = 0.5;
  double median_sup_gap = 0.0;
  double median_stat_gap = 0.0;
  std::size_t reps = 0;
  double T = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
};

std::vector<StabilityRow> stability_experiment(const DriftSpec& b, double T, double dt,
                                               std::vector<double> hursts, std::size_t reps,
                                               const StabilityConfig& config);

double median(std::vector<double> values);

}  // namespace driftscan
