#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftscan/kernels.hpp"
#include "driftscan/rng.hpp"

namespace driftscan {

/// Parameters (C, A, gamma, sigma) of the drift class.
struct ClassParams {
  double C = 1.0;
  double A = 1.0;
  double gamma = 1.0;
  double sigma = 1.0;
};

/// amplitude * K((x - center) / bandwidth)
struct Bump {
  double amplitude = 0.0;
  double center = 0.0;
  double bandwidth = 1.0;
  Kernel kernel = Kernel::quartic();
};

/// Baseline (linear or tabulated) plus a constant offset plus kernel bumps.
class DriftSpec {
public:
  static DriftSpec linear(double slope, ClassParams params = {});
  /// Piecewise-linear interpolation of (x, b); extended linearly past the ends.
  static DriftSpec tabulated(std::vector<double> x, std::vector<double> b, ClassParams params = {});
  /// -x - 0.8 K((x+0.6)/0.15) + 0.15 K(x/0.2) + 0.5 K((x-0.5)/0.1), quartic K.
  static DriftSpec b_alt(ClassParams params = {});

  /// Copy with `eta` added to the offset. The class constants are widened to
  /// C + |eta| and gamma - |eta| / sigma^2 so the shifted drift stays in a class.
  DriftSpec with_offset(double eta) const;
  /// Copy with an extra bump; class constants are kept.
  DriftSpec with_bump(const Bump& bump) const;
  DriftSpec with_params(const ClassParams& params) const;
  DriftSpec with_name(std::string name) const;

  double operator()(double x) const noexcept { return eval(x); }
  double eval(double x) const noexcept;
  double baseline(double x) const noexcept;
  /// int_0^x 2 b(z) / sigma^2 dz in closed form.
  double log_density_unnormalized(double x) const noexcept;

  /// Grid check of the class conditions; throws InvalidDriftError.
  void validate() const;

  const ClassParams& params() const noexcept { return params_; }
  double sigma() const noexcept { return params_.sigma; }
  double offset() const noexcept { return offset_; }
  const std::vector<Bump>& bumps() const noexcept { return bumps_; }
  bool is_tabulated() const noexcept { return !table_x_.empty(); }
  double slope() const noexcept { return slope_; }
  const std::vector<double>& table_x() const noexcept { return table_x_; }
  const std::vector<double>& table_b() const noexcept { return table_b_; }
  const std::string& id() const noexcept { return name_; }

  /// Points where the drift is not smooth, for splitting quadratures.
  std::vector<double> breakpoints() const;

private:
  DriftSpec() = default;
  double baseline_primitive(double x) const noexcept;

  double slope_ = 0.0;
  std::vector<double> table_x_;
  std::vector<double> table_b_;
  std::vector<double> table_cum_;  // int_{x_0}^{x_i} baseline
  double table_cum_at_zero_ = 0.0;
  double offset_ = 0.0;
  std::vector<Bump> bumps_;
  ClassParams params_;
  std::string name_;
};

/// Analytic bounds L_* <= q_b <= L^* over [-A, A] for the class.
struct DensityBounds {
  double lower = 0.0;
  double upper = 0.0;
};

DensityBounds class_bounds(double C, double A, double gamma, double sigma);
inline DensityBounds class_bounds(const ClassParams& p) {
  return class_bounds(p.C, p.A, p.gamma, p.sigma);
}

/// Radius beyond which the analytic tail bound of exp(int 2b/sigma^2) is < 1e-12.
double truncation_radius(const ClassParams& params);

/// The invariant density of a validated drift, with its normalizing constant.
class InvariantDensity {
public:
  explicit InvariantDensity(DriftSpec drift);

  double operator()(double x) const noexcept;
  double norm_const() const noexcept { return norm_const_; }
  double radius() const noexcept { return radius_; }
  const DriftSpec& drift() const noexcept { return drift_; }

private:
  DriftSpec drift_;
  double radius_ = 0.0;
  double norm_const_ = 0.0;
};

double invariant_density(const DriftSpec& drift, double x);
double normalizing_constant(const DriftSpec& drift);

/// Integrates f over [a, b] by composite Simpson, doubling the panel count
/// until the relative change falls below `rel_tol`.
template <class F>
double simpson(F&& f, double a, double b, double rel_tol = 1e-10, int max_level = 22);

/// Tabulated invariant density on a uniform grid over [-R, R].
struct DensityTable {
  std::vector<double> grid;
  std::vector<double> values;
  double norm_const = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;

  double trapezoid_mass() const;
  /// Inverse-CDF draw with linear interpolation of the cumulative table.
  double sample(Rng& rng) const;

private:
  friend DensityTable tabulate_density(const DriftSpec&, std::size_t);
  std::vector<double> cdf_;
};

DensityTable tabulate_density(const DriftSpec& drift, std::size_t points = 4001);
double sample_stationary(const DriftSpec& drift, std::uint64_t seed);

/// Trajectory on a uniform time grid starting at t = 0.
struct SamplePath {
  double dt = 0.0;
  std::vector<double> values;
  double hurst = 0.5;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  std::string drift_id;

  std::size_t size() const noexcept { return values.size(); }
  double horizon() const noexcept {
    return values.empty() ? 0.0 : dt * static_cast<double>(values.size() - 1);
  }
};

/// Number of Euler steps for horizon T; at least one.
std::size_t step_count(double T, double dt);

SamplePath simulate_em(const DriftSpec& drift, double x0, double T, double dt, std::uint64_t seed);

/// (1/T) * time in [z - eps, z + eps] / (2 eps), per grid point, from left points.
std::vector<double> empirical_density(const SamplePath& path, const std::vector<double>& z_grid,
                                      double eps);

}  // namespace driftscan

#include "driftscan/detail/simpson.ipp"
