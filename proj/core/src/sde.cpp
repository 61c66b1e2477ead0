#include "driftscan/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "driftscan/error.hpp"

namespace driftscan {
namespace {

double bump_value(const Bump& bump, double x) noexcept {
  return bump.amplitude * bump.kernel.eval((x - bump.center) / bump.bandwidth);
}

// int_0^x amplitude * K((z - center) / h) dz
double bump_primitive(const Bump& bump, double x) noexcept {
  const double h = bump.bandwidth;
  return bump.amplitude * h *
         (bump.kernel.primitive((x - bump.center) / h) - bump.kernel.primitive(-bump.center / h));
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

DriftSpec DriftSpec::linear(double slope, ClassParams params) {
  DriftSpec d;
  d.slope_ = slope;
  d.params_ = params;
  d.name_ = "linear:" + format_number(slope);
  return d;
}

DriftSpec DriftSpec::tabulated(std::vector<double> x, std::vector<double> b, ClassParams params) {
  if (x.size() < 2 || x.size() != b.size()) {
    throw InvalidDriftError("tabulated drift needs at least two (x, b) pairs of equal length");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(b[i])) {
      throw InvalidDriftError("tabulated drift contains a non-finite value");
    }
    if (i > 0 && !(x[i] > x[i - 1])) throw InvalidDriftError("tabulated drift grid must increase");
  }
  DriftSpec d;
  d.table_x_ = std::move(x);
  d.table_b_ = std::move(b);
  d.params_ = params;
  d.table_cum_.assign(d.table_x_.size(), 0.0);
  for (std::size_t i = 1; i < d.table_x_.size(); ++i) {
    d.table_cum_[i] = d.table_cum_[i - 1] +
                      0.5 * (d.table_b_[i] + d.table_b_[i - 1]) * (d.table_x_[i] - d.table_x_[i - 1]);
  }
  d.table_cum_at_zero_ = 0.0;
  d.table_cum_at_zero_ = d.baseline_primitive(0.0);
  d.name_ = "tabulated";
  return d;
}

DriftSpec DriftSpec::b_alt(ClassParams params) {
  const Kernel k = Kernel::quartic();
  DriftSpec d = linear(-1.0, params)
                    .with_bump({-0.8, -0.6, 0.15, k})
                    .with_bump({0.15, 0.0, 0.2, k})
                    .with_bump({0.5, 0.5, 0.1, k});
  d.name_ = "b_alt";
  return d;
}

DriftSpec DriftSpec::with_offset(double eta) const {
  DriftSpec d = *this;
  d.offset_ += eta;
  d.params_.C += std::abs(eta);
  d.params_.gamma -= std::abs(eta) / (params_.sigma * params_.sigma);
  if (eta != 0.0) d.name_ += (eta > 0 ? "+" : "") + format_number(eta);
  return d;
}

DriftSpec DriftSpec::with_bump(const Bump& bump) const {
  if (!(bump.bandwidth > 0.0)) throw InvalidDriftError("bump bandwidth must be positive");
  DriftSpec d = *this;
  d.bumps_.push_back(bump);
  return d;
}

DriftSpec DriftSpec::with_params(const ClassParams& params) const {
  DriftSpec d = *this;
  d.params_ = params;
  return d;
}

DriftSpec DriftSpec::with_name(std::string name) const {
  DriftSpec d = *this;
  d.name_ = std::move(name);
  return d;
}

double DriftSpec::baseline(double x) const noexcept {
  if (table_x_.empty()) return slope_ * x;
  const auto& tx = table_x_;
  const auto& tb = table_b_;
  std::size_t i;
  if (x <= tx.front()) {
    i = 0;
  } else if (x >= tx.back()) {
    i = tx.size() - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(tx.begin(), tx.end(), x) - tx.begin()) - 1;
  }
  const double s = (tb[i + 1] - tb[i]) / (tx[i + 1] - tx[i]);
  return tb[i] + s * (x - tx[i]);
}

double DriftSpec::baseline_primitive(double x) const noexcept {
  if (table_x_.empty()) return 0.5 * slope_ * x * x;
  const auto& tx = table_x_;
  const auto& tb = table_b_;
  std::size_t i;
  if (x <= tx.front()) {
    i = 0;
  } else if (x >= tx.back()) {
    i = tx.size() - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(tx.begin(), tx.end(), x) - tx.begin()) - 1;
  }
  const double s = (tb[i + 1] - tb[i]) / (tx[i + 1] - tx[i]);
  const double d = x - tx[i];
  return table_cum_[i] + tb[i] * d + 0.5 * s * d * d - table_cum_at_zero_;
}

double DriftSpec::eval(double x) const noexcept {
  double b = baseline(x) + offset_;
  for (const auto& bump : bumps_) b += bump_value(bump, x);
  return b;
}

double DriftSpec::log_density_unnormalized(double x) const noexcept {
  double integral = baseline_primitive(x) + offset_ * x;
  for (const auto& bump : bumps_) integral += bump_primitive(bump, x);
  return 2.0 * integral / (params_.sigma * params_.sigma);
}

void DriftSpec::validate() const {
  const auto& p = params_;
  if (!(p.C >= 1.0) || !(p.A > 0.0) || !(p.gamma > 0.0) || !(p.sigma > 0.0)) {
    throw InvalidDriftError("class parameters need C >= 1, A > 0, gamma > 0, sigma > 0");
  }
  constexpr double tol = 1e-12;
  for (const auto& bump : bumps_) {
    if (bump.center - bump.bandwidth < -p.A - tol || bump.center + bump.bandwidth > p.A + tol) {
      throw InvalidDriftError("bump at " + format_number(bump.center) + " with bandwidth " +
                              format_number(bump.bandwidth) + " leaves [-A, A]");
    }
  }
  const double step = p.A / 200.0;
  const double s2 = p.sigma * p.sigma;
  for (int i = -600; i <= 600; ++i) {
    const double x = step * i;
    const double b = eval(x);
    if (!std::isfinite(b) || std::abs(b) > p.C * (1.0 + std::abs(x)) + tol) {
      throw InvalidDriftError("growth bound |b(x)| <= C(1+|x|) fails at x = " + format_number(x));
    }
    if (std::abs(i) >= 200) {
      const double sign = x > 0 ? 1.0 : -1.0;
      if (b * sign / s2 > -p.gamma + tol) {
        throw InvalidDriftError("sign condition b(x) sgn(x) / sigma^2 <= -gamma fails at x = " +
                                format_number(x));
      }
    }
  }
}

std::vector<double> DriftSpec::breakpoints() const {
  std::vector<double> out{0.0};
  for (const auto& bump : bumps_) {
    double unit[5];
    const int n = bump.kernel.breakpoints(unit);
    for (int i = 0; i < n; ++i) out.push_back(bump.center + bump.bandwidth * unit[i]);
  }
  if (!table_x_.empty()) {
    out.push_back(table_x_.front());
    out.push_back(table_x_.back());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DensityBounds class_bounds(double C, double A, double gamma, double sigma) {
  if (!(C > 0.0) || !(A > 0.0) || !(gamma > 0.0) || !(sigma > 0.0)) {
    throw DomainError("class_bounds needs positive parameters");
  }
  const double inv_s2 = 1.0 / (sigma * sigma);
  const double c1 = 2.0 * C * inv_s2 * (1.0 + A) * A;
  DensityBounds out;
  out.lower = std::exp(-c1) / (2.0 * A * c1 + std::exp(c1) / gamma);
  const double growth = std::exp(2.0 * inv_s2 * (1.0 + 1.0 / C));
  const double l1 = 0.5 * C * growth * std::exp(c1);
  const double l2 = C * C * inv_s2 * growth *
                    (std::exp(c1) + std::max(std::exp(c1 + 2.0 * A * gamma - 1.0) / (2.0 * gamma),
                                             A * std::exp(c1)));
  out.upper = std::max(l1, l2);
  return out;
}

double truncation_radius(const ClassParams& p) {
  const double c1 = 2.0 * p.C * (1.0 + p.A) * p.A / (p.sigma * p.sigma);
  const double excess = (c1 + std::log(1.0 / p.gamma) + 12.0 * std::numbers::ln10) / (2.0 * p.gamma);
  return p.A + std::max(excess, 1.0);
}

InvariantDensity::InvariantDensity(DriftSpec drift) : drift_(std::move(drift)) {
  drift_.validate();
  radius_ = truncation_radius(drift_.params());
  std::vector<double> cuts{-radius_, -drift_.params().A, drift_.params().A, radius_};
  for (double b : drift_.breakpoints()) {
    if (b > -radius_ && b < radius_) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto f = [this](double x) { return std::exp(drift_.log_density_unnormalized(x)); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += simpson(f, cuts[i], cuts[i + 1]);
  if (!std::isfinite(total) || !(total > 0.0)) {
    throw InvalidDriftError("invariant density is not normalizable");
  }
  norm_const_ = total;
}

double InvariantDensity::operator()(double x) const noexcept {
  return std::exp(drift_.log_density_unnormalized(x)) / norm_const_;
}

double invariant_density(const DriftSpec& drift, double x) { return InvariantDensity(drift)(x); }

double normalizing_constant(const DriftSpec& drift) { return InvariantDensity(drift).norm_const(); }

double DensityTable::trapezoid_mass() const {
  double mass = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    mass += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return mass;
}

double DensityTable::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng) * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return grid.front();
  if (it == cdf_.end()) return grid.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  const double span = cdf_[i] - cdf_[i - 1];
  const double frac = span > 0.0 ? (u - cdf_[i - 1]) / span : 0.0;
  return grid[i - 1] + frac * (grid[i] - grid[i - 1]);
}

DensityTable tabulate_density(const DriftSpec& drift, std::size_t points) {
  if (points < 2) throw DomainError("density table needs at least two points");
  const InvariantDensity q(drift);
  DensityTable table;
  table.norm_const = q.norm_const();
  const auto bounds = class_bounds(drift.params());
  table.lower_bound = bounds.lower;
  table.upper_bound = bounds.upper;
  const double R = q.radius();
  table.grid.resize(points);
  table.values.resize(points);
  table.cdf_.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -R + 2.0 * R * static_cast<double>(i) / static_cast<double>(points - 1);
    table.grid[i] = x;
    table.values[i] = q(x);
  }
  table.cdf_[0] = 0.0;
  for (std::size_t i = 1; i < points; ++i) {
    table.cdf_[i] = table.cdf_[i - 1] +
                    0.5 * (table.values[i] + table.values[i - 1]) * (table.grid[i] - table.grid[i - 1]);
  }
  return table;
}

double sample_stationary(const DriftSpec& drift, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return tabulate_density(drift).sample(rng);
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T >= dt)) throw DomainError("simulation needs dt > 0 and T >= dt");
  return static_cast<std::size_t>(std::max(1LL, std::llround(T / dt)));
}

SamplePath simulate_em(const DriftSpec& drift, double x0, double T, double dt, std::uint64_t seed) {
  const std::size_t steps = step_count(T, dt);
  SamplePath path;
  path.dt = dt;
  path.seed = seed;
  path.sigma = drift.sigma();
  path.drift_id = drift.id();
  path.values.resize(steps + 1);
  path.values[0] = x0;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  const double root = std::sqrt(dt);
  const double sigma = drift.sigma();
  double x = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    x += drift.eval(x) * dt + sigma * (root * normal(rng));
    if (!std::isfinite(x)) throw BlowUpError(i + 1);
    path.values[i + 1] = x;
  }
  return path;
}

std::vector<double> empirical_density(const SamplePath& path, const std::vector<double>& z_grid,
                                      double eps) {
  if (!(eps > 0.0)) throw DomainError("empirical_density needs eps > 0");
  if (path.size() < 2) throw DomainError("path needs at least two points");
  std::vector<double> left(path.values.begin(), path.values.end() - 1);
  std::sort(left.begin(), left.end());
  const double scale = 1.0 / (static_cast<double>(left.size()) * 2.0 * eps);
  std::vector<double> out;
  out.reserve(z_grid.size());
  for (double z : z_grid) {
    const auto lo = std::lower_bound(left.begin(), left.end(), z - eps);
    const auto hi = std::upper_bound(left.begin(), left.end(), z + eps);
    out.push_back(static_cast<double>(hi - lo) * scale);
  }
  return out;
}

}  // namespace driftscan
