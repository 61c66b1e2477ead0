#include "driftscan/multiscale.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "driftscan/error.hpp"
#include "driftscan/parallel.hpp"

namespace driftscan {
namespace {

constexpr double kGridTol = 1e-12;

void check_path(const SamplePath& path) {
  if (path.size() < 2 || !(path.dt > 0.0)) {
    throw DomainError("path needs at least two points and dt > 0");
  }
}

void check_window(double h) {
  if (!(h > 0.0)) throw DomainError("bandwidth h must be positive");
}

LocalScore assemble(double y, double h, double itilde, double sum_k, double sum_k2, double sum_kb,
                    double dt, double horizon, double sigma_max_sq, const TestConfig& config) {
  LocalScore s;
  s.y = y;
  s.h = h;
  s.sigma_hat_sq = sum_k2 * dt / horizon;
  if (!(s.sigma_hat_sq >= kActivationFloor) || !(sigma_max_sq > 0.0)) {
    s.active = false;
    s.psi = 0.0;
    s.lambda = 0.0;
    s.correction = 0.0;
    return s;
  }
  const double denom = config.sigma * std::sqrt(sum_k2 * dt);
  s.psi = (itilde - sum_kb * dt) / denom;
  s.lambda = config.eta * sum_k * dt / denom;
  s.correction = correction(std::min(1.0, s.sigma_hat_sq / sigma_max_sq));
  s.score = apply_side(config.side, s.psi) - s.lambda - s.correction;
  s.active = true;
  return s;
}

constexpr std::array<std::array<double, 9>, 9> binomials() {
  std::array<std::array<double, 9>, 9> c{};
  for (int n = 0; n < 9; ++n) {
    c[n][0] = 1.0;
    for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0.0);
  }
  return c;
}

constexpr auto kBinom = binomials();

}  // namespace

Side parse_side(const std::string& name) {
  if (name == "two-sided" || name == "two_sided" || name == "both") return Side::TwoSided;
  if (name == "greater") return Side::Greater;
  if (name == "less") return Side::Less;
  throw ConfigError("unknown side '" + name + "' (expected two-sided | greater | less)");
}

std::string to_string(Side side) {
  switch (side) {
    case Side::TwoSided: return "two-sided";
    case Side::Greater: return "greater";
    case Side::Less: return "less";
  }
  return "two-sided";
}

TestConfig TestConfig::resolved(double T) const {
  if (!(T > 1.0)) throw DomainError("grid defaults need a horizon T > 1");
  TestConfig c = *this;
  const double step = 1.0 / std::sqrt(T);
  if (c.y_step <= 0.0) c.y_step = step;
  if (c.h_step <= 0.0) c.h_step = step;
  if (c.h_min <= 0.0) c.h_min = std::max(c.h_step, std::cbrt(std::log(T) / T));
  return c;
}

void TestConfig::validate() const {
  if (!(A > 0.0)) throw ConfigError("A must be positive");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(eta >= 0.0)) throw ConfigError("eta must be non-negative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!kernel.is_c1()) {
    throw NonDifferentiableKernelError("the test statistic needs a C^1 kernel, got '" +
                                       kernel.to_string() + "'");
  }
  if (!(y_step > 0.0) || !(h_step > 0.0) || !(h_min > 0.0)) {
    throw ConfigError("grid steps and h_min must be positive");
  }
  if (h_min < h_step - kGridTol) throw ConfigError("h_min must be at least h_step");
}

double apply_side(Side side, double psi) noexcept {
  switch (side) {
    case Side::TwoSided: return std::abs(psi);
    case Side::Greater: return psi;
    case Side::Less: return -psi;
  }
  return std::abs(psi);
}

double pathwise_integral(const SamplePath& path, double y, double h, const Kernel& kernel,
                         double sigma) {
  check_path(path);
  check_window(h);
  const auto& x = path.values;
  const std::size_t n = x.size();
  const double spatial = kernel.antiderivative(y, h, x.front(), x.back());
  double drift_term = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) drift_term += kernel.derivative((x[i] - y) / h);
  return spatial - 0.5 * sigma * sigma * drift_term / h * path.dt;
}

double sigma_hat_sq(const SamplePath& path, double y, double h, const Kernel& kernel) {
  check_path(path);
  check_window(h);
  const auto& x = path.values;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double k = kernel.rescaled(y, h, x[i]);
    sum += k * k;
  }
  return sum / static_cast<double>(x.size() - 1);
}

double sigma_hat_max_sq(const SamplePath& path, double A) {
  check_path(path);
  const auto& x = path.values;
  std::size_t inside = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) inside += std::abs(x[i]) <= A ? 1 : 0;
  return static_cast<double>(inside) / static_cast<double>(x.size() - 1);
}

LocalScore local_score(const SamplePath& path, double y, double h, const TestConfig& config) {
  check_path(path);
  check_window(h);
  const auto& x = path.values;
  double sum_k = 0.0;
  double sum_k2 = 0.0;
  double sum_kb = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double k = config.kernel.rescaled(y, h, x[i]);
    if (k == 0.0) continue;
    sum_k += k;
    sum_k2 += k * k;
    sum_kb += k * config.b0.eval(x[i]);
  }
  const double itilde = pathwise_integral(path, y, h, config.kernel, config.sigma);
  return assemble(y, h, itilde, sum_k, sum_k2, sum_kb, path.dt, path.horizon(),
                  sigma_hat_max_sq(path, config.A), config);
}

std::vector<GridPoint> build_grid(const TestConfig& config) {
  if (!(config.y_step > 0.0) || !(config.h_step > 0.0) || !(config.h_min > 0.0)) {
    throw ConfigError("grid steps and h_min must be positive");
  }
  std::vector<GridPoint> grid;
  const double A = config.A;
  for (long k = 0;; ++k) {
    const double h = config.h_min + static_cast<double>(k) * config.h_step;
    if (h > A + kGridTol) break;
    for (long j = 0;; ++j) {
      const double y = -A + h + static_cast<double>(j) * config.y_step;
      if (y > A - h + kGridTol) break;
      grid.push_back({y, h});
    }
  }
  if (grid.empty()) throw ConfigError("the (y, h) grid is empty; check A, h_min and the steps");
  return grid;
}

OccupationIndex::OccupationIndex(const SamplePath& path, const TestConfig& config, std::size_t cells)
    : config_(config), dt_(path.dt), horizon_(path.horizon()) {
  check_path(path);
  if (!config.kernel.is_c1() || config.kernel.family() != KernelFamily::QuarticSmooth) {
    throw NonDifferentiableKernelError("occupation index supports the quartic kernel only");
  }
  if (cells < 1) throw DomainError("occupation index needs at least one cell");
  const double A = config.A;
  x_first_ = path.values.front();
  x_last_ = path.values.back();
  xs_.reserve(path.size());
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (std::abs(path.values[i]) <= A) xs_.push_back(path.values[i]);
  }
  sigma_max_sq_ = static_cast<double>(xs_.size()) / static_cast<double>(path.size() - 1);
  std::sort(xs_.begin(), xs_.end());
  bs_.resize(xs_.size());
  for (std::size_t i = 0; i < xs_.size(); ++i) bs_[i] = config.b0.eval(xs_[i]);

  const double width = 2.0 * A / static_cast<double>(cells);
  edges_.resize(cells + 1);
  for (std::size_t c = 0; c <= cells; ++c) edges_[c] = -A + width * static_cast<double>(c);
  edges_[cells] = A;
  starts_.resize(cells + 1);
  for (std::size_t c = 0; c < cells; ++c) {
    starts_[c] = static_cast<std::size_t>(std::lower_bound(xs_.begin(), xs_.end(), edges_[c]) -
                                          xs_.begin());
  }
  starts_[cells] = xs_.size();
  centers_.resize(cells);
  moments_.assign(cells * kMoments, 0.0);
  drift_moments_.assign(cells * kDriftMoments, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double mid = 0.5 * (edges_[c] + edges_[c + 1]);
    centers_[c] = mid;
    double* m = &moments_[c * kMoments];
    double* mb = &drift_moments_[c * kDriftMoments];
    for (std::size_t i = starts_[c]; i < starts_[c + 1]; ++i) {
      const double d = xs_[i] - mid;
      double p = 1.0;
      for (int j = 0; j < kMoments; ++j) {
        m[j] += p;
        if (j < kDriftMoments) mb[j] += bs_[i] * p;
        p *= d;
      }
    }
  }
}

OccupationIndex::Sums OccupationIndex::sums(double y, double h) const {
  check_window(h);
  const double lo = y - h;
  const double hi = y + h;
  const double inv_h = 1.0 / h;
  const std::size_t cells = centers_.size();
  const auto first_full = static_cast<std::size_t>(
      std::lower_bound(edges_.begin(), edges_.end(), lo) - edges_.begin());
  const auto end_edge = static_cast<std::size_t>(
      std::upper_bound(edges_.begin(), edges_.end(), hi) - edges_.begin());
  // Cells [first_full, last_full) lie inside [lo, hi].
  const std::size_t last_full = end_edge == 0 ? 0 : std::min(end_edge - 1, cells);

  double mu[kMoments] = {};
  double beta[kDriftMoments] = {};
  std::size_t direct_a_end;
  std::size_t direct_b_begin;
  const auto begin = static_cast<std::size_t>(
      std::lower_bound(xs_.begin(), xs_.end(), lo) - xs_.begin());
  const auto end = static_cast<std::size_t>(
      std::upper_bound(xs_.begin(), xs_.end(), hi) - xs_.begin());

  if (first_full < last_full) {
    direct_a_end = starts_[first_full];
    direct_b_begin = starts_[last_full];
    double scaled[kMoments];
    for (std::size_t c = first_full; c < last_full; ++c) {
      const double* m = &moments_[c * kMoments];
      if (m[0] == 0.0) continue;
      const double* mb = &drift_moments_[c * kDriftMoments];
      const double a = (centers_[c] - y) * inv_h;
      double ph = 1.0;
      for (int j = 0; j < kMoments; ++j) {
        scaled[j] = m[j] * ph;
        ph *= inv_h;
      }
      // mu_k += sum_j binom(k, j) a^(k-j) scaled_j
      double apow[kMoments];
      apow[0] = 1.0;
      for (int j = 1; j < kMoments; ++j) apow[j] = apow[j - 1] * a;
      for (int k = 0; k < kMoments; ++k) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j) acc += kBinom[k][j] * apow[k - j] * scaled[j];
        mu[k] += acc;
      }
      double bscaled[kDriftMoments];
      ph = 1.0;
      for (int j = 0; j < kDriftMoments; ++j) {
        bscaled[j] = mb[j] * ph;
        ph *= inv_h;
      }
      for (int k = 0; k < kDriftMoments; ++k) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j) acc += kBinom[k][j] * apow[k - j] * bscaled[j];
        beta[k] += acc;
      }
    }
  } else {
    direct_a_end = end;
    direct_b_begin = end;
  }

  Sums s;
  s.k = 15.0 / 16.0 * (mu[0] - 2.0 * mu[2] + mu[4]);
  s.k2 = 225.0 / 256.0 * (mu[0] - 4.0 * mu[2] + 6.0 * mu[4] - 4.0 * mu[6] + mu[8]);
  s.dk = -3.75 * (mu[1] - mu[3]);
  s.kb = 15.0 / 16.0 * (beta[0] - 2.0 * beta[2] + beta[4]);

  const auto add_direct = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) {
      const double u = (xs_[i] - y) * inv_h;
      if (!(std::abs(u) < 1.0)) continue;
      const double w = 1.0 - u * u;
      const double k = 15.0 / 16.0 * w * w;
      s.k += k;
      s.k2 += k * k;
      s.dk += -3.75 * u * w;
      s.kb += k * bs_[i];
    }
  };
  add_direct(begin, std::max(begin, direct_a_end));
  add_direct(std::max(begin, direct_b_begin), end);
  return s;
}

LocalScore OccupationIndex::score(double y, double h) const {
  const Sums s = sums(y, h);
  const double spatial = config_.kernel.antiderivative(y, h, x_first_, x_last_);
  const double itilde = spatial - 0.5 * config_.sigma * config_.sigma * s.dk / h * dt_;
  return assemble(y, h, itilde, s.k, s.k2, s.kb, dt_, horizon_, sigma_max_sq_, config_);
}

StatisticResult test_statistic(const SamplePath& path, const TestConfig& config) {
  check_path(path);
  const TestConfig resolved = config.resolved(path.horizon());
  resolved.validate();
  const auto grid = build_grid(resolved);
  const OccupationIndex index(path, resolved);
  StatisticResult out;
  out.points.resize(grid.size());
  parallel_for(grid.size(), resolved.workers,
               [&](std::size_t i) { out.points[i] = index.score(grid[i].y, grid[i].h); });
  bool any = false;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : out.points) {
    if (!p.active) continue;
    any = true;
    best = std::max(best, p.score);
  }
  if (!any) throw DegeneratePathError("no grid point is active: the path never enters a kernel support");
  out.statistic = best;
  return out;
}

std::vector<GridPoint> detections(const std::vector<LocalScore>& per_point, double kappa,
                                  bool correctionless) {
  std::vector<GridPoint> out;
  for (const auto& p : per_point) {
    if (!p.active) continue;
    const double value = correctionless ? p.score + p.correction : p.score;
    if (value > kappa) out.push_back({p.y, p.h});
  }
  return out;
}

std::vector<GridPoint> minimal_intervals(const std::vector<GridPoint>& detected) {
  constexpr double tol = 1e-12;
  const auto strictly_inside = [](const GridPoint& inner, const GridPoint& outer) {
    if (inner == outer) return false;
    return inner.y - inner.h >= outer.y - outer.h - tol && inner.y + inner.h <= outer.y + outer.h + tol;
  };
  std::vector<GridPoint> out;
  for (const auto& candidate : detected) {
    bool minimal = true;
    for (const auto& other : detected) {
      if (strictly_inside(other, candidate)) {
        minimal = false;
        break;
      }
    }
    if (minimal && std::find(out.begin(), out.end(), candidate) == out.end()) out.push_back(candidate);
  }
  return out;
}

DetectionResult decide(const SamplePath& path, const TestConfig& config, double kappa) {
  auto stat = test_statistic(path, config);
  DetectionResult r;
  r.statistic = stat.statistic;
  r.kappa = kappa;
  r.reject = stat.statistic > kappa;
  r.detected = detections(stat.points, kappa);
  r.minimal = minimal_intervals(r.detected);
  r.per_point = std::move(stat.points);
  return r;
}

}  // namespace driftscan
