#include "driftscan/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftscan/error.hpp"
#include "driftscan/parallel.hpp"
#include "driftscan/rng.hpp"

namespace driftscan {
namespace {

double dot(const double* w, const double* x, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += w[i] * x[i];
    s1 += w[i + 1] * x[i + 1];
    s2 += w[i + 2] * x[i + 2];
    s3 += w[i + 3] * x[i + 3];
  }
  for (; i < n; ++i) s0 += w[i] * x[i];
  return (s0 + s1) + (s2 + s3);
}

std::vector<InvariantDensity> composite_densities(const QuantileConfig& config) {
  std::vector<InvariantDensity> out;
  if (config.eta == 0.0) {
    out.emplace_back(config.b0);
  } else {
    out.emplace_back(config.b0.with_offset(config.eta));
    out.emplace_back(config.b0.with_offset(-config.eta));
  }
  return out;
}

std::vector<double> draw_all(const QuantileConfig& config, const LimitSampler& sampler) {
  std::vector<double> draws(config.N);
  parallel_for(config.N, config.workers, [&](std::size_t r) {
    draws[r] = sampler.draw(derive_seed(config.master_seed, r));
  });
  std::sort(draws.begin(), draws.end());
  return draws;
}

QuantileTable tabulate(const QuantileConfig& config, std::vector<double> sorted) {
  QuantileTable table;
  const double shift = similarity_shift(config.A, config.eta, config.sigma);
  for (double alpha : config.alphas) {
    QuantileRow row;
    row.eta = config.eta;
    row.alpha = alpha;
    row.kappa_raw = empirical_quantile(sorted, alpha);
    row.kappa = row.kappa_raw + shift;
    row.N = config.N;
    row.n1 = config.n1;
    row.n2 = config.n2;
    row.seed = config.master_seed;
    table.rows.push_back(row);
  }
  table.samples = std::move(sorted);
  return table;
}

}  // namespace

void QuantileConfig::validate() const {
  if (!(A > 0.0) || !(sigma > 0.0)) throw ConfigError("A and sigma must be positive");
  if (!(eta >= 0.0)) throw ConfigError("eta must be non-negative");
  if (n1 < 2 || n2 < 2) throw ConfigError("n1 and n2 must be at least 2");
  if (N < 1) throw ConfigError("N must be at least 1");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alphas must lie in (0, 1)");
  }
}

LimitSampler::LimitSampler(const QuantileConfig& config,
                           const std::vector<InvariantDensity>& densities)
    : n2_(config.n2), A_(config.A), dz_(2.0 * config.A / config.n2) {
  config.validate();
  if (densities.empty()) throw ConfigError("limit sampler needs at least one density");
  const double A = config.A;
  const int n1 = config.n1;
  std::vector<double> z(static_cast<std::size_t>(n2_));
  for (int j = 0; j < n2_; ++j) z[static_cast<std::size_t>(j)] = -A + j * dz_;

  // (y, h) = (-A + i A/n1, k A/n1) with [y - h, y + h] inside [-A, A].
  struct Window {
    double y, h;
  };
  std::vector<Window> windows;
  for (int k = 1; k <= n1; ++k) {
    for (int i = k; i <= 2 * n1 - k; ++i) {
      windows.push_back({-A + i * A / n1, k * A / n1});
    }
  }

  std::vector<std::vector<double>> roots;
  std::vector<double> mass;
  for (const auto& q : densities) {
    std::vector<double> r(z.size());
    double m = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double v = q(z[j]);
      r[j] = std::sqrt(v);
      m += v * dz_;
    }
    roots.push_back(std::move(r));
    mass.push_back(m);
  }
  per_density_.resize(densities.size());

  std::size_t offset = 0;
  for (const auto& win : windows) {
    // Left points strictly inside (y - h, y + h).
    const auto lo = std::upper_bound(z.begin(), z.end(), win.y - win.h) - z.begin();
    const auto hi = std::lower_bound(z.begin(), z.end(), win.y + win.h) - z.begin();
    if (hi <= lo) continue;
    Pair pair{static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo), offset};
    std::vector<double> kvals(pair.count);
    bool any = false;
    for (std::size_t j = 0; j < pair.count; ++j) {
      kvals[j] = config.kernel.rescaled(win.y, win.h, z[pair.first + j]);
      any = any || kvals[j] > 0.0;
    }
    if (!any) continue;
    bool usable = true;
    std::vector<double> inv_sigma(densities.size());
    std::vector<double> corr(densities.size());
    for (std::size_t d = 0; d < densities.size(); ++d) {
      double s2 = 0.0;
      for (std::size_t j = 0; j < pair.count; ++j) {
        const double r = roots[d][pair.first + j];
        s2 += kvals[j] * kvals[j] * r * r * dz_;
      }
      if (!(s2 > 0.0)) {
        usable = false;
        break;
      }
      inv_sigma[d] = 1.0 / std::sqrt(s2);
      corr[d] = correction(std::min(1.0, s2 / mass[d]));
    }
    if (!usable) continue;
    for (std::size_t d = 0; d < densities.size(); ++d) {
      auto& st = per_density_[d];
      for (std::size_t j = 0; j < pair.count; ++j) {
        st.weights.push_back(kvals[j] * roots[d][pair.first + j]);
      }
      st.inv_sigma.push_back(inv_sigma[d]);
      st.correction.push_back(corr[d]);
    }
    pairs_.push_back(pair);
    offset += pair.count;
  }
  if (pairs_.empty()) throw ConfigError("limit sampler grid is empty; increase n1 or n2");
}

std::vector<double> LimitSampler::increments(std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dz_));
  std::vector<double> dw(static_cast<std::size_t>(n2_));
  for (auto& v : dw) v = normal(rng);
  return dw;
}

std::vector<double> LimitSampler::suprema(const std::vector<double>& dw) const {
  if (dw.size() != static_cast<std::size_t>(n2_)) throw DomainError("increment vector has wrong length");
  std::vector<double> out;
  for (const auto& st : per_density_) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto& pair = pairs_[p];
      const double zval = dot(&st.weights[pair.offset], &dw[pair.first], pair.count);
      best = std::max(best, std::abs(zval) * st.inv_sigma[p] - st.correction[p]);
    }
    out.push_back(best);
  }
  return out;
}

double LimitSampler::draw(std::uint64_t seed) const {
  const auto s = suprema(increments(seed));
  return *std::max_element(s.begin(), s.end());
}

double simulate_U(const QuantileConfig& config, std::size_t replication_index) {
  const LimitSampler sampler(config, composite_densities(config));
  return sampler.draw(derive_seed(config.master_seed, replication_index));
}

double empirical_quantile(const std::vector<double>& sorted, double alpha) {
  if (sorted.empty()) throw DomainError("empirical quantile of an empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double similarity_shift(double A, double eta, double sigma) {
  return 4.0 * std::sqrt(A * eta / (sigma * sigma));
}

QuantileTable kappa_similarity(const QuantileConfig& config) {
  config.validate();
  const LimitSampler sampler(config, composite_densities(config));
  return tabulate(config, draw_all(config, sampler));
}

QuantileTable kappa_simple(const DriftSpec& b0, double A, double sigma,
                           const std::vector<double>& alphas, std::size_t N, int n1, int n2,
                           std::uint64_t seed, unsigned workers) {
  QuantileConfig config;
  config.b0 = b0;
  config.A = A;
  config.sigma = sigma;
  config.eta = 0.0;
  config.alphas = alphas;
  config.N = N;
  config.n1 = n1;
  config.n2 = n2;
  config.master_seed = seed;
  config.workers = workers;
  config.validate();
  const LimitSampler sampler(config, {InvariantDensity(b0)});
  return tabulate(config, draw_all(config, sampler));
}

}  // namespace driftscan
