#pragma once

#include <cstdint>
#include <vector>

#include "driftscan/kernels.hpp"
#include "driftscan/sde.hpp"

namespace driftscan {

struct QuantileConfig {
  DriftSpec b0 = DriftSpec::linear(-1.0);
  double A = 1.0;
  double sigma = 1.0;
  double eta = 0.0;
  std::vector<double> alphas{0.1, 0.05, 0.01};
  std::size_t N = 10000;
  int n1 = 100;
  int n2 = 100;
  std::uint64_t master_seed = 20240601;
  Kernel kernel = Kernel::quartic();
  unsigned workers = 1;

  void validate() const;
};

struct QuantileRow {
  double eta = 0.0;
  double alpha = 0.0;
  double kappa_raw = 0.0;
  double kappa = 0.0;
  std::size_t N = 0;
  int n1 = 0;
  int n2 = 0;
  std::uint64_t seed = 0;
};

struct QuantileTable {
  std::vector<QuantileRow> rows;
  /// Sorted draws of the limit statistic (before the shift).
  std::vector<double> samples;
};

/// Discretized Gaussian limit process. Holds the (y, h) grid, the weights
/// K((z-y)/h) sqrt(q(z)) at the spatial left points, and the standardization.
class LimitSampler {
public:
  /// One density for the simple null; two for the composite null U1 v U2.
  LimitSampler(const QuantileConfig& config, const std::vector<InvariantDensity>& densities);

  /// One draw of max_i sup_{(y,h)} (|Z_i|/sigma_i - C(sigma_i^2 / sigma_max,i^2)).
  double draw(std::uint64_t seed) const;
  /// Per-density suprema for a given increment vector (length n2).
  std::vector<double> suprema(const std::vector<double>& increments) const;
  /// Increments dW_j ~ N(0, dz) of replication `seed`.
  std::vector<double> increments(std::uint64_t seed) const;

  std::size_t pair_count() const noexcept { return pairs_.size(); }
  std::size_t density_count() const noexcept { return per_density_.size(); }
  double cell_width() const noexcept { return dz_; }

private:
  struct Pair {
    std::size_t first = 0;
    std::size_t count = 0;
    std::size_t offset = 0;
  };
  struct Standardization {
    std::vector<double> weights;
    std::vector<double> inv_sigma;
    std::vector<double> correction;
  };

  int n2_;
  double A_;
  double dz_;
  std::vector<Pair> pairs_;
  std::vector<Standardization> per_density_;
};

/// Draw of U1 v U2 for replication `index` (seed derived from the master seed).
double simulate_U(const QuantileConfig& config, std::size_t replication_index);

/// Order statistic at index ceil((1 - alpha) N) (1-based) of a sorted sample.
double empirical_quantile(const std::vector<double>& sorted, double alpha);

double similarity_shift(double A, double eta, double sigma);

QuantileTable kappa_similarity(const QuantileConfig& config);
QuantileTable kappa_simple(const DriftSpec& b0, double A, double sigma,
                           const std::vector<double>& alphas, std::size_t N, int n1, int n2,
                           std::uint64_t seed, unsigned workers = 1);

}  // namespace driftscan
