#pragma once

#include <limits>
#include <string>
#include <vector>

#include "driftscan/kernels.hpp"
#include "driftscan/sde.hpp"

namespace driftscan {

enum class Side { TwoSided, Greater, Less };

Side parse_side(const std::string& name);
std::string to_string(Side side);

inline constexpr double kActivationFloor = 1e-12;

struct TestConfig {
  double A = 1.0;
  double sigma = 1.0;
  double eta = 0.0;
  double alpha = 0.05;
  DriftSpec b0 = DriftSpec::linear(-1.0);
  Kernel kernel = Kernel::quartic();
  /// Zero means "derive from the horizon" (see resolved()).
  double y_step = 0.0;
  double h_step = 0.0;
  double h_min = 0.0;
  Side side = Side::TwoSided;
  unsigned workers = 1;

  /// Copy with unset grid steps filled in: y_step = h_step = 1/sqrt(T),
  /// h_min = max(h_step, (log T / T)^(1/3)).
  TestConfig resolved(double T) const;
  void validate() const;
};

struct GridPoint {
  double y = 0.0;
  double h = 0.0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct LocalScore {
  double y = 0.0;
  double h = 0.0;
  double psi = 0.0;
  double lambda = 0.0;
  double sigma_hat_sq = 0.0;
  double correction = 0.0;
  double score = -std::numeric_limits<double>::infinity();
  bool active = false;
};

struct DetectionResult {
  double statistic = 0.0;
  double kappa = 0.0;
  bool reject = false;
  std::vector<GridPoint> detected;
  std::vector<GridPoint> minimal;
  std::vector<LocalScore> per_point;
};

/// Pathwise version of int K_{y,h}(X) dX through the Ito formula.
double pathwise_integral(const SamplePath& path, double y, double h, const Kernel& kernel,
                         double sigma);
double sigma_hat_sq(const SamplePath& path, double y, double h, const Kernel& kernel);
double sigma_hat_max_sq(const SamplePath& path, double A);

double apply_side(Side side, double psi) noexcept;

/// Direct evaluation by time-ordered sums. `config` must have resolved steps
/// only if it is used for grids; here only A, sigma, eta, b0, kernel, side matter.
LocalScore local_score(const SamplePath& path, double y, double h, const TestConfig& config);

std::vector<GridPoint> build_grid(const TestConfig& config);

/// Sorted occupation data of a path with per-cell moments, for evaluating the
/// quartic-kernel sums of many windows quickly.
class OccupationIndex {
public:
  OccupationIndex(const SamplePath& path, const TestConfig& config, std::size_t cells = 512);

  LocalScore score(double y, double h) const;
  double sigma_max_sq() const noexcept { return sigma_max_sq_; }

  struct Sums {
    double k = 0.0;       // sum K(u)
    double k2 = 0.0;      // sum K(u)^2
    double dk = 0.0;      // sum K'(u)
    double kb = 0.0;      // sum K(u) b0(x)
  };
  Sums sums(double y, double h) const;

private:
  static constexpr int kMoments = 9;
  static constexpr int kDriftMoments = 5;

  TestConfig config_;
  double dt_;
  double horizon_;
  double x_first_;
  double x_last_;
  double sigma_max_sq_;
  std::vector<double> xs_;
  std::vector<double> bs_;
  std::vector<double> edges_;
  std::vector<double> centers_;
  std::vector<std::size_t> starts_;
  std::vector<double> moments_;        // cells * kMoments
  std::vector<double> drift_moments_;  // cells * kDriftMoments
};

struct StatisticResult {
  double statistic = 0.0;
  std::vector<LocalScore> points;
};

/// Supremum of the active scores over the grid. Throws DegeneratePathError if no
/// grid point is active.
StatisticResult test_statistic(const SamplePath& path, const TestConfig& config);

std::vector<GridPoint> detections(const std::vector<LocalScore>& per_point, double kappa,
                                  bool correctionless = false);
std::vector<GridPoint> minimal_intervals(const std::vector<GridPoint>& detected);

DetectionResult decide(const SamplePath& path, const TestConfig& config, double kappa);

}  // namespace driftscan
