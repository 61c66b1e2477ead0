#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <driftscan/fbm.hpp>
#include <driftscan/lowerbound.hpp>
#include <driftscan/multiscale.hpp>
#include <driftscan/quantiles.hpp>
#include <driftscan/sde.hpp>

namespace driftscan::cli {

struct CommonOptions {
  std::uint64_t seed = 20240601;
  unsigned workers = 1;
  std::filesystem::path out = "out";
};

struct ModelOptions {
  double A = 1.0;
  double sigma = 1.0;
  double C = 1.0;
  double gamma = 1.0;
  std::string b0 = "ou";

  ClassParams params() const { return {C, A, gamma, sigma}; }
};

/// "ou", "linear:<slope>", "b_alt" or "file:<csv with x,b>".
DriftSpec parse_drift(const std::string& spec, const ClassParams& params);

struct GridOptions {
  double y_step = 0.0;
  double h_step = 0.0;
  double h_min = 0.0;
  std::string kernel = "quartic";
  std::string side = "two-sided";
};

TestConfig make_test_config(const ModelOptions& model, const GridOptions& grid, double eta,
                            double alpha, unsigned workers);

struct QuantilesOptions {
  ModelOptions model;
  std::vector<double> etas{0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> alphas{0.1, 0.05, 0.01};
  std::size_t N = 10000;
  int n1 = 100;
  int n2 = 100;
};

std::vector<QuantileRow> cmd_quantiles(const QuantilesOptions& options, const CommonOptions& common);

struct TestOptions {
  ModelOptions model;
  GridOptions grid;
  std::string path_file;
  std::string drift = "b_alt";
  double T = 2000.0;
  double dt = 0.005;
  double x0 = 0.0;
  double eta = 0.05;
  double alpha = 0.05;
  std::optional<double> kappa;
  std::size_t N = 10000;
  int n1 = 100;
  int n2 = 100;
};

DetectionResult cmd_test(const TestOptions& options, const CommonOptions& common);

inline constexpr std::array<std::array<double, 2>, 3> kPowerRegions{{{-0.75, -0.45}, {-0.2, 0.2}, {0.4, 0.6}}};

struct PowerOptions {
  ModelOptions model;
  GridOptions grid;
  std::string drift = "b_alt";
  double T = 2000.0;
  double dt = 0.005;
  double x0 = 0.0;
  std::size_t reps = 50;
  std::vector<double> etas{0.0, 0.05, 0.2, 0.5};
  std::vector<double> alphas{0.1, 0.05, 0.01};
  std::size_t N = 10000;
  int n1 = 100;
  int n2 = 100;
};

struct PowerRow {
  double eta = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
  double global = 0.0;
  std::array<double, 3> regional{};
  std::size_t reps = 0;
};

std::vector<PowerRow> cmd_power_table(const PowerOptions& options, const CommonOptions& common);

struct FbmCheckOptions {
  std::vector<double> hursts{0.4, 0.5, 0.6};
  std::size_t reps = 2000;
  std::size_t n = 200;
  double T = 1.0;
  std::vector<double> times{0.25, 0.5, 0.75, 1.0};
};

struct FbmCheckRow {
  double H = 0.5;
  double t = 0.0;
  double s = 0.0;
  double exact = 0.0;
  double table = 0.0;      // covariance implied by the discretized kernel weights
  double empirical = 0.0;
  double std_error = 0.0;
};

std::vector<FbmCheckRow> cmd_fbm_check(const FbmCheckOptions& options, const CommonOptions& common);

struct StabilityOptions {
  ModelOptions model;
  GridOptions grid;
  std::string drift = "ou";
  std::vector<double> hursts{0.45, 0.48, 0.5, 0.52, 0.55};
  std::size_t reps = 30;
  double T = 100.0;
  double dt = 0.025;
  double x0 = 0.0;
  double eta = 0.0;
};

std::vector<StabilityRow> cmd_stability(const StabilityOptions& options, const CommonOptions& common);

struct LowerBoundOptions {
  ModelOptions model;
  double beta = 1.0;
  double L = 1.0;
  double T = 1e4;
  double eta = 0.0;
  double eps = 0.0;
  bool export_drifts = false;
};

AlternativeSet cmd_lower_bound(const LowerBoundOptions& options, const CommonOptions& common);

struct SimulateOptions {
  ModelOptions model;
  std::string drift = "ou";
  double T = 100.0;
  double dt = 0.005;
  double x0 = 0.0;
  bool stationary = false;
  double hurst = 0.5;
  std::string format = "csv";
};

SamplePath cmd_simulate(const SimulateOptions& options, const CommonOptions& common);

/// Parses the command line, runs the subcommand and returns the exit code:
/// 0 on success, 2 for configuration errors, 3 for numerical failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace driftscan::cli
