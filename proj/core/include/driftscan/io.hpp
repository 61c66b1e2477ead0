#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftscan/fbm.hpp"
#include "driftscan/lowerbound.hpp"
#include "driftscan/multiscale.hpp"
#include "driftscan/quantiles.hpp"
#include "driftscan/sde.hpp"

namespace driftscan::io {

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

void write_path_csv(const SamplePath& path, std::ostream& out);
SamplePath read_path_csv(std::istream& in);
void write_path_csv(const SamplePath& path, const std::filesystem::path& file);
SamplePath read_path_csv(const std::filesystem::path& file);

void write_path_binary(const SamplePath& path, const std::filesystem::path& file);
SamplePath read_path_binary(const std::filesystem::path& file);

/// Reads a path in either format, chosen by content.
SamplePath read_path(const std::filesystem::path& file);

void write_density_csv(const DensityTable& table, std::ostream& out);
void write_drift_csv(const DriftSpec& drift, const std::vector<double>& grid, std::ostream& out);
DriftSpec read_drift_csv(std::istream& in, const ClassParams& params);

std::string detection_json(const DetectionResult& result);
void write_scores_csv(const std::vector<LocalScore>& scores, std::ostream& out);
void write_quantiles_csv(const std::vector<QuantileRow>& rows, std::ostream& out);
void write_stability_csv(const std::vector<StabilityRow>& rows, std::ostream& out);
std::string alternatives_json(const AlternativeSet& set);

/// Opens a file for writing and throws ConfigError naming the path on failure.
std::ofstream open_output(const std::filesystem::path& file);

}  // namespace driftscan::io
