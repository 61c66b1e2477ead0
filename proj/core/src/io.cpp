#include "driftscan/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "driftscan/error.hpp"

namespace driftscan::io {
namespace {

constexpr char kMagic[8] = {'D', 'S', 'P', 'A', 'T', 'H', '0', '1'};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ParseError("cannot parse number '" + t + "'", line);
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated binary path file", 0);
  return v;
}

std::ifstream open_input(const std::filesystem::path& file, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(file, mode);
  if (!in) throw ConfigError("cannot open '" + file.string() + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_output(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + file.string() + "' for writing");
  return out;
}

void write_path_csv(const SamplePath& path, std::ostream& out) {
  out << "# drift=" << (path.drift_id.empty() ? "unknown" : path.drift_id)
      << " sigma=" << format_double(path.sigma) << " dt=" << format_double(path.dt)
      << " seed=" << path.seed << " hurst=" << format_double(path.hurst) << '\n';
  out << "t,x\n";
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    out << format_double(path.dt * static_cast<double>(i)) << ',' << format_double(path.values[i]) << '\n';
  }
}

SamplePath read_path_csv(std::istream& in) {
  SamplePath path;
  path.dt = 0.0;
  std::vector<double> times;
  std::string line;
  std::size_t line_no = 0;
  bool dt_from_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      std::stringstream ss(t.substr(1));
      for (std::string tok; ss >> tok;) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "drift") {
          path.drift_id = val;
        } else if (key == "sigma") {
          path.sigma = parse_double(val, line_no);
        } else if (key == "dt") {
          path.dt = parse_double(val, line_no);
          dt_from_header = true;
        } else if (key == "seed") {
          try {
            path.seed = std::stoull(val);
          } catch (const std::exception&) {
            throw ParseError("cannot parse seed '" + val + "'", line_no);
          }
        } else if (key == "hurst") {
          path.hurst = parse_double(val, line_no);
        }
      }
      continue;
    }
    if (t == "t,x") continue;
    const auto cols = split(t, ',');
    if (cols.size() != 2) {
      throw ParseError("expected 2 columns (t,x), found " + std::to_string(cols.size()), line_no);
    }
    times.push_back(parse_double(cols[0], line_no));
    const double x = parse_double(cols[1], line_no);
    if (!std::isfinite(x)) throw ParseError("non-finite path value", line_no);
    path.values.push_back(x);
  }
  if (path.values.size() < 2) throw ParseError("path file needs at least two rows", line_no);
  if (!dt_from_header) path.dt = times[1] - times[0];
  if (!(path.dt > 0.0)) throw ParseError("time step must be positive", line_no);
  return path;
}

void write_path_csv(const SamplePath& path, const std::filesystem::path& file) {
  auto out = open_output(file);
  write_path_csv(path, out);
}

SamplePath read_path_csv(const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_path_csv(in);
}

void write_path_binary(const SamplePath& path, const std::filesystem::path& file) {
  auto out = open_output(file);
  out.write(kMagic, sizeof(kMagic));
  put(out, path.dt);
  put(out, path.hurst);
  put(out, path.sigma);
  put(out, static_cast<std::uint64_t>(path.seed));
  put(out, static_cast<std::uint64_t>(path.drift_id.size()));
  out.write(path.drift_id.data(), static_cast<std::streamsize>(path.drift_id.size()));
  put(out, static_cast<std::uint64_t>(path.values.size()));
  out.write(reinterpret_cast<const char*>(path.values.data()),
            static_cast<std::streamsize>(path.values.size() * sizeof(double)));
}

SamplePath read_path_binary(const std::filesystem::path& file) {
  auto in = open_input(file, std::ios::in | std::ios::binary);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a binary path file", 0);
  }
  SamplePath path;
  path.dt = get<double>(in);
  path.hurst = get<double>(in);
  path.sigma = get<double>(in);
  path.seed = get<std::uint64_t>(in);
  const auto id_len = get<std::uint64_t>(in);
  if (id_len > 4096) throw ParseError("corrupt drift id length", 0);
  path.drift_id.resize(id_len);
  in.read(path.drift_id.data(), static_cast<std::streamsize>(id_len));
  const auto n = get<std::uint64_t>(in);
  path.values.resize(n);
  in.read(reinterpret_cast<char*>(path.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ParseError("truncated binary path file", 0);
  return path;
}

SamplePath read_path(const std::filesystem::path& file) {
  auto in = open_input(file, std::ios::in | std::ios::binary);
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (in && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0) return read_path_binary(file);
  return read_path_csv(file);
}

void write_density_csv(const DensityTable& table, std::ostream& out) {
  out << "z,q\n";
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    out << format_double(table.grid[i]) << ',' << format_double(table.values[i]) << '\n';
  }
}

void write_drift_csv(const DriftSpec& drift, const std::vector<double>& grid, std::ostream& out) {
  out << "x,b\n";
  for (double x : grid) out << format_double(x) << ',' << format_double(drift.eval(x)) << '\n';
}

DriftSpec read_drift_csv(std::istream& in, const ClassParams& params) {
  std::vector<double> xs;
  std::vector<double> bs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t == "x,b") continue;
    const auto cols = split(t, ',');
    if (cols.size() != 2) {
      throw ParseError("expected 2 columns (x,b), found " + std::to_string(cols.size()), line_no);
    }
    xs.push_back(parse_double(cols[0], line_no));
    bs.push_back(parse_double(cols[1], line_no));
  }
  return DriftSpec::tabulated(std::move(xs), std::move(bs), params);
}

std::string detection_json(const DetectionResult& result) {
  nlohmann::ordered_json j;
  j["statistic"] = result.statistic;
  j["kappa"] = result.kappa;
  j["reject"] = result.reject;
  auto minimal = nlohmann::ordered_json::array();
  for (const auto& m : result.minimal) {
    double score = 0.0;
    for (const auto& p : result.per_point) {
      if (p.y == m.y && p.h == m.h) score = p.score;
    }
    minimal.push_back({{"y", m.y}, {"h", m.h}, {"score", score}});
  }
  j["minimal"] = minimal;
  j["detected_count"] = result.detected.size();
  return j.dump(2);
}

void write_scores_csv(const std::vector<LocalScore>& scores, std::ostream& out) {
  out << "y,h,psi,lambda,sigma_hat_sq,correction,score,active\n";
  for (const auto& s : scores) {
    out << format_double(s.y) << ',' << format_double(s.h) << ',' << format_double(s.psi) << ','
        << format_double(s.lambda) << ',' << format_double(s.sigma_hat_sq) << ','
        << format_double(s.correction) << ',' << (s.active ? format_double(s.score) : "nan") << ','
        << (s.active ? 1 : 0) << '\n';
  }
}

void write_quantiles_csv(const std::vector<QuantileRow>& rows, std::ostream& out) {
  out << "eta,alpha,kappa_raw,kappa,N,n1,n2,seed\n";
  for (const auto& r : rows) {
    out << format_double(r.eta) << ',' << format_double(r.alpha) << ',' << format_double(r.kappa_raw)
        << ',' << format_double(r.kappa) << ',' << r.N << ',' << r.n1 << ',' << r.n2 << ',' << r.seed
        << '\n';
  }
}

void write_stability_csv(const std::vector<StabilityRow>& rows, std::ostream& out) {
  out << "H,median_sup_gap,median_stat_gap,reps,T,dt,seed\n";
  for (const auto& r : rows) {
    out << format_double(r.H) << ',' << format_double(r.median_sup_gap) << ','
        << format_double(r.median_stat_gap) << ',' << r.reps << ',' << format_double(r.T) << ','
        << format_double(r.dt) << ',' << r.seed << '\n';
  }
}

std::string alternatives_json(const AlternativeSet& set) {
  nlohmann::ordered_json j;
  j["delta_T"] = set.delta_T;
  j["c_star"] = set.c_star;
  j["A_prime"] = set.A_prime;
  j["eps_T"] = set.eps_T;
  auto bumps = nlohmann::ordered_json::array();
  for (const auto& b : set.bumps) {
    bumps.push_back({{"w", b.w}, {"y", b.center}, {"h", b.h}, {"amplitude", b.amplitude}});
  }
  j["bumps"] = bumps;
  j["N"] = set.bumps.size();
  return j.dump(2);
}

}  // namespace driftscan::io
