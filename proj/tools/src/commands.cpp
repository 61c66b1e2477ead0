#include "driftscan_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <driftscan/error.hpp>
#include <driftscan/io.hpp>
#include <driftscan/parallel.hpp>
#include <driftscan/rng.hpp>

namespace driftscan::cli {

namespace {

std::string strip_prefix(const std::string& spec, const std::string& prefix) {
  return spec.substr(prefix.size());
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number in " + what + ": '" + text + "'");
  }
}

QuantileConfig quantile_config(const ModelOptions& model, double eta, std::vector<double> alphas,
                               std::size_t N, int n1, int n2, std::uint64_t seed,
                               unsigned workers) {
  QuantileConfig q;
  q.b0 = parse_drift(model.b0, model.params());
  q.A = model.A;
  q.sigma = model.sigma;
  q.eta = eta;
  q.alphas = std::move(alphas);
  q.N = N;
  q.n1 = n1;
  q.n2 = n2;
  q.master_seed = seed;
  q.workers = workers;
  return q;
}

SamplePath simulate_or_read(const std::string& path_file, const std::string& drift,
                            const ModelOptions& model, double T, double dt, double x0,
                            std::uint64_t seed) {
  if (!path_file.empty()) return io::read_path(path_file);
  return simulate_em(parse_drift(drift, model.params()), x0, T, dt, seed);
}

bool intersects(const GridPoint& p, const std::array<double, 2>& region) {
  return p.y - p.h <= region[1] && p.y + p.h >= region[0];
}

void write_power_csv(const std::vector<PowerRow>& rows, std::ostream& out) {
  out << "eta,alpha,kappa,global,region_left,region_centre,region_right,reps\n";
  for (const auto& r : rows) {
    out << io::format_double(r.eta) << ',' << io::format_double(r.alpha) << ','
        << io::format_double(r.kappa) << ',' << io::format_double(r.global);
    for (double v : r.regional) out << ',' << io::format_double(v);
    out << ',' << r.reps << '\n';
  }
}

void write_fbm_check_csv(const std::vector<FbmCheckRow>& rows, std::ostream& out) {
  out << "H,t,s,exact,table,empirical,std_error\n";
  for (const auto& r : rows) {
    out << io::format_double(r.H) << ',' << io::format_double(r.t) << ','
        << io::format_double(r.s) << ',' << io::format_double(r.exact) << ','
        << io::format_double(r.table) << ',' << io::format_double(r.empirical) << ','
        << io::format_double(r.std_error) << '\n';
  }
}

}  // namespace

DriftSpec parse_drift(const std::string& spec, const ClassParams& params) {
  if (spec == "ou") return DriftSpec::linear(-1.0, params).with_name("ou");
  if (spec == "b_alt") return DriftSpec::b_alt(params);
  if (spec.rfind("linear:", 0) == 0) {
    return DriftSpec::linear(parse_number(strip_prefix(spec, "linear:"), "drift"), params)
        .with_name(spec);
  }
  if (spec.rfind("file:", 0) == 0) {
    const std::string file = strip_prefix(spec, "file:");
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open drift file '" + file + "'");
    return io::read_drift_csv(in, params).with_name(spec);
  }
  throw ConfigError("unknown drift '" + spec + "' (expected ou, linear:<slope>, b_alt or file:<path>)");
}

TestConfig make_test_config(const ModelOptions& model, const GridOptions& grid, double eta,
                            double alpha, unsigned workers) {
  TestConfig c;
  c.A = model.A;
  c.sigma = model.sigma;
  c.eta = eta;
  c.alpha = alpha;
  c.b0 = parse_drift(model.b0, model.params());
  c.kernel = Kernel::parse(grid.kernel);
  c.y_step = grid.y_step;
  c.h_step = grid.h_step;
  c.h_min = grid.h_min;
  c.side = parse_side(grid.side);
  c.workers = workers;
  return c;
}

std::vector<QuantileRow> cmd_quantiles(const QuantilesOptions& options, const CommonOptions& common) {
  std::vector<QuantileRow> rows;
  for (double eta : options.etas) {
    const auto q = quantile_config(options.model, eta, options.alphas, options.N, options.n1,
                                   options.n2, common.seed, common.workers);
    for (auto& r : kappa_similarity(q).rows) rows.push_back(r);
  }
  return rows;
}

DetectionResult cmd_test(const TestOptions& options, const CommonOptions& common) {
  const SamplePath path = simulate_or_read(options.path_file, options.drift, options.model,
                                           options.T, options.dt, options.x0, common.seed);
  const TestConfig config =
      make_test_config(options.model, options.grid, options.eta, options.alpha, common.workers);
  double kappa = 0.0;
  if (options.kappa) {
    kappa = *options.kappa;
  } else {
    const auto q = quantile_config(options.model, options.eta, {options.alpha}, options.N,
                                   options.n1, options.n2, common.seed, common.workers);
    kappa = kappa_similarity(q).rows.front().kappa;
  }
  return decide(path, config, kappa);
}

std::vector<PowerRow> cmd_power_table(const PowerOptions& options, const CommonOptions& common) {
  if (options.reps == 0) throw ConfigError("reps must be positive");
  const DriftSpec drift = parse_drift(options.drift, options.model.params());
  const TestConfig base = make_test_config(options.model, options.grid, 0.0, 0.05, 1);

  std::vector<StatisticResult> stats(options.reps);
  parallel_for(options.reps, common.workers, [&](std::size_t r) {
    const SamplePath path =
        simulate_em(drift, options.x0, options.T, options.dt, derive_seed(common.seed, r));
    stats[r] = test_statistic(path, base);
  });

  std::vector<PowerRow> rows;
  for (double eta : options.etas) {
    const auto q = quantile_config(options.model, eta, options.alphas, options.N, options.n1,
                                   options.n2, common.seed, common.workers);
    const auto table = kappa_similarity(q);
    for (const auto& qr : table.rows) {
      PowerRow row;
      row.eta = eta;
      row.alpha = qr.alpha;
      row.kappa = qr.kappa;
      row.reps = options.reps;
      for (const auto& s : stats) {
        if (s.statistic > qr.kappa) row.global += 1.0;
        const auto minimal = minimal_intervals(detections(s.points, qr.kappa));
        for (std::size_t k = 0; k < kPowerRegions.size(); ++k) {
          if (std::any_of(minimal.begin(), minimal.end(),
                          [&](const GridPoint& p) { return intersects(p, kPowerRegions[k]); })) {
            row.regional[k] += 1.0;
          }
        }
      }
      const double n = static_cast<double>(options.reps);
      row.global /= n;
      for (double& v : row.regional) v /= n;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<FbmCheckRow> cmd_fbm_check(const FbmCheckOptions& options, const CommonOptions& common) {
  if (options.reps < 2) throw ConfigError("reps must be at least 2");
  if (options.n == 0) throw ConfigError("n must be positive");
  if (!(options.T > 0.0)) throw ConfigError("T must be positive");
  const double dt = options.T / static_cast<double>(options.n);

  std::vector<std::size_t> idx;
  for (double t : options.times) {
    if (!(t > 0.0 && t <= options.T)) throw ConfigError("check times must lie in (0, T]");
    idx.push_back(static_cast<std::size_t>(std::llround(t / dt)));
  }

  std::vector<FbmCheckRow> rows;
  for (double H : options.hursts) {
    const HurstKernelTable table(H, options.n, dt);
    std::vector<std::vector<double>> samples(options.reps);
    parallel_for(options.reps, common.workers, [&](std::size_t r) {
      const SamplePath p = simulate_fbm(table, derive_seed(common.seed, r));
      samples[r].reserve(idx.size());
      for (std::size_t i : idx) samples[r].push_back(p.values[i]);
    });
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a; b < idx.size(); ++b) {
        FbmCheckRow row;
        row.H = H;
        row.t = static_cast<double>(idx[a]) * dt;
        row.s = static_cast<double>(idx[b]) * dt;
        row.exact = fbm_covariance(H, row.t, row.s);
        const std::size_t m = std::min(idx[a], idx[b]);
        for (std::size_t j = 0; j < m; ++j) {
          row.table += table.weight(idx[a], j) * table.weight(idx[b], j) / dt;
        }
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const auto& s : samples) {
          const double prod = s[a] * s[b];
          sum += prod;
          sum_sq += prod * prod;
        }
        const double n = static_cast<double>(options.reps);
        row.empirical = sum / n;
        const double var = std::max(0.0, (sum_sq - n * row.empirical * row.empirical) / (n - 1.0));
        row.std_error = std::sqrt(var / n);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<StabilityRow> cmd_stability(const StabilityOptions& options, const CommonOptions& common) {
  StabilityConfig config;
  config.test = make_test_config(options.model, options.grid, options.eta, 0.05, 1);
  config.x0 = options.x0;
  config.master_seed = common.seed;
  config.workers = common.workers;
  return stability_experiment(parse_drift(options.drift, options.model.params()), options.T,
                              options.dt, options.hursts, options.reps, config);
}

AlternativeSet cmd_lower_bound(const LowerBoundOptions& options, const CommonOptions&) {
  FixedPointProblem p;
  p.beta = options.beta;
  p.L = options.L;
  p.T = options.T;
  p.sigma = options.model.sigma;
  p.eta = options.eta;
  p.b0 = parse_drift(options.model.b0, options.model.params());
  p.eps_T = options.eps;
  return build_alternatives(p);
}

SamplePath cmd_simulate(const SimulateOptions& options, const CommonOptions& common) {
  const DriftSpec drift = parse_drift(options.drift, options.model.params());
  const double x0 = options.stationary ? sample_stationary(drift, derive_seed(common.seed, 1))
                                       : options.x0;
  if (options.hurst == 0.5) return simulate_em(drift, x0, options.T, options.dt, common.seed);
  return simulate_fractional_sde(drift, options.hurst, x0, options.T, options.dt, common.seed);
}

namespace {

void add_model(CLI::App& app, ModelOptions& m) {
  app.add_option("--A", m.A, "Half-width of the test window")->capture_default_str();
  app.add_option("--sigma", m.sigma, "Diffusion coefficient")->capture_default_str();
  app.add_option("--C", m.C, "Drift class growth constant")->capture_default_str();
  app.add_option("--gamma", m.gamma, "Drift class confinement constant")->capture_default_str();
  app.add_option("--b0", m.b0, "Reference drift (ou, linear:<slope>, b_alt, file:<csv>)")
      ->capture_default_str();
}

void add_grid(CLI::App& app, GridOptions& g) {
  app.add_option("--y-step", g.y_step, "Grid step in location (0 = 1/sqrt(T))")->capture_default_str();
  app.add_option("--h-step", g.h_step, "Grid step in bandwidth (0 = 1/sqrt(T))")->capture_default_str();
  app.add_option("--h-min", g.h_min, "Smallest bandwidth (0 = automatic)")->capture_default_str();
  app.add_option("--kernel", g.kernel, "Test kernel (quartic, recovery:<beta>, trunc:<beta>:<T>)")
      ->capture_default_str();
  app.add_option("--side", g.side, "two-sided, greater or less")->capture_default_str();
}

void add_sampler(CLI::App& app, std::size_t& N, int& n1, int& n2) {
  app.add_option("--N", N, "Monte Carlo replications for the quantiles")->capture_default_str();
  app.add_option("--n1", n1, "Window grid resolution")->capture_default_str();
  app.add_option("--n2", n2, "Spatial grid resolution")->capture_default_str();
}

void write_run_config(const CLI::App& app, const std::filesystem::path& dir) {
  auto out = io::open_output(dir / "run_config.ini");
  out << app.config_to_str(true, false);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiscale similarity test for the drift of an ergodic diffusion", "driftscan"};
  app.set_config("--config", "", "INI configuration file; command-line flags take precedence");
  app.require_subcommand(1);

  CommonOptions common;
  common.workers = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--seed", common.seed, "Master seed")->capture_default_str();
  app.add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--out", common.out, "Output directory")->capture_default_str();

  QuantilesOptions quantiles;
  auto* sq = app.add_subcommand("quantiles", "Tabulate critical values of the limit statistic");
  add_model(*sq, quantiles.model);
  sq->add_option("--etas", quantiles.etas, "Similarity radii")->delimiter(',')->capture_default_str();
  sq->add_option("--alphas", quantiles.alphas, "Significance levels")->delimiter(',')->capture_default_str();
  add_sampler(*sq, quantiles.N, quantiles.n1, quantiles.n2);

  TestOptions test;
  auto* st = app.add_subcommand("test", "Run the multiscale test on one path");
  add_model(*st, test.model);
  add_grid(*st, test.grid);
  st->add_option("--path", test.path_file, "Observed path (CSV or binary); simulated if omitted");
  st->add_option("--drift", test.drift, "Drift used when simulating")->capture_default_str();
  st->add_option("--T", test.T, "Horizon when simulating")->capture_default_str();
  st->add_option("--dt", test.dt, "Step when simulating")->capture_default_str();
  st->add_option("--x0", test.x0, "Start when simulating")->capture_default_str();
  st->add_option("--eta", test.eta, "Similarity radius")->capture_default_str();
  st->add_option("--alpha", test.alpha, "Significance level")->capture_default_str();
  st->add_option("--kappa", test.kappa, "Critical value (skips the quantile simulation)");
  add_sampler(*st, test.N, test.n1, test.n2);

  PowerOptions power;
  auto* sp = app.add_subcommand("power-table", "Estimate global and regional rejection rates");
  add_model(*sp, power.model);
  add_grid(*sp, power.grid);
  sp->add_option("--drift", power.drift, "Drift generating the paths")->capture_default_str();
  sp->add_option("--T", power.T, "Horizon")->capture_default_str();
  sp->add_option("--dt", power.dt, "Euler step")->capture_default_str();
  sp->add_option("--x0", power.x0, "Start value")->capture_default_str();
  sp->add_option("--reps", power.reps, "Simulated paths")->capture_default_str();
  sp->add_option("--etas", power.etas, "Similarity radii")->delimiter(',')->capture_default_str();
  sp->add_option("--alphas", power.alphas, "Significance levels")->delimiter(',')->capture_default_str();
  add_sampler(*sp, power.N, power.n1, power.n2);

  FbmCheckOptions fbm;
  auto* sf = app.add_subcommand("fbm-check", "Compare simulated fBM covariances with the exact ones");
  sf->add_option("--hursts", fbm.hursts, "Hurst indices")->delimiter(',')->capture_default_str();
  sf->add_option("--reps", fbm.reps, "Simulated paths")->capture_default_str();
  sf->add_option("--n", fbm.n, "Time steps")->capture_default_str();
  sf->add_option("--T", fbm.T, "Horizon")->capture_default_str();
  sf->add_option("--times", fbm.times, "Check times")->delimiter(',')->capture_default_str();

  StabilityOptions stab;
  auto* ss = app.add_subcommand("stability", "Sensitivity of the statistic to the Hurst index");
  add_model(*ss, stab.model);
  add_grid(*ss, stab.grid);
  ss->add_option("--drift", stab.drift, "Drift generating the paths")->capture_default_str();
  ss->add_option("--hursts", stab.hursts, "Hurst indices (must include 0.5)")->delimiter(',')
      ->capture_default_str();
  ss->add_option("--reps", stab.reps, "Paths per Hurst index")->capture_default_str();
  ss->add_option("--T", stab.T, "Horizon")->capture_default_str();
  ss->add_option("--dt", stab.dt, "Step")->capture_default_str();
  ss->add_option("--x0", stab.x0, "Start value")->capture_default_str();
  ss->add_option("--eta", stab.eta, "Similarity radius")->capture_default_str();

  LowerBoundOptions lb;
  auto* sl = app.add_subcommand("lower-bound", "Construct the least favourable alternatives");
  add_model(*sl, lb.model);
  sl->add_option("--beta", lb.beta, "Hoelder smoothness in (0, 1]")->capture_default_str();
  sl->add_option("--L", lb.L, "Hoelder constant")->capture_default_str();
  sl->add_option("--T", lb.T, "Horizon")->capture_default_str();
  sl->add_option("--eta", lb.eta, "Similarity radius")->capture_default_str();
  sl->add_option("--eps", lb.eps, "Bump margin (0 = (log T)^(-1/4))")->capture_default_str();
  sl->add_flag("--export-drifts", lb.export_drifts, "Write each alternative drift as CSV");

  SimulateOptions sim;
  auto* sm = app.add_subcommand("simulate", "Simulate a path");
  add_model(*sm, sim.model);
  sm->add_option("--drift", sim.drift, "Drift")->capture_default_str();
  sm->add_option("--T", sim.T, "Horizon")->capture_default_str();
  sm->add_option("--dt", sim.dt, "Step")->capture_default_str();
  sm->add_option("--x0", sim.x0, "Start value")->capture_default_str();
  sm->add_flag("--stationary", sim.stationary, "Draw the start from the invariant density");
  sm->add_option("--hurst", sim.hurst, "Hurst index of the driving noise")->capture_default_str();
  sm->add_option("--format", sim.format, "csv or binary")
      ->check(CLI::IsMember({"csv", "binary"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto& dir = common.out;
    if (sq->parsed()) {
      const auto rows = cmd_quantiles(quantiles, common);
      auto f = io::open_output(dir / "quantiles.csv");
      io::write_quantiles_csv(rows, f);
    } else if (st->parsed()) {
      const auto result = cmd_test(test, common);
      io::open_output(dir / "detection.json") << io::detection_json(result) << '\n';
      auto f = io::open_output(dir / "scores.csv");
      io::write_scores_csv(result.per_point, f);
      out << "statistic " << io::format_double(result.statistic) << " kappa "
          << io::format_double(result.kappa) << (result.reject ? " reject\n" : " accept\n");
    } else if (sp->parsed()) {
      const auto rows = cmd_power_table(power, common);
      auto f = io::open_output(dir / "power.csv");
      write_power_csv(rows, f);
    } else if (sf->parsed()) {
      const auto rows = cmd_fbm_check(fbm, common);
      auto f = io::open_output(dir / "fbm_check.csv");
      write_fbm_check_csv(rows, f);
    } else if (ss->parsed()) {
      const auto rows = cmd_stability(stab, common);
      auto f = io::open_output(dir / "stability.csv");
      io::write_stability_csv(rows, f);
    } else if (sl->parsed()) {
      const auto set = cmd_lower_bound(lb, common);
      io::open_output(dir / "alternatives.json") << io::alternatives_json(set) << '\n';
      if (lb.export_drifts) {
        std::vector<double> grid;
        const double A = lb.model.A;
        for (int i = 0; i <= 2000; ++i) grid.push_back(-A + 2.0 * A * i / 2000.0);
        for (std::size_t k = 0; k < set.bumps.size(); ++k) {
          auto f = io::open_output(dir / ("alternative_" + std::to_string(k) + ".csv"));
          io::write_drift_csv(set.bumps[k].drift, grid, f);
        }
      }
      out << set.bumps.size() << " alternatives\n";
    } else if (sm->parsed()) {
      const auto path = cmd_simulate(sim, common);
      if (sim.format == "binary") {
        io::write_path_binary(path, dir / "path.bin");
      } else {
        io::write_path_csv(path, dir / "path.csv");
      }
    }
    write_run_config(app, dir);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace driftscan::cli
