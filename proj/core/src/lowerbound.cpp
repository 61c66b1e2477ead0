#include "driftscan/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "driftscan/error.hpp"

namespace driftscan {
namespace {

constexpr double kResidualTol = 1e-8;
constexpr int kMaxBisections = 200;
constexpr int kMaxExpansions = 5;

}  // namespace

void FixedPointProblem::validate() const {
  if (!(beta > 0.0) || beta > 1.0) throw UnsupportedError("lower bound construction needs beta in (0, 1]");
  if (!(L > 0.0)) throw ConfigError("L must be positive");
  if (!(T > std::exp(1.0))) throw ConfigError("T must exceed e");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(eta >= 0.0)) throw ConfigError("eta must be non-negative");
  if (!(R > 0.0)) throw ConfigError("R must be positive");
  if (eps_T > 1.0) throw ConfigError("eps_T must not exceed 1");
}

double FixedPointProblem::epsilon() const {
  return eps_T > 0.0 ? eps_T : std::pow(std::log(T), -0.25);
}

Kernel FixedPointProblem::bump_kernel() const {
  return beta < 1.0 ? Kernel::truncated_recovery(beta, T) : Kernel::optimal_recovery(1.0);
}

double FixedPointProblem::c_T() const {
  return std::pow(bump_kernel().at_zero(), (2.0 * beta + 1.0) / beta);
}

double FixedPointProblem::c_star() const { return optimal_constant(beta, L); }

double rate_delta(double beta, double T) {
  if (!(T > 1.0)) throw DomainError("rate_delta needs T > 1");
  return std::pow(std::log(T) / T, beta / (2.0 * beta + 1.0));
}

double bandwidth_h(double w, const FixedPointProblem& p) {
  if (!(w > 0.0)) throw DomainError("bandwidth_h needs w > 0");
  return std::pow(p.c_star() / p.L, 1.0 / p.beta) *
         std::pow(p.sigma * p.sigma * std::log(p.T) / (p.T * w), 1.0 / (2.0 * p.beta + 1.0));
}

double smallest_fitting_w(const FixedPointProblem& p) {
  const double room = p.A() - p.y;
  if (!(room > 0.0)) throw PlacementError("anchor lies at or beyond A");
  const double scale = std::pow(p.c_star() / p.L, 1.0 / p.beta) * 2.0 * p.R / room;
  return p.sigma * p.sigma * std::log(p.T) / p.T * std::pow(scale, 2.0 * p.beta + 1.0);
}

DriftSpec alternative_drift(double w, const FixedPointProblem& p) {
  const double h = bandwidth_h(w, p);
  const double center = p.y + p.R * h;
  const double A = p.A();
  constexpr double tol = 1e-12;
  if (center - h < -A - tol || center + h > A + tol) {
    throw PlacementError("bump [" + std::to_string(center - h) + ", " + std::to_string(center + h) +
                         "] leaves [-A, A]");
  }
  const double amplitude = p.L * (1.0 - p.epsilon()) * std::pow(h, p.beta);
  DriftSpec base = p.eta != 0.0 ? p.b0.with_offset(p.eta) : p.b0;
  if (amplitude == 0.0) return base;
  return base.with_bump({amplitude, center, h, p.bump_kernel()});
}

FixedPointSolution solve_fixed_point(const FixedPointProblem& p) {
  p.validate();
  const double cT = p.c_T();
  std::map<double, double> cache;
  const auto g = [&](double w) {
    if (auto it = cache.find(w); it != cache.end()) return it->second;
    const double h = bandwidth_h(w, p);
    const InvariantDensity q(alternative_drift(w, p));
    const double value = cT * q(p.y + p.R * h) - w;
    cache.emplace(w, value);
    return value;
  };

  const DriftSpec shifted = p.eta != 0.0 ? p.b0.with_offset(p.eta) : p.b0;
  const auto bounds = class_bounds(shifted.params());
  const double w_fit = smallest_fitting_w(p);
  double lo = std::max(cT * bounds.lower, w_fit);
  double hi = cT * bounds.upper;
  if (!(lo < hi)) {
    throw PlacementError("no admissible bump: the smallest fitting w exceeds c_T L^*");
  }
  double g_lo = g(lo);
  double g_hi = g(hi);
  for (int e = 0; e < kMaxExpansions && g_lo * g_hi > 0.0; ++e) {
    lo = std::max(lo * 0.8, w_fit);
    hi *= 1.2;
    g_lo = g(lo);
    g_hi = g(hi);
  }
  if (g_lo * g_hi > 0.0) {
    if (lo == w_fit && g_lo < 0.0) {
      throw PlacementError("the fixed point needs a bump wider than the room left before A");
    }
    throw NoFixedPointError(lo, g_lo, hi, g_hi);
  }

  FixedPointSolution sol;
  const bool lo_closer = std::abs(g_lo) <= std::abs(g_hi);
  double w = lo_closer ? lo : hi;
  double gw = lo_closer ? g_lo : g_hi;
  int it = 0;
  while (std::abs(gw) > kResidualTol && it < kMaxBisections) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    ++it;
    w = mid;
    gw = g_mid;
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
      g_hi = g_mid;
    }
  }
  if (std::abs(gw) > kResidualTol) throw NoFixedPointError(lo, g_lo, hi, g_hi);
  sol.w = w;
  sol.h = bandwidth_h(w, p);
  sol.center = p.y + p.R * sol.h;
  sol.amplitude = p.L * (1.0 - p.epsilon()) * std::pow(sol.h, p.beta);
  sol.residual = gw;
  sol.iterations = it;
  sol.drift = alternative_drift(w, p);
  return sol;
}

double bump_count_bound(const FixedPointProblem& p) {
  const DriftSpec shifted = p.eta != 0.0 ? p.b0.with_offset(p.eta) : p.b0;
  const double upper = class_bounds(shifted.params()).upper;
  const double e = 1.0 / (2.0 * p.beta + 1.0);
  return p.A() / p.R * std::pow(upper / (p.sigma * p.sigma), e) *
         std::pow(p.L / p.c_star(), 1.0 / p.beta) * std::pow(p.T / std::log(p.T), e);
}

AlternativeSet build_alternatives(const FixedPointProblem& problem) {
  problem.validate();
  AlternativeSet set;
  set.delta_T = rate_delta(problem.beta, problem.T);
  set.c_star = problem.c_star();
  set.eps_T = problem.epsilon();

  const DriftSpec shifted = problem.eta != 0.0 ? problem.b0.with_offset(problem.eta) : problem.b0;
  const double A = problem.A();
  const InvariantDensity q0(shifted);
  double q_min = q0(-A);
  for (int i = 0; i <= 2000; ++i) q_min = std::min(q_min, q0(-A + 2.0 * A * i / 2000.0));
  const double floor_w = problem.c_T() * std::max(class_bounds(shifted.params()).lower, 0.5 * q_min);
  set.A_prime = A - bandwidth_h(floor_w, problem);
  if (!(set.A_prime > 0.0)) {
    throw PlacementError("the horizon is too short: no room for bumps inside [-A', A']");
  }

  FixedPointProblem p = problem;
  p.y = -set.A_prime;
  constexpr double tol = 1e-12;
  for (;;) {
    FixedPointSolution sol;
    try {
      sol = solve_fixed_point(p);
    } catch (const PlacementError&) {
      break;
    }
    if (sol.center + problem.R * sol.h > set.A_prime + tol) break;
    p.y = sol.center + problem.R * sol.h;
    set.bumps.push_back(std::move(sol));
  }
  return set;
}

double delta_distance(const DriftSpec& b, const DriftSpec& b0, double eta, double beta, double sigma,
                      Interval J, double grid_step, double anchor) {
  if (!(grid_step > 0.0)) throw DomainError("grid step must be positive");
  if (!(J.hi >= J.lo)) throw DomainError("interval must satisfy lo <= hi");
  const InvariantDensity q(b);
  const double expo = beta / (2.0 * beta + 1.0);
  const double s2 = sigma * sigma;
  const auto k_first = static_cast<long long>(std::ceil((J.lo - anchor) / grid_step - 1e-9));
  const auto k_last = static_cast<long long>(std::floor((J.hi - anchor) / grid_step + 1e-9));
  double best = 0.0;
  for (long long k = k_first; k <= k_last; ++k) {
    const double x = anchor + static_cast<double>(k) * grid_step;
    const double bx = b.eval(x);
    const double b0x = b0.eval(x);
    const double excess = std::abs(bx - b0x) - eta;
    const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(bx) + std::abs(b0x) + eta);
    if (excess <= rounding) continue;
    best = std::max(best, excess * std::pow(q(x) / s2, expo));
  }
  return best;
}

double delta_distance(const DriftSpec& b, const DriftSpec& b0, double eta, double beta, double sigma,
                      Interval J, double grid_step) {
  return delta_distance(b, b0, eta, beta, sigma, J, grid_step, J.lo);
}

}  // namespace driftscan
