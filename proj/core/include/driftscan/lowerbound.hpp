#pragma once

#include <vector>

#include "driftscan/kernels.hpp"
#include "driftscan/sde.hpp"

namespace driftscan {

struct FixedPointProblem {
  double beta = 1.0;
  double L = 1.0;
  double T = 1e4;
  double sigma = 1.0;
  double eta = 0.0;
  DriftSpec b0 = DriftSpec::linear(-1.0);
  /// Left end of the bump support; the bump is centred at y + R h.
  double y = 0.0;
  double R = 1.0;
  /// Non-positive means the default (log T)^(-1/4).
  double eps_T = 0.0;

  void validate() const;
  double epsilon() const;
  /// Truncated recovery kernel for beta < 1, recovery kernel for beta = 1.
  Kernel bump_kernel() const;
  /// K_T(0)^((2 beta + 1) / beta).
  double c_T() const;
  double c_star() const;
  double A() const noexcept { return b0.params().A; }
};

double rate_delta(double beta, double T);
double bandwidth_h(double w, const FixedPointProblem& problem);
/// Smallest w whose bump [y, y + 2 R h(w)] still ends inside [-A, A].
double smallest_fitting_w(const FixedPointProblem& problem);

/// b0 + eta + L (1 - eps_T) h^beta K_T((x - y^w) / h) with y^w = y + R h.
DriftSpec alternative_drift(double w, const FixedPointProblem& problem);

struct FixedPointSolution {
  double w = 0.0;
  double h = 0.0;
  double center = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;
  int iterations = 0;
  DriftSpec drift = DriftSpec::linear(-1.0);
};

/// Bisection on g(w) = c_T q_{b^w}(y^w) - w until |g| <= 1e-8.
FixedPointSolution solve_fixed_point(const FixedPointProblem& problem);

struct AlternativeSet {
  std::vector<FixedPointSolution> bumps;
  double delta_T = 0.0;
  double c_star = 0.0;
  double A_prime = 0.0;
  double eps_T = 0.0;
};

/// Packs disjoint bumps from -A' rightwards until the next support would leave [-A', A'].
AlternativeSet build_alternatives(const FixedPointProblem& problem);

/// Upper bound on the number of bumps, (A/R)(L^*/sigma^2)^(1/(2b+1))(L/c*)^(1/b)(T/log T)^(1/(2b+1)).
double bump_count_bound(const FixedPointProblem& problem);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Grid maximum over J of max(|b - b0| - eta, 0) (q_b / sigma^2)^(beta / (2 beta + 1)).
/// The grid is anchor + k step, restricted to J; by default anchored at J.lo.
double delta_distance(const DriftSpec& b, const DriftSpec& b0, double eta, double beta, double sigma,
                      Interval J, double grid_step);
double delta_distance(const DriftSpec& b, const DriftSpec& b0, double eta, double beta, double sigma,
                      Interval J, double grid_step, double anchor);

}  // namespace driftscan
