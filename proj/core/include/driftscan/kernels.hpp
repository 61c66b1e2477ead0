#pragma once

#include <string>

namespace driftscan {

enum class KernelFamily {
  QuarticSmooth,      // 15/16 (1 - x^2)^2 on [-1, 1]
  OptimalRecovery,    // 1 - |x|^beta on [-1, 1], beta in (0, 1]
  TruncatedRecovery,  // recovery kernel with a flat top 1 - T^-beta on |x| <= 1/T
};

/// A kernel supported on [-1, 1] with sup-norm at most one.
///
/// Values are exact closed forms. Every kernel vanishes at |x| = 1 and outside
/// the support, and is non-negative everywhere.
class Kernel {
public:
  static Kernel quartic() noexcept { return Kernel(KernelFamily::QuarticSmooth, 0.0, 0.0); }
  static Kernel optimal_recovery(double beta);
  static Kernel truncated_recovery(double beta, double horizon);

  /// Parses "quartic", "recovery:<beta>" or "trunc:<beta>:<T>".
  static Kernel parse(const std::string& spec);
  std::string to_string() const;

  KernelFamily family() const noexcept { return family_; }
  double beta() const noexcept { return beta_; }
  double horizon() const noexcept { return horizon_; }
  bool is_c1() const noexcept { return family_ == KernelFamily::QuarticSmooth; }

  double eval(double x) const noexcept;
  /// Throws NonDifferentiableKernelError unless the kernel is C^1.
  double derivative(double x) const;
  /// K((x - y) / h).
  double rescaled(double y, double h, double x) const noexcept { return eval((x - y) / h); }

  /// Primitive on the unit scale, clipped to the support: int_{-1}^{clamp(u)} K.
  double primitive(double u) const noexcept;
  /// int_a^b K((z - y) / h) dz, antisymmetric in (a, b).
  double antiderivative(double y, double h, double a, double b) const noexcept;

  double integral() const noexcept { return primitive(1.0); }
  double l2_norm_sq() const noexcept;
  double at_zero() const noexcept { return eval(0.0); }

  /// End points of the pieces on which the kernel is smooth (unit scale).
  /// Used to split quadratures.
  int breakpoints(double out[5]) const noexcept;

  friend bool operator==(const Kernel&, const Kernel&) = default;

private:
  Kernel(KernelFamily f, double beta, double horizon) noexcept
      : family_(f), beta_(beta), horizon_(horizon) {}

  KernelFamily family_;
  double beta_;
  double horizon_;
};

/// sqrt(2 log(1/r)) for r in (0, 1].
double correction(double r);

/// c*(beta, L) for the optimal recovery kernel, beta in (0, 1].
double optimal_constant(double beta, double lipschitz);

}  // namespace driftscan
