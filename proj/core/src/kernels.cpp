#include "driftscan/kernels.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "driftscan/error.hpp"

namespace driftscan {
namespace {

constexpr double kQuarticScale = 15.0 / 16.0;

void check_beta(double beta) {
  if (!(beta > 0.0) || beta > 1.0) {
    throw UnsupportedError("recovery kernels require beta in (0, 1], got " + std::to_string(beta));
  }
}

double parse_number(const std::string& text, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + text + "' in kernel spec '" + spec + "'");
  }
}

// Recovery primitive from -1 to u, u in [-1, 1].
double recovery_primitive(double u, double beta) {
  const double p = beta + 1.0;
  if (u <= 0.0) return (u + 1.0) - (1.0 - std::pow(-u, p)) / p;
  return beta / p + u - std::pow(u, p) / p;
}

}  // namespace

Kernel Kernel::optimal_recovery(double beta) {
  check_beta(beta);
  return Kernel(KernelFamily::OptimalRecovery, beta, 0.0);
}

Kernel Kernel::truncated_recovery(double beta, double horizon) {
  check_beta(beta);
  if (!(horizon > 1.0)) throw DomainError("truncated recovery kernel needs T > 1");
  return Kernel(KernelFamily::TruncatedRecovery, beta, horizon);
}

Kernel Kernel::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw ConfigError("empty kernel spec");
  if (parts[0] == "quartic" && parts.size() == 1) return quartic();
  if (parts[0] == "recovery" && parts.size() == 2) {
    return optimal_recovery(parse_number(parts[1], spec));
  }
  if (parts[0] == "trunc" && parts.size() == 3) {
    return truncated_recovery(parse_number(parts[1], spec), parse_number(parts[2], spec));
  }
  throw ConfigError("unknown kernel spec '" + spec +
                    "' (expected quartic | recovery:<beta> | trunc:<beta>:<T>)");
}

std::string Kernel::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case KernelFamily::QuarticSmooth: return "quartic";
    case KernelFamily::OptimalRecovery: os << "recovery:" << beta_; break;
    case KernelFamily::TruncatedRecovery: os << "trunc:" << beta_ << ':' << horizon_; break;
  }
  return os.str();
}

double Kernel::eval(double x) const noexcept {
  const double ax = std::abs(x);
  if (!(ax < 1.0)) return 0.0;
  switch (family_) {
    case KernelFamily::QuarticSmooth: {
      const double s = 1.0 - x * x;
      return kQuarticScale * s * s;
    }
    case KernelFamily::OptimalRecovery: return 1.0 - std::pow(ax, beta_);
    case KernelFamily::TruncatedRecovery:
      if (ax <= 1.0 / horizon_) return 1.0 - std::pow(horizon_, -beta_);
      return 1.0 - std::pow(ax, beta_);
  }
  return 0.0;
}

double Kernel::derivative(double x) const {
  if (!is_c1()) {
    throw NonDifferentiableKernelError("kernel '" + to_string() + "' is not continuously differentiable");
  }
  if (!(std::abs(x) < 1.0)) return 0.0;
  return -3.75 * x * (1.0 - x * x);
}

double Kernel::primitive(double u) const noexcept {
  if (u <= -1.0) u = -1.0;
  if (u >= 1.0) u = 1.0;
  switch (family_) {
    case KernelFamily::QuarticSmooth: {
      const double u2 = u * u;
      return kQuarticScale * u * (1.0 - u2 * (2.0 / 3.0) + u2 * u2 * 0.2) + 0.5;
    }
    case KernelFamily::OptimalRecovery: return recovery_primitive(u, beta_);
    case KernelFamily::TruncatedRecovery: {
      const double e = 1.0 / horizon_;
      const double flat = 1.0 - std::pow(horizon_, -beta_);
      if (u <= -e) return recovery_primitive(u, beta_);
      const double left = recovery_primitive(-e, beta_);
      if (u <= e) return left + flat * (u + e);
      return left + flat * 2.0 * e + (recovery_primitive(u, beta_) - recovery_primitive(e, beta_));
    }
  }
  return 0.0;
}

double Kernel::antiderivative(double y, double h, double a, double b) const noexcept {
  return h * (primitive((b - y) / h) - primitive((a - y) / h));
}

double Kernel::l2_norm_sq() const noexcept {
  switch (family_) {
    case KernelFamily::QuarticSmooth: return 5.0 / 7.0;
    case KernelFamily::OptimalRecovery:
      return 2.0 * (1.0 - 2.0 / (beta_ + 1.0) + 1.0 / (2.0 * beta_ + 1.0));
    case KernelFamily::TruncatedRecovery: {
      const double b = beta_;
      const double e = 1.0 / horizon_;
      const double full = 2.0 * (1.0 - 2.0 / (b + 1.0) + 1.0 / (2.0 * b + 1.0));
      // int_{-e}^{e} (1 - |x|^b)^2 replaced by the flat top squared.
      const double inner = 2.0 * (e - 2.0 * std::pow(e, b + 1.0) / (b + 1.0) +
                                  std::pow(e, 2.0 * b + 1.0) / (2.0 * b + 1.0));
      const double flat = 1.0 - std::pow(horizon_, -b);
      return full - inner + 2.0 * e * flat * flat;
    }
  }
  return 0.0;
}

int Kernel::breakpoints(double out[5]) const noexcept {
  switch (family_) {
    case KernelFamily::QuarticSmooth:
      out[0] = -1.0;
      out[1] = 1.0;
      return 2;
    case KernelFamily::OptimalRecovery:
      out[0] = -1.0;
      out[1] = 0.0;
      out[2] = 1.0;
      return 3;
    case KernelFamily::TruncatedRecovery:
      out[0] = -1.0;
      out[1] = -1.0 / horizon_;
      out[2] = 1.0 / horizon_;
      out[3] = 1.0;
      return 4;
  }
  return 0;
}

double correction(double r) {
  if (!(r > 0.0) || r > 1.0) {
    throw DomainError("correction requires r in (0, 1], got " + std::to_string(r));
  }
  return std::sqrt(2.0 * std::log(1.0 / r));
}

double optimal_constant(double beta, double lipschitz) {
  if (!(beta > 0.0) || beta > 1.0) {
    throw UnsupportedError("optimal constant only available for beta in (0, 1]");
  }
  if (!(lipschitz > 0.0)) throw DomainError("optimal constant needs L > 0");
  const double norm_sq = Kernel::optimal_recovery(beta).l2_norm_sq();
  return std::pow(2.0 * std::pow(lipschitz, 1.0 / beta) / ((2.0 * beta + 1.0) * norm_sq),
                  beta / (2.0 * beta + 1.0));
}

}  // namespace driftscan
