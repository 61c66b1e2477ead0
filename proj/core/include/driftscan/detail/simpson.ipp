#pragma once

#include <cmath>

namespace driftscan {

template <class F>
double simpson(F&& f, double a, double b, double rel_tol, int max_level) {
  if (a == b) return 0.0;
  // Level n uses 2^n panels; the odd nodes of each level are the new points.
  const double fa = f(a);
  const double fb = f(b);
  double ends = fa + fb;
  double evens = 0.0;
  double odds = f(0.5 * (a + b));
  double width = b - a;
  double prev = width / 6.0 * (ends + 4.0 * odds);
  for (int level = 2; level <= max_level; ++level) {
    const long panels = 1L << level;
    const double step = width / static_cast<double>(panels);
    evens += odds;
    odds = 0.0;
    for (long i = 1; i < panels; i += 2) odds += f(a + step * static_cast<double>(i));
    const double cur = step / 3.0 * (ends + 2.0 * evens + 4.0 * odds);
    if (level >= 4 && std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
    if (cur == 0.0 && prev == 0.0 && level >= 4) return 0.0;
    prev = cur;
  }
  return prev;
}

}  // namespace driftscan
