#pragma once

#include <cmath>
#include <utility>

namespace anisoac::detail {

// Golden-section search for a maximum of a unimodal f on [lo, hi].
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iterations) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iterations) {
  auto r = golden_max([&](double t) { return -f(t); }, lo, hi, iterations);
  return {r.first, -r.second};
}

}  // namespace anisoac::detail
