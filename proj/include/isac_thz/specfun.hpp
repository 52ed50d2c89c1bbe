#pragma once
// Special functions: exponential integral E1, complementary error function and its scaled form.

#include <cmath>
#include <limits>
#include <numbers>

#include "errors.hpp"

namespace isac_thz {

// E1(x) = int_x^inf e^-t / t dt.
// Power series below 1, continued fraction (modified Lentz) from 1 upward.
inline double exp_integral_e1(double x) {
  if (!(x > 0.0)) throw domain_error("exp_integral_e1: x must be > 0");
  if (x < 1.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
  }
  if (x > 740.0) return 0.0;
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) return h * std::exp(-x);
  }
  throw convergence_error("exp_integral_e1: continued fraction did not converge", h * std::exp(-x),
                          std::abs(h * std::exp(-x)));
}

inline double erfc(double x) { return std::erfc(x); }

// erfcx(x) = e^{x^2} erfc(x), finite for large positive x where both factors over/underflow.
inline double erfcx(double x) {
  if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 5.0) return std::exp(x * x) * std::erfc(x);
  // Laplace continued fraction, evaluated bottom-up.
  double tail = x;
  for (int k = 80; k >= 1; --k) tail = x + (0.5 * k) / tail;
  return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

}  // namespace isac_thz
