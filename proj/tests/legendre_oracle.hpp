#pragma once

#include <cmath>

namespace oracle {

// sup over c > 0 of a c - ln E[exp(c X)] for a two-point X, by golden-section
// search on the concave objective.
inline double legendre_two_point(double x0, double p0, double x1, double a,
                                 double c_hi = 60.0) {
  auto f = [&](double c) {
    const double m = std::max(c * x0, c * x1);
    const double lmgf =
        m + std::log(p0 * std::exp(c * x0 - m) + (1 - p0) * std::exp(c * x1 - m));
    return a * c - lmgf;
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = c_hi;
  double c1 = hi - g * (hi - lo), c2 = lo + g * (hi - lo);
  double f1 = f(c1), f2 = f(c2);
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + g * (hi - lo);
      f2 = f(c2);
    } else {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - g * (hi - lo);
      f1 = f(c1);
    }
  }
  return f(0.5 * (lo + hi));
}

// Rate of the pooled bit fraction exceeding 1 - q + q/2: X = q - 1 w.p. q,
// X = q otherwise, threshold q / 2.
inline double upsilon1_numeric(double q) {
  return legendre_two_point(q - 1.0, q, q, 0.5 * q);
}

// Rate of falling below 1 - q - (1 - q)/2: Y = 1 - q w.p. q, Y = -q
// otherwise, threshold (1 - q) / 2.
inline double upsilon2_numeric(double q) {
  return legendre_two_point(1.0 - q, q, -q, 0.5 * (1.0 - q));
}

}  // namespace oracle
