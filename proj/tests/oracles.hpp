#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numerical routines; each helper is an independent route to a value.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Dense polynomial with naive O(n^2) arithmetic, truncated at `order`.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& a, const Poly& b, std::size_t order) {
  Poly out(order + 1, 0.0);
  for (std::size_t i = 0; i < a.size() && i <= order; ++i) {
    for (std::size_t j = 0; j < b.size() && i + j <= order; ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

/// outer(inner(x)) by summing powers of inner explicitly.
inline Poly poly_compose(const Poly& outer, const Poly& inner, std::size_t order) {
  Poly out(order + 1, 0.0);
  Poly power(order + 1, 0.0);
  power[0] = 1.0;
  for (std::size_t k = 0; k < outer.size(); ++k) {
    for (std::size_t i = 0; i <= order; ++i) out[i] += outer[k] * power[i];
    power = poly_mul(power, inner, order);
  }
  return out;
}

inline Poly poly_derive(const Poly& a) {
  Poly out(a.size() > 1 ? a.size() - 1 : 1, 0.0);
  for (std::size_t i = 1; i < a.size(); ++i) out[i - 1] = static_cast<double>(i) * a[i];
  return out;
}

/// Coefficients of Phi'(x) f(x) - f(Phi(x)) through `order`.
inline Poly julia_series_residual(const Poly& phi, const Poly& f, std::size_t order) {
  const Poly lhs = poly_mul(poly_derive(phi), f, order);
  const Poly rhs = poly_compose(f, phi, order);
  Poly out(order + 1);
  for (std::size_t i = 0; i <= order; ++i) out[i] = lhs[i] - rhs[i];
  return out;
}

/// Plain bisection on a sign change, independent of the library's solvers.
inline double bisect(const std::function<double(double)>& f, double a, double b,
                     int iterations = 200) {
  double fa = f(a);
  for (int i = 0; i < iterations; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace oracle
