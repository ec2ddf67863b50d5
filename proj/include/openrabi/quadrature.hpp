#pragma once

// Thin wrapper over Boost's adaptive Gauss-Kronrod integration.  All
// quadratures in the library go through this single entry point so the
// rule order and depth limits are fixed project-wide.

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "openrabi/errors.hpp"

namespace openrabi {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // Boost's reported error bound
};

// Adaptive Gauss-Kronrod (15-point rule, up to `max_depth` bisection levels)
// on [a, b].  Finite endpoints only; callers clip infinite tails themselves
// using an explicit mass bound, which keeps truncation decisions visible.
template <typename F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                           unsigned max_depth = 15) {
  using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  QuadratureResult r;
  double err = 0.0;
  r.value = rule::integrate(std::forward<F>(f), a, b, max_depth, rel_tol, &err);
  r.error_estimate = err;
  return r;
}

}  // namespace openrabi
