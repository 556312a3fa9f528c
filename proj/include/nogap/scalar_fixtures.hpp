#pragma once

#include "nogap/piecewise_convex.hpp"

namespace nogap {

// g(u) = alpha |u| + indicator of [ua, ub], with ua < 0 < ub.
PiecewiseConvexFn bang_off_bang_g(double alpha = 0.5, double ua = -1.0, double ub = 1.0);

// Convex envelope of (alpha/2) u^2 + beta |u|_0 + indicator of [-gamma, gamma].
PiecewiseConvexFn l0_envelope_g(double alpha = 2.0, double beta = 1.0, double gamma = 2.0);

// C^1 function with j'' = 1/n on (1/n, 1/n + 2^-n) for 2 <= n <= terms and j'' = 1 elsewhere.
PiecewiseConvexFn oscillating_curvature_fn(int terms);

}  // namespace nogap
