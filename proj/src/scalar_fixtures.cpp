#include "nogap/scalar_fixtures.hpp"

#include <cmath>
#include <stdexcept>

namespace nogap {

PiecewiseConvexFn bang_off_bang_g(double alpha, double ua, double ub) {
  if (!(alpha > 0.0) || !(ua < 0.0) || !(ub > 0.0))
    throw std::invalid_argument("bang_off_bang_g: need alpha > 0 and ua < 0 < ub");
  return PiecewiseConvexFn({}, {Quadratic{}}, {Kink{0.0, alpha}}, Interval{ua, ub});
}

PiecewiseConvexFn l0_envelope_g(double alpha, double beta, double gamma) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("l0_envelope_g: need alpha, beta > 0");
  const double s = std::sqrt(2.0 * beta / alpha);
  const double c = std::sqrt(2.0 * alpha * beta);
  if (!(gamma > s)) throw std::invalid_argument("l0_envelope_g: need gamma > sqrt(2 beta/alpha)");
  return PiecewiseConvexFn({-s, s},
                           {Quadratic{0.5 * alpha, c, beta}, Quadratic{},
                            Quadratic{0.5 * alpha, -c, beta}},
                           {Kink{0.0, c}}, Interval{-gamma, gamma});
}

PiecewiseConvexFn oscillating_curvature_fn(int terms) {
  if (terms < 2) throw std::invalid_argument("oscillating_curvature_fn: need terms >= 2");
  // Curvature intervals in increasing order of abscissa: n = terms, ..., 2.
  std::vector<double> breaks;
  std::vector<double> curvature;
  curvature.push_back(1.0);
  for (int n = terms; n >= 2; --n) {
    const double a = 1.0 / n;
    const double b = a + std::ldexp(1.0, -n);
    breaks.push_back(a);
    curvature.push_back(1.0 / n);
    breaks.push_back(b);
    curvature.push_back(1.0);
  }
  // Integrate j'' from j(0) = j'(0) = 0.
  std::vector<Quadratic> pieces;
  pieces.push_back({0.5, 0.0, 0.0});
  double x0 = 0.0, value = 0.0, slope = 0.0;
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const double x1 = breaks[k];
    const double c = curvature[k];
    value += slope * (x1 - x0) + 0.5 * c * (x1 - x0) * (x1 - x0);
    slope += c * (x1 - x0);
    x0 = x1;
    const double cn = curvature[k + 1];
    // p w^2 + q w + r with value and slope matching at x0.
    const double p = 0.5 * cn;
    const double q = slope - 2.0 * p * x0;
    pieces.push_back({p, q, value - (p * x0 + q) * x0});
  }
  return PiecewiseConvexFn(std::move(breaks), std::move(pieces));
}

}  // namespace nogap
