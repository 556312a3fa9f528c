#include "nogap/limit_study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nogap {

std::vector<double> geometric_ladder(double t0, double ratio, int terms) {
  if (!(t0 > 0.0) || !(ratio > 0.0 && ratio < 1.0) || terms < 1)
    throw std::invalid_argument("geometric_ladder: need t0 > 0, 0 < ratio < 1, terms >= 1");
  std::vector<double> t(terms);
  t[0] = t0;
  for (int k = 1; k < terms; ++k) t[k] = t[k - 1] * ratio;
  return t;
}

Extrapolation extrapolate(std::span<const double> t, std::span<const double> q,
                          double noise_floor) {
  if (t.size() != q.size() || t.empty())
    throw std::invalid_argument("extrapolate: t and q must be non-empty and of equal length");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (!(t[k] < t[k - 1] && t[k] > 0.0))
      throw std::invalid_argument("extrapolate: t must decrease strictly to 0");

  Extrapolation e;
  const std::size_t n = q.size();
  e.raw_last = q[n - 1];
  e.limit = e.raw_last;
  if (n < 3) {
    e.warning = "fewer than three quotients; raw last quotient reported";
    return e;
  }

  double scale = 1.0;
  for (double v : q) scale = std::max(scale, std::abs(v));
  const double floor = noise_floor * scale;

  const double d1 = q[n - 2] - q[n - 3];
  const double d2 = q[n - 1] - q[n - 2];
  if (std::abs(d1) <= floor && std::abs(d2) <= floor) {
    e.stationary = true;
    e.order = std::numeric_limits<double>::infinity();
    return e;
  }

  // Least-squares slope of log|q_k - q_{k+1}| against log t_k over differences above the floor.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d = std::abs(q[k + 1] - q[k]);
    if (d <= floor) continue;
    const double x = std::log(t[k]);
    const double y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    const double den = m * sxx - sx * sx;
    e.order = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  }

  const bool monotone = d1 * d2 >= 0.0;
  const bool damped = std::abs(d2) < 0.1 * std::abs(d1);
  if (!(monotone || damped)) {
    e.warning = "last three quotients oscillate; raw last quotient reported";
    return e;
  }
  if (std::abs(e.order - 1.0) > 0.5) {
    e.warning = "fitted order far from 1; raw last quotient reported";
    return e;
  }
  const double ta = t[n - 2], tb = t[n - 1];
  e.limit = (q[n - 1] * ta - q[n - 2] * tb) / (ta - tb);
  e.extrapolated = true;
  return e;
}

}  // namespace nogap
