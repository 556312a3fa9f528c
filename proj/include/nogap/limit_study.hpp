#pragma once

#include <span>
#include <string>
#include <vector>

namespace nogap {

std::vector<double> geometric_ladder(double t0, double ratio, int terms);

struct Extrapolation {
  double limit = 0.0;
  double raw_last = 0.0;
  double order = 0.0;     // fitted exponent of |q_k - q_{k+1}| against t_k
  bool stationary = false;  // successive differences below the noise floor
  bool extrapolated = false;
  std::string warning;
};

// First-order Richardson extrapolation of q(t) -> limit as t -> 0.
Extrapolation extrapolate(std::span<const double> t, std::span<const double> q,
                          double noise_floor = 1e-9);

}  // namespace nogap
