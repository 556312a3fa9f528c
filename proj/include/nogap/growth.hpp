#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nogap/soc_checker.hpp"

namespace nogap {

enum class SampleFamily { kShift, kBump, kMixed, kTransported };
const char* to_string(SampleFamily f);

struct GrowthSample {
  SampleFamily family = SampleFamily::kShift;
  double l1 = 0.0;   // |u - u_bar|_L1
  double gap = 0.0;  // Phi(u) - Phi(u_bar)
  double quotient = 0.0;
};

struct GrowthOptions {
  double eps = 0.0;  // <= 0 takes the suggestion of the SOC report
  int samples = 500;
  std::uint64_t seed = 1;
  // Share of the budget spent on the transported argmin of Q.
  double transported_fraction = 0.1;
  int max_redraws = 50;
  NewtonOptions newton{1e-12, 50};
};

struct GrowthResult {
  double c_emp = kInf;
  double eps = 0.0;
  int rejected = 0;
  GrowthSample worst;
  std::vector<GrowthSample> samples;
};

// Quadratic growth quotients (Phi(u) - Phi(u_bar)) / (|u - u_bar|_L1^2 / 2) over random
// perturbations with |u - u_bar|_L1 <= eps. `soc` supplies w_bar, eps and the argmin of Q.
GrowthResult growth_test(const OptimalControlProblem& p, const CellField& u_bar,
                         const SOCReport& soc, const GrowthOptions& opts = {});

struct DescentAscentOptions {
  int descent_samples = 200;
  int ascent_samples = 200;
  std::uint64_t seed = 1;
  double ladder_ratio = 1.01;  // spacing of the radii used to bound the descent constant
};

struct DescentAscentReport {
  double eta = 0.0;
  double lambda_emp = 0.0;      // certified over the cellwise class
  double lambda_sampled = 0.0;  // plain maximum on the adversarial ladder
  double lambda_theory = kInf;  // L |Omega| + 4 C sum a_i
  double structural_c = 0.0;
  int descent_violations = 0;
  int ascent_violations = 0;
  double max_descent_ratio = 0.0;    // remainder / (Lambda |d|^2 / 2)
  double min_ascent_quotient = kInf;  // (G(y) - G(u) - <y - u, w>) / |y - u|_L1^2
  bool descent_ok() const { return descent_violations == 0; }
  bool ascent_ok() const { return ascent_violations == 0; }
};

// Descent constant of J = sum |cell| j(v_c) at the cell values of w_bar, checked on random v with
// |v - w_bar|_inf <= eta, and the dual ascent bound for G on random feasible y.
DescentAscentReport descent_ascent_constants(const PiecewiseConvexFn& g, const GridField& w_bar,
                                             const CellField& u_bar, double eta,
                                             const DescentAscentOptions& opts = {});

}  // namespace nogap
