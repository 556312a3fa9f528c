#pragma once

#include <string>
#include <vector>

#include "nogap/cell_quadrature.hpp"
#include "nogap/level_set.hpp"
#include "nogap/limit_study.hpp"
#include "nogap/piecewise_convex.hpp"

namespace nogap {

struct StudyOptions {
  std::vector<double> t = geometric_ladder(0.128, 0.5, 8);
  // z is multiplied by a cutoff vanishing on this boundary margin (fraction of the extent).
  double cutoff_margin = 0.1;
  // The fit only uses t whose strip width t |z| / |grad w| on the level sets spans at least
  // this many cells; below that the quotients see the interpolant, not the field.
  double resolved_cells = 1.0;
  // Relative noise floor for the fit, negative for (h / L)^1.5 with L the smallest box extent.
  double noise_floor = -1.0;
  QuadratureOptions quadrature;
};

struct LimitStudy {
  std::string name;
  std::vector<double> t;
  std::vector<double> quotients;
  Extrapolation fit;
  double target = 0.0;
  // Smallest t admitted to the fit and the index of the first t below it.
  double t_resolved = 0.0;
  std::size_t fit_end = 0;

  double limit() const { return fit.limit; }
  // Relative mismatch |limit - target| / |target|, absolute when the target vanishes.
  double mismatch() const;
  // Order in t, infinite when the quotients are stationary.
  double order() const { return fit.order; }
};

struct MismatchSet {
  GridField indicator;
  double measure = 0.0;
};

// {sign(w) != sign(w + t z)} with sign(0) = 0.
MismatchSet sign_mismatch_set(const GridField& w, const GridField& z, double t,
                              const QuadratureOptions& q = {});

// (1/t) int_{Omega_t} psi  ->  int_{w=0} psi |z| / |grad w|
LimitStudy limit_a(const GridField& w, const GridField& z, const PointFunction& psi,
                   const StudyOptions& opts = {});
// (1/t) int_{Omega_t} psi sign(z)  ->  int_{w=0} psi z / |grad w|
LimitStudy limit_b(const GridField& w, const GridField& z, const PointFunction& psi,
                   const StudyOptions& opts = {});
// (1/t) int_{Omega_t} |w| / t  ->  1/2 int_{w=0} z^2 / |grad w|
LimitStudy limit_c(const GridField& w, const GridField& z, const StudyOptions& opts = {});

// (2/t^2) int j(w + t z) - j(w) - t j'(w; z) against the assembled second subderivative.
LimitStudy second_quotient_J(const PiecewiseConvexFn& j, const GridField& w, const GridField& z,
                             const StudyOptions& opts = {});
// int j0''(w; z) + sum_i 2 a_i int_{w = b_i} z^2 / |grad w|
double second_J_target(const PiecewiseConvexFn& j, const GridField& w, const GridField& z,
                       const QuadratureOptions& q = {});

// <h_t, psi> for h_t = (x_t - x) / t with x_t the selected subgradient of j at w + t z.
double subdiff_quotient(const PiecewiseConvexFn& j, const GridField& w, const GridField& z,
                        double t, const PointFunction& psi, const QuadratureOptions& q = {});
// ||h_t|| in L^1.
double subdiff_norm(const PiecewiseConvexFn& j, const GridField& w, const GridField& z, double t,
                    const QuadratureOptions& q = {});

struct SubdiffTarget {
  double pairing = 0.0;
  double norm = 0.0;
};
SubdiffTarget subdiff_target(const PiecewiseConvexFn& j, const GridField& w, const GridField& z,
                             const PointFunction& psi, const QuadratureOptions& q = {});

struct SubdiffStudy {
  LimitStudy pairing;
  LimitStudy norm;
};
SubdiffStudy subdiff_study(const PiecewiseConvexFn& j, const GridField& w, const GridField& z,
                           const PointFunction& psi, const StudyOptions& opts = {});

// Bounds on lambda(Omega_t)/t for a 1-d field with w(s0) = 0, certified from
// |z - z(s0)| <= eps and |w(s) - w'(s0)(s - s0)| <= eps |s - s0| on |s - s0| <= delta.
struct BracketCertificate {
  bool certified = false;
  double eps = 0.0, delta = 0.0, t0 = 0.0;
  double lower = 0.0, upper = 0.0;
};
BracketCertificate bracket_1d(const GridField& w, const GridField& z, double s0, double slope,
                              double eps);

}  // namespace nogap
