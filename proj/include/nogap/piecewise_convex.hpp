#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nogap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Quadratic {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;

  double operator()(double w) const { return (p * w + q) * w + r; }
  double slope(double w) const { return 2.0 * p * w + q; }
};

struct Kink {
  double location = 0.0;
  double weight = 0.0;
};

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double w) const { return w >= lo && w <= hi; }
  bool bounded() const { return lo > -kInf && hi < kInf; }
  double distance(double w) const;
};

class NonConvexError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// j = j0 + sum_i a_i |w - b_i| on a closed domain, +inf outside.
// j0 is C^1 and quadratic on each of the intervals cut by the breakpoints.
class PiecewiseConvexFn {
 public:
  PiecewiseConvexFn(std::vector<double> breakpoints, std::vector<Quadratic> pieces,
                    std::vector<Kink> kinks = {}, Interval domain = {});

  // Accepts any continuous convex piecewise quadratic; slope jumps become kinks.
  static PiecewiseConvexFn from_pieces(std::vector<double> breakpoints,
                                       std::vector<Quadratic> pieces, Interval domain = {});
  // Piecewise-linear interpolant of convex samples, domain [u.front(), u.back()].
  static PiecewiseConvexFn from_samples(std::span<const double> u, std::span<const double> f);
  static PiecewiseConvexFn quadratic(double p, double q = 0.0, double r = 0.0);

  double operator()(double w) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Quadratic>& pieces() const { return pieces_; }
  const std::vector<Kink>& kinks() const { return kinks_; }
  const Interval& domain() const { return domain_; }

  PiecewiseConvexFn smooth_part() const;
  double smooth_value(double w) const;
  double smooth_slope(double w) const;
  // 2p of the piece on the given side of w (side > 0: right).
  double smooth_curvature(double w, int side) const;
  // j0(w + d) - j0(w) - j0'(w) d, summed piecewise without cancellation.
  double smooth_remainder(double w, double d) const;

  double left_slope(double w) const;
  double right_slope(double w) const;
  Interval subdifferential(double w) const;
  // f(w + d) - f(w) - f'(w; d) for w in the interior of the domain.
  double remainder(double w, double d) const;

  bool is_kink(double w) const;
  // Sorted union of breakpoints and kink locations.
  std::vector<double> nodes() const;
  // Quadratic coefficients of the full function (kinks included) on (lo, hi) ⊂ one piece.
  Quadratic full_quadratic_between(double lo, double hi) const;

 private:
  std::size_t piece_right(double w) const;
  std::size_t piece_left(double w) const;

  std::vector<double> breakpoints_;
  std::vector<Quadratic> pieces_;
  std::vector<Kink> kinks_;
  Interval domain_;
};

PiecewiseConvexFn conjugate(const PiecewiseConvexFn& f);

struct SamplingGrid {
  double lo = -10.0;
  double hi = 10.0;
  int points = 20001;
};

class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid maximum of u*w - f(u) with a golden-section polish around the grid argmax.
double conjugate_numeric(const PiecewiseConvexFn& f, double w, const SamplingGrid& grid = {});

double directional_derivative(const PiecewiseConvexFn& f, double w, double z);
double second_dir_derivative(const PiecewiseConvexFn& f, double w, double z);
double half_second_conjugate(const PiecewiseConvexFn& f, double w, double v);

struct SecondDerivData {
  double jpp_plus = 0.0;
  double jpp_minus = 0.0;
  int kink_hit = -1;
};

SecondDerivData second_derivative_data(const PiecewiseConvexFn& f, double w);

struct StructureOptions {
  double points_per_unit = 1e4;
  double c_max = kInf;
  double tol = 1e-14;
};

struct StructureCheck {
  bool holds = true;
  double c_j = 1.0;
  double witness = 0.0;
  double witness_ratio = 1.0;
};

StructureCheck check_structure_assumption(const PiecewiseConvexFn& f, Interval W,
                                          const StructureOptions& opts = {});

struct D2Equivalence {
  double lhs = 0.0;
  double rhs = 0.0;
  bool converged = true;
};

D2Equivalence d2_equivalence_check(const PiecewiseConvexFn& f, double w, double z,
                                   std::span<const double> t_seq);

}  // namespace nogap
