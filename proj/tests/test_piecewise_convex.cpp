#include <doctest.h>

#include <cmath>
#include <vector>

#include "nogap/piecewise_convex.hpp"
#include "nogap/scalar_fixtures.hpp"

using namespace nogap;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = a + (b - a) * k / (n - 1);
  return x;
}

double bang_off_bang_j(double w) { return std::max({w - 0.5, -(w + 0.5), 0.0}); }

double l0_j(double w) {
  const double a = std::abs(w);
  if (a <= 2.0) return 0.0;
  if (a <= 4.0) return w * w / 4.0 - 1.0;
  return 2.0 * a - 5.0;
}

}  // namespace

TEST_CASE("evaluate on the reference integrands") {
  const auto j = conjugate(bang_off_bang_g());
  CHECK(j(0.0) == doctest::Approx(0.0));
  const PiecewiseConvexFn abs_fn({}, {Quadratic{}}, {Kink{0.0, 1.0}});
  CHECK(abs_fn(0.0) == 0.0);
  const auto j52 = conjugate(l0_envelope_g());
  CHECK(j52(3.0) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(bang_off_bang_g()(1.5) == kInf);
}

TEST_CASE("conjugate reproduces the closed-form branches") {
  const auto j = conjugate(bang_off_bang_g());
  const auto j52 = conjugate(l0_envelope_g());
  for (double w : linspace(-6.0, 6.0, 241)) {
    CHECK(j(w) == doctest::Approx(bang_off_bang_j(w)).epsilon(1e-12));
    CHECK(j52(w) == doctest::Approx(l0_j(w)).epsilon(1e-12));
  }
  const auto half = conjugate(PiecewiseConvexFn::quadratic(0.5));
  for (double w : linspace(-3.0, 3.0, 13)) CHECK(half(w) == doctest::Approx(0.5 * w * w));

  // The bang-off-bang conjugate keeps its kinks at +-alpha with weights ub/2 and |ua|/2.
  REQUIRE(j.kinks().size() == 2);
  CHECK(j.kinks()[0].location == doctest::Approx(-0.5));
  CHECK(j.kinks()[0].weight == doctest::Approx(0.5));
  CHECK(j.kinks()[1].location == doctest::Approx(0.5));
  CHECK(j.kinks()[1].weight == doctest::Approx(0.5));
  REQUIRE(j52.kinks().size() == 2);
  CHECK(j52.kinks()[1].location == doctest::Approx(2.0));
  CHECK(j52.kinks()[1].weight == doctest::Approx(0.5));
}

TEST_CASE("conjugate agrees with the brute-force oracle") {
  const std::vector<PiecewiseConvexFn> fixtures = {
      bang_off_bang_g(), l0_envelope_g(), bang_off_bang_g(0.3, -2.0, 0.7),
      PiecewiseConvexFn::quadratic(0.5, 1.0, -2.0)};
  for (const auto& g : fixtures) {
    const auto j = conjugate(g);
    for (double w : linspace(-5.0, 5.0, 101)) {
      const double oracle = conjugate_numeric(g, w, SamplingGrid{-20.0, 20.0, 40001});
      CHECK(std::abs(j(w) - oracle) <= 1e-6);
    }
  }
}

TEST_CASE("conjugate_numeric reference values") {
  CHECK(conjugate_numeric(PiecewiseConvexFn::quadratic(0.5), 2.0) == doctest::Approx(2.0));
  CHECK(conjugate_numeric(bang_off_bang_g(), 2.0) == doctest::Approx(1.5));
  CHECK(conjugate_numeric(l0_envelope_g(), 5.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(conjugate_numeric(PiecewiseConvexFn::quadratic(0.5), 30.0), TruncationError);
}

TEST_CASE("biconjugation and Fenchel-Young") {
  const std::vector<PiecewiseConvexFn> fixtures = {
      bang_off_bang_g(), l0_envelope_g(), oscillating_curvature_fn(6),
      PiecewiseConvexFn::from_samples(std::vector<double>{-1.0, 0.0, 0.5, 2.0},
                                      std::vector<double>{1.0, 0.0, 0.1, 1.0})};
  for (const auto& f : fixtures) {
    const auto fs = conjugate(f);
    const auto fss = conjugate(fs);
    const Interval dom = f.domain();
    const double lo = std::max(dom.lo, -3.0), hi = std::min(dom.hi, 3.0);
    for (double u : linspace(lo, hi, 301)) CHECK(std::abs(fss(u) - f(u)) <= 1e-10);
    for (const auto& piece : fs.pieces()) CHECK(piece.p >= 0.0);
    for (double u : linspace(lo, hi, 31)) {
      for (double w : linspace(-4.0, 4.0, 33)) {
        const double gap = f(u) + fs(w) - u * w;
        CHECK(gap >= -1e-12);
        const Interval sub = f.subdifferential(u);
        const bool in_sub = w >= sub.lo - 1e-12 && w <= sub.hi + 1e-12;
        if (in_sub) CHECK(gap <= 1e-10);
        else CHECK(gap > 1e-12);
      }
    }
  }
}

TEST_CASE("non-convex input is rejected") {
  CHECK_THROWS_AS(PiecewiseConvexFn::quadratic(-1.0), NonConvexError);
  CHECK_THROWS_AS(PiecewiseConvexFn::from_samples(std::vector<double>{0.0, 1.0, 2.0},
                                                  std::vector<double>{0.0, 1.0, 0.0}),
                  NonConvexError);
  CHECK_THROWS(PiecewiseConvexFn({0.0}, {Quadratic{0, 1, 0}, Quadratic{0, 2, 0}}));
}

TEST_CASE("directional derivatives") {
  const PiecewiseConvexFn abs_fn({}, {Quadratic{}}, {Kink{0.0, 1.0}});
  CHECK(directional_derivative(abs_fn, 0.0, -3.0) == 3.0);
  const PiecewiseConvexFn relu({}, {Quadratic{0.0, 0.5, 0.0}}, {Kink{0.0, 0.5}});
  CHECK(directional_derivative(relu, 0.0, 1.0) == 1.0);
  CHECK(directional_derivative(PiecewiseConvexFn::quadratic(0.5), 2.0, -1.0) == -2.0);
  const auto g = bang_off_bang_g();
  CHECK(directional_derivative(g, 1.0, 1.0) == kInf);
  CHECK(directional_derivative(g, 1.0, -1.0) == doctest::Approx(-0.5));
}

TEST_CASE("second directional derivatives and their conjugates") {
  CHECK(second_dir_derivative(PiecewiseConvexFn::quadratic(0.5), 0.7, 3.0) == doctest::Approx(9.0));
  const auto j0 = conjugate(l0_envelope_g()).smooth_part();
  CHECK(second_dir_derivative(j0, 3.0, 1.0) == doctest::Approx(0.5));
  CHECK(second_dir_derivative(j0, 2.0, -1.0) == 0.0);
  CHECK(second_dir_derivative(j0, 2.0, 1.0) == doctest::Approx(0.5));
  const auto j = conjugate(l0_envelope_g());
  CHECK(second_dir_derivative(j, 2.0, 1.0) == kInf);

  CHECK(half_second_conjugate(j, 3.0, 2.0) == doctest::Approx(4.0));
  CHECK(half_second_conjugate(j, 3.0, 0.0) == 0.0);
  CHECK(half_second_conjugate(j, 4.0, 1.0) == kInf);
  CHECK(half_second_conjugate(j, 4.0, -1.0) == doctest::Approx(1.0));
  CHECK(half_second_conjugate(j, -4.0, 1.0) == doctest::Approx(1.0));

  for (double w : linspace(-5.0, 5.0, 41))
    for (double z : {-2.0, -0.3, 0.4, 1.5})
      for (double s : {0.5, 2.0, 7.0}) {
        const double a = second_dir_derivative(j, w, s * z);
        const double b = second_dir_derivative(j, w, z);
        if (std::isinf(b)) CHECK(std::isinf(a));
        else CHECK(a == doctest::Approx(s * s * b).epsilon(1e-14));
      }
}

TEST_CASE("structure assumption on the curvature ratio") {
  const auto j0 = conjugate(l0_envelope_g()).smooth_part();
  const auto r = check_structure_assumption(j0, Interval{-5.0, 5.0});
  CHECK(r.holds);
  CHECK(r.c_j == 1.0);
  CHECK(check_structure_assumption(PiecewiseConvexFn::quadratic(0.5), Interval{-1, 1}).c_j == 1.0);

  const auto zeta = oscillating_curvature_fn(30);
  StructureOptions opts;
  opts.c_max = 10.0;
  const auto bad = check_structure_assumption(zeta, Interval{0.0, 1.0}, opts);
  CHECK_FALSE(bad.holds);
  const double n = std::round(1.0 / bad.witness);
  CHECK(std::abs(bad.witness - 1.0 / n) < 1e-12);
  CHECK(bad.witness_ratio == doctest::Approx(n));
}

TEST_CASE("second-order quotient against derivative quotient") {
  const auto ladder = std::vector<double>{0.1, 0.05, 0.025, 0.0125, 0.00625};
  auto r = d2_equivalence_check(PiecewiseConvexFn::quadratic(0.5), 1.0, 2.0, ladder);
  CHECK(r.lhs == doctest::Approx(4.0));
  CHECK(r.rhs == doctest::Approx(4.0));
  const auto j0 = conjugate(l0_envelope_g()).smooth_part();
  r = d2_equivalence_check(j0, 3.0, 1.0, ladder);
  CHECK(r.lhs == doctest::Approx(0.5));
  CHECK(r.rhs == doctest::Approx(0.5));
  r = d2_equivalence_check(j0, 2.0, 1.0, ladder);
  CHECK(r.lhs == doctest::Approx(0.5));
  CHECK(r.rhs == doctest::Approx(0.5));
  CHECK(r.converged);
}

TEST_CASE("remainder splits smooth part and kink crossings") {
  const auto j = conjugate(bang_off_bang_g());
  for (double w : linspace(-1.0, 1.0, 21))
    for (double d : {-0.7, -0.1, 0.05, 0.3}) {
      const double direct = j(w + d) - j(w) - directional_derivative(j, w, d);
      CHECK(j.remainder(w, d) == doctest::Approx(direct).epsilon(1e-12));
    }
}
