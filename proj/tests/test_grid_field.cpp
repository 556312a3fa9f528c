#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nogap/cell_quadrature.hpp"
#include "nogap/field_fixtures.hpp"
#include "nogap/level_set.hpp"

using namespace nogap;
using std::numbers::pi;

TEST_CASE("gradient") {
  const auto lin = GridField::sample(Grid::square(11), [](Point p) { return p.x; });
  const auto g = gradient(lin);
  for (const auto& d : g.values) {
    CHECK(d[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(d[1]) < 1e-12);
  }
  const auto sq = GridField::sample(Grid::square(41), [](Point p) { return p.x * p.x + p.y * p.y; });
  const auto gs = gradient(sq);
  const auto at = gs.values[sq.grid().node(20, 0)];
  CHECK(at[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(at[1]) < 1e-10);

  const auto cube = GridField::sample(Grid::interval(201, 0.0, 2.0), [](Point p) { return p.x * p.x * p.x; });
  const double h = cube.grid().hx();
  CHECK(std::abs(gradient(cube).values[100][0] - 3.0) <= 1.01 * h * h);
}

TEST_CASE("level set extraction") {
  const auto slab = slab_field(33);
  const auto m = extract_level_set(slab, 0.0);
  CHECK(std::abs(m.total_measure() - 1.0) < 1e-12);
  for (const auto& e : m.elements) CHECK(e.grad_norm == doctest::Approx(1.0));

  const auto circle = circle_field(257);
  const auto mc = extract_level_set(circle, 0.0);
  CHECK(std::abs(mc.total_measure() - pi) < 1e-3);
  CHECK(std::abs(surface_integral(mc, [](Point) { return 1.0; }) - pi) < 1e-3);
  CHECK(surface_integral(mc, [](Point) { return 0.0; }) == 0.0);
  CHECK(std::abs(weighted_surface_integral(mc, [](Point) { return 1.0; }) - pi) < 2e-3);
  CHECK(std::abs(weighted_surface_integral(mc, [](Point) { return 9.0; }) - 9.0 * pi) < 2e-2);

  CHECK(std::abs(surface_integral(m, [](Point p) { return p.x; }) - 0.5) < 1e-12);

  const auto cube = cube_field_1d(401);
  const auto m1 = extract_level_set(cube, 0.0);
  REQUIRE(m1.elements.size() == 1);
  const double h = cube.grid().hx();
  CHECK(std::abs(m1.elements[0].midpoint.x - 0.5) <= h * h);

  const Grid g = Grid::square(5);
  CHECK_THROWS_AS(extract_level_set(GridField::constant(g, 0.0), 0.0), DegenerateCellError);
}

TEST_CASE("boundary pieces of a vanishing field are not part of the level set") {
  const auto w = GridField::sample(Grid::square(21), [](Point p) {
    return std::sin(pi * p.x) * std::sin(pi * p.y);
  }, true);
  CHECK(extract_level_set(w, 0.0).elements.empty());
  const auto s = sharpness_fixture(201);
  CHECK(extract_level_set(s.w, 0.0).elements.empty());
}

TEST_CASE("saddle cells are resolved by the center value") {
  // Diagonal corners share a sign and the center average 0 counts as below.
  const Grid g = Grid::square(2);
  const GridField w(g, {1.0, -1.0, -1.0, 1.0});
  const auto m = extract_level_set(w, 0.0);
  CHECK(m.ambiguous_cells == 1);
  CHECK(m.elements.size() == 2);
}

TEST_CASE("surface quadrature converges at second order on the circle") {
  std::vector<double> err_len, err_w;
  for (int n : {129, 257, 513, 1025}) {
    const auto m = extract_level_set(circle_field(n), 0.0);
    err_len.push_back(std::abs(m.total_measure() - pi));
    err_w.push_back(std::abs(weighted_surface_integral(m, [](Point) { return 1.0; }) - pi));
  }
  for (std::size_t k = 0; k + 1 < err_len.size(); ++k) {
    CHECK(std::log2(err_len[k] / err_len[k + 1]) >= 1.9);
    CHECK(std::log2(err_w[k] / err_w[k + 1]) >= 1.9);
  }
}

TEST_CASE("linearity of surface integrals") {
  const auto m = extract_level_set(circle_field(65), 0.0);
  auto psi = [](Point p) { return 1.0 + p.x * p.y; };
  const double a = surface_integral(m, psi);
  const double b = surface_integral(m, [](Point p) { return p.x; });
  CHECK(surface_integral(m, [&](Point p) { return 2.0 * psi(p) - 3.0 * p.x; }) ==
        doctest::Approx(2.0 * a - 3.0 * b).epsilon(1e-13));
  const double w1 = weighted_surface_integral(m, psi);
  CHECK(weighted_surface_integral(m, [&](Point p) { return 4.0 * psi(p); }) == 4.0 * w1);
}

TEST_CASE("tube measure") {
  const auto slab = slab_field(33);
  CHECK(std::abs(tube_measure(slab, 0.0, 0.1) - 0.2) < 1e-12);
  CHECK(tube_measure(slab, 0.0, 0.0) == 0.0);
  const auto circle = circle_field(257);
  CHECK(std::abs(tube_measure(circle, 0.0, 0.05) - pi * 0.1) < 5e-3);
  double prev = 0.0;
  for (double eps : {0.001, 0.002, 0.01, 0.03, 0.1}) {
    const double t = tube_measure(circle, 0.0, eps);
    CHECK(t >= prev);
    prev = t;
  }
  const double surface = weighted_surface_integral(extract_level_set(circle, 0.0), [](Point) { return 1.0; });
  CHECK(tube_measure(circle, 0.0, 1e-3) / 1e-3 == doctest::Approx(2.0 * surface).epsilon(0.02));
}

TEST_CASE("structural constant") {
  const auto s = structural_constant(slab_field(33), {0.0}, 0.2);
  CHECK(s.c == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(s.surface_bound == doctest::Approx(2.0).epsilon(1e-12));
  const auto c = structural_constant(circle_field(129), {0.0}, 0.1);
  CHECK(c.c == doctest::Approx(2.0 * pi).epsilon(0.02));
  CHECK(c.surface_bound == doctest::Approx(2.0 * pi).epsilon(0.02));
  const auto e = structural_constant(circle_field(33), {5.0}, 0.1);
  CHECK(e.c == 0.0);
  CHECK(e.surface_bound == 0.0);
}

TEST_CASE("nondegeneracy") {
  const auto slab = check_nondegeneracy(slab_field(33), {0.0});
  CHECK(slab.ok);
  CHECK(slab.min_grad_norm == doctest::Approx(1.0));
  const auto flat = GridField::sample(Grid::square(33), [](Point p) { return (p.x - 0.5) * (p.x - 0.5); });
  const auto bad = check_nondegeneracy(flat, {0.0});
  CHECK_FALSE(bad.ok);
  REQUIRE_FALSE(bad.witnesses.empty());
  CHECK(bad.witnesses[0].x == doctest::Approx(0.5));
  const auto circle = check_nondegeneracy(circle_field(129), {0.0});
  CHECK(circle.ok);
  CHECK(circle.min_grad_norm == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("piecewise integration is exact for bilinear data") {
  const auto g = Grid::square(9, Box{0.0, 2.0, 0.0, 1.0});
  const auto w = GridField::sample(g, [](Point p) { return p.x + 0.3 * p.y - 1.0; });
  const GridField* fields[] = {&w};
  const FieldBreak br[] = {{{1.0}, 0.0}};
  // Integral of max(w, 0) over [0,2]x[0,1].
  const double v = integrate_fields(fields, br, [](std::span<const double> x, Point) {
    return std::max(x[0], 0.0);
  });
  const double exact = (std::pow(1.3, 3) - 1.0) / 1.8;
  CHECK(v == doctest::Approx(exact).epsilon(1e-9));
}
