#include "nogap/presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nogap/scalar_fixtures.hpp"

namespace nogap {

using std::numbers::pi;

CellField subgradient_selection(const PiecewiseConvexFn& j, const GridField& w) {
  const Grid& g = w.grid();
  std::vector<double> u(g.cell_count());
  for (int c = 0; c < g.cell_count(); ++c) {
    const Interval d = j.subdifferential(w.cell_average(c));
    u[c] = d.lo == d.hi ? d.lo : 0.5 * (d.lo + d.hi);
  }
  return CellField(g, std::move(u));
}

Preset inverse_construction(std::string name, Grid grid, Reaction reaction, GridField coef,
                            PiecewiseConvexFn g, GridField w_bar, const NewtonOptions& opts) {
  if (!w_bar.zero_boundary()) throw std::invalid_argument("inverse_construction: w must vanish on the boundary");
  const PiecewiseConvexFn j = conjugate(g);
  CellField u = subgradient_selection(j, w_bar);
  const SemilinearProblem blank(grid, reaction, coef, GridField::constant(grid, 0.0));
  const GridField y = solve_state(blank, u, opts);

  // (-Laplace + a_y(y)) phi = y - y_d with phi = -w.
  std::vector<double> weight(grid.node_count()), phi(grid.node_count());
  for (int n = 0; n < grid.node_count(); ++n) {
    weight[n] = blank.a_y(n, y[n]);
    phi[n] = -w_bar[n];
  }
  const auto kphi = apply_operator(grid, weight, GridField(grid, phi, true));
  std::vector<double> yd(grid.node_count());
  for (int n = 0; n < grid.node_count(); ++n) yd[n] = y[n] - kphi[n];

  SemilinearProblem pde(grid, reaction, std::move(coef), GridField(grid, std::move(yd)));
  return Preset{std::move(name), "", OptimalControlProblem(std::move(pde), std::move(g)),
                std::move(u), std::move(w_bar), {}};
}

std::vector<std::string> preset_names() { return {"bangbang-positive", "bangbang-indefinite", "l0"}; }

namespace {

constexpr double kAlpha = 0.5, kUa = -1.0, kUb = 1.0;
constexpr double kL0Alpha = 2.0, kL0Beta = 1.0, kL0Gamma = 2.0;

// Identity up to 3, then bends C^1 onto the plateau 4 = alpha * gamma from 5 on.
double plateau(double s) {
  const double a = std::abs(s);
  const double v = a <= 3.0 ? a : a >= 5.0 ? 4.0 : 4.0 - 0.25 * (5.0 - a) * (5.0 - a);
  return std::copysign(v, s);
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// 0 at both ends of [0, 1], 1 on [0.15, 0.85].
double shoulder(double s) { return smoothstep(s / 0.15) * smoothstep((1.0 - s) / 0.15); }

}  // namespace

Preset make_preset(const std::string& name, int n) {
  if (n < 9) throw std::invalid_argument("make_preset: need n >= 9");
  const Grid grid = Grid::square(n);
  if (name == "bangbang-positive") {
    auto w = GridField::sample(grid, [](Point p) { return std::sin(pi * p.x) * std::sin(2 * pi * p.y); }, true);
    Preset p = inverse_construction(name, grid, Reaction::kZero, GridField::constant(grid, 0.0),
                                    bang_off_bang_g(kAlpha, kUa, kUb), std::move(w));
    p.description = "bang-off-bang, linear state equation, w = sin(pi x) sin(2 pi y)";
    p.parameters = {{"alpha", kAlpha}, {"u_a", kUa}, {"u_b", kUb}};
    return p;
  }
  if (name == "bangbang-indefinite") {
    // A shallow trough just below -alpha runs down the middle between two u = 1 slabs, so
    // the state is positive on the trough edges where the cubic reaction concentrates.
    constexpr double kDepth = 1.705, kWidth = 0.2, kCoef = 2e4, kReach = 0.1;
    auto w = GridField::sample(grid, [](Point p) {
      const double t = (p.x - 0.5) / kWidth;
      return shoulder(p.x) * shoulder(p.y) * (1.2 - kDepth * std::exp(-t * t * t * t));
    }, true);
    auto c = GridField::sample(grid, [](Point p) {
      return kCoef * std::exp(-(p.x - 0.5) * (p.x - 0.5) / (kReach * kReach));
    });
    Preset p = inverse_construction(name, grid, Reaction::kCubic, std::move(c),
                                    bang_off_bang_g(kAlpha, kUa, kUb), std::move(w));
    p.description = "bang-off-bang, cubic reaction on a flat trough where w crosses -alpha";
    p.parameters = {{"alpha", kAlpha}, {"u_a", kUa}, {"u_b", kUb}, {"trough_depth", kDepth},
                    {"trough_width", kWidth}, {"reaction", kCoef}, {"reaction_width", kReach}};
    return p;
  }
  if (name == "l0") {
    auto w = GridField::sample(grid, [](Point p) {
      return plateau(6.0 * std::sin(pi * p.x) * std::sin(2 * pi * p.y));
    }, true);
    Preset p = inverse_construction(name, grid, Reaction::kZero, GridField::constant(grid, 0.0),
                                    l0_envelope_g(kL0Alpha, kL0Beta, kL0Gamma), std::move(w));
    p.description = "convexified l0 penalty, linear state equation, w saturates at +-alpha*gamma";
    p.parameters = {{"alpha", kL0Alpha}, {"beta", kL0Beta}, {"gamma", kL0Gamma}};
    return p;
  }
  throw std::invalid_argument("make_preset: unknown preset '" + name + "'");
}

}  // namespace nogap
