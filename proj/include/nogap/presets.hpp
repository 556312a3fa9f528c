#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nogap/soc_checker.hpp"

namespace nogap {

// A stationary point (u, w = -F'(u)) of an OptimalControlProblem with known data.
struct Preset {
  std::string name;
  std::string description;
  OptimalControlProblem problem;
  CellField u_bar;
  GridField w_bar;
  std::vector<std::pair<std::string, double>> parameters;
};

// Element of dj(w_c) at each cell center; the midpoint where the subdifferential is an interval.
CellField subgradient_selection(const PiecewiseConvexFn& j, const GridField& w);

// Picks u in dj(w) and then y_d so that the adjoint of the resulting state is exactly -w.
Preset inverse_construction(std::string name, Grid grid, Reaction reaction, GridField coef,
                            PiecewiseConvexFn g, GridField w_bar, const NewtonOptions& opts = {});

std::vector<std::string> preset_names();
// "bangbang-positive", "bangbang-indefinite" or "l0" on an n x n node grid of the unit square.
Preset make_preset(const std::string& name, int n = 65);

}  // namespace nogap
