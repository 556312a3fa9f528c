#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nogap/grid.hpp"

namespace nogap {

struct SurfaceElement {
  Point a, b;  // segment end points (a == b in dim 1)
  Point midpoint;
  double measure = 0.0;
  double grad_norm = 0.0;
  int cell = -1;
};

struct LevelSetMesh {
  double level = 0.0;
  std::vector<SurfaceElement> elements;
  int ambiguous_cells = 0;

  double total_measure() const;
};

class DegenerateCellError : public std::runtime_error {
 public:
  DegenerateCellError(int cell, const std::string& what)
      : std::runtime_error(what), cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

// Marching squares (dim 2) or bracketing roots (dim 1) of the interpolant of w - b.
// Nodes with w == b count as below the level. Pieces lying on the boundary are dropped.
LevelSetMesh extract_level_set(const GridField& w, double b);

using PointFunction = std::function<double(Point)>;

double surface_integral(const LevelSetMesh& mesh, const PointFunction& psi);
double surface_integral(const LevelSetMesh& mesh, const GridField& psi);
double weighted_surface_integral(const LevelSetMesh& mesh, const PointFunction& psi);
double weighted_surface_integral(const LevelSetMesh& mesh, const GridField& psi);

double tube_measure(const GridField& w, double b, double eps);

struct StructuralConstant {
  double c = 0.0;
  double surface_bound = 0.0;
  std::vector<double> eps;
  std::vector<double> quotients;
};

StructuralConstant structural_constant(const GridField& w, const std::vector<double>& levels,
                                       double eta, int eps_points = 32);

struct NondegeneracyReport {
  bool ok = true;
  double min_grad_norm = kNoElements;
  double threshold = 0.0;
  std::vector<Point> witnesses;
  std::string message;

  static constexpr double kNoElements = 1e300;
};

double default_degeneracy_threshold(const GridField& w);

NondegeneracyReport check_nondegeneracy(const GridField& w, const std::vector<double>& levels,
                                        double eps_degenerate = -1.0);

}  // namespace nogap
