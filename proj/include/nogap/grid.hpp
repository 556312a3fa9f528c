#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace nogap {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Box {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
};

// Uniform node grid on an interval (dim 1) or a rectangle (dim 2).
class Grid {
 public:
  Grid(int dim, Box box, int nx, int ny = 1);
  static Grid square(int n, Box box = {});
  static Grid interval(int n, double x0, double x1);

  int dim() const { return dim_; }
  const Box& box() const { return box_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int node_count() const { return nx_ * ny_; }
  int cells_x() const { return nx_ - 1; }
  int cells_y() const { return dim_ == 2 ? ny_ - 1 : 1; }
  int cell_count() const { return cells_x() * cells_y(); }
  double cell_measure() const { return dim_ == 2 ? hx_ * hy_ : hx_; }
  double volume() const;
  double diameter() const;

  int node(int i, int j = 0) const { return j * nx_ + i; }
  int cell(int ci, int cj = 0) const { return cj * cells_x() + ci; }
  Point node_point(int i, int j = 0) const;
  Point cell_center(int ci, int cj = 0) const;
  bool on_boundary(int i, int j = 0) const;
  // Corner node indices of a cell, counter-clockwise from (ci, cj); two entries in dim 1.
  std::array<int, 4> cell_nodes(int c) const;
  // Cell containing p (clamped to the box) and local coordinates in [0,1]^2.
  int locate(Point p, double& xi, double& eta) const;

  bool operator==(const Grid& o) const;

 private:
  int dim_;
  Box box_;
  int nx_, ny_;
  double hx_, hy_;
};

class GridField {
 public:
  GridField(Grid grid, std::vector<double> values, bool zero_boundary = false);
  static GridField sample(const Grid& grid, const std::function<double(Point)>& f,
                          bool zero_boundary = false);
  static GridField constant(const Grid& grid, double value);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](int n) const { return values_[n]; }
  double at(int i, int j = 0) const { return values_[grid_.node(i, j)]; }
  bool zero_boundary() const { return zero_boundary_; }

  double interpolate(Point p) const;
  double cell_average(int c) const;
  double max_abs() const;

 private:
  Grid grid_;
  std::vector<double> values_;
  bool zero_boundary_;
};

// Piecewise-constant field on the cells of a grid.
class CellField {
 public:
  CellField(Grid grid, std::vector<double> values);
  static CellField constant(const Grid& grid, double value);
  static CellField sample(const Grid& grid, const std::function<double(Point)>& f);
  static CellField averages(const GridField& w);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](int c) const { return values_[c]; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

struct VectorField {
  Grid grid;
  std::vector<std::array<double, 2>> values;

  std::array<double, 2> interpolate(Point p) const;
};

// Central differences inside, second-order one-sided differences on the boundary.
VectorField gradient(const GridField& w);

// Smooth factor equal to 0 within `margin` of the boundary and 1 beyond 2 * margin.
double boundary_cutoff(const Grid& grid, Point p, double margin);
GridField apply_cutoff(const GridField& z, double margin);

}  // namespace nogap
