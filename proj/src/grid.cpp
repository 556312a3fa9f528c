#include "nogap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nogap {

Grid::Grid(int dim, Box box, int nx, int ny) : dim_(dim), box_(box), nx_(nx), ny_(ny) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
  if (nx < 2) throw std::invalid_argument("Grid: need at least two nodes in x");
  if (!(box.x1 > box.x0)) throw std::invalid_argument("Grid: need x1 > x0");
  hx_ = (box.x1 - box.x0) / (nx - 1);
  if (dim == 1) {
    ny_ = 1;
    box_.y0 = box_.y1 = 0.0;
    hy_ = 1.0;
  } else {
    if (ny < 2) throw std::invalid_argument("Grid: need at least two nodes in y");
    if (!(box.y1 > box.y0)) throw std::invalid_argument("Grid: need y1 > y0");
    hy_ = (box.y1 - box.y0) / (ny - 1);
  }
}

Grid Grid::square(int n, Box box) { return Grid(2, box, n, n); }

Grid Grid::interval(int n, double x0, double x1) { return Grid(1, Box{x0, x1, 0.0, 0.0}, n); }

double Grid::volume() const {
  const double lx = box_.x1 - box_.x0;
  return dim_ == 2 ? lx * (box_.y1 - box_.y0) : lx;
}

double Grid::diameter() const {
  const double lx = box_.x1 - box_.x0;
  const double ly = dim_ == 2 ? box_.y1 - box_.y0 : 0.0;
  return std::hypot(lx, ly);
}

Point Grid::node_point(int i, int j) const {
  const double x = i == nx_ - 1 ? box_.x1 : box_.x0 + i * hx_;
  if (dim_ == 1) return {x, 0.0};
  const double y = j == ny_ - 1 ? box_.y1 : box_.y0 + j * hy_;
  return {x, y};
}

Point Grid::cell_center(int ci, int cj) const {
  const double x = box_.x0 + (ci + 0.5) * hx_;
  if (dim_ == 1) return {x, 0.0};
  return {x, box_.y0 + (cj + 0.5) * hy_};
}

bool Grid::on_boundary(int i, int j) const {
  if (i == 0 || i == nx_ - 1) return true;
  return dim_ == 2 && (j == 0 || j == ny_ - 1);
}

std::array<int, 4> Grid::cell_nodes(int c) const {
  const int ci = c % cells_x();
  const int cj = c / cells_x();
  if (dim_ == 1) return {ci, ci + 1, -1, -1};
  return {node(ci, cj), node(ci + 1, cj), node(ci + 1, cj + 1), node(ci, cj + 1)};
}

int Grid::locate(Point p, double& xi, double& eta) const {
  const double sx = std::clamp((p.x - box_.x0) / hx_, 0.0, static_cast<double>(cells_x()));
  const int ci = std::min(static_cast<int>(sx), cells_x() - 1);
  xi = sx - ci;
  if (dim_ == 1) {
    eta = 0.0;
    return ci;
  }
  const double sy = std::clamp((p.y - box_.y0) / hy_, 0.0, static_cast<double>(cells_y()));
  const int cj = std::min(static_cast<int>(sy), cells_y() - 1);
  eta = sy - cj;
  return cell(ci, cj);
}

bool Grid::operator==(const Grid& o) const {
  return dim_ == o.dim_ && nx_ == o.nx_ && ny_ == o.ny_ && box_.x0 == o.box_.x0 &&
         box_.x1 == o.box_.x1 && box_.y0 == o.box_.y0 && box_.y1 == o.box_.y1;
}

GridField::GridField(Grid grid, std::vector<double> values, bool zero_boundary)
    : grid_(std::move(grid)), values_(std::move(values)), zero_boundary_(zero_boundary) {
  if (static_cast<int>(values_.size()) != grid_.node_count())
    throw std::invalid_argument("GridField: expected " + std::to_string(grid_.node_count()) +
                                " node values, got " + std::to_string(values_.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("GridField: values must be finite");
}

GridField GridField::sample(const Grid& grid, const std::function<double(Point)>& f,
                            bool zero_boundary) {
  std::vector<double> v(grid.node_count());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const bool boundary = zero_boundary && grid.on_boundary(i, j);
      v[grid.node(i, j)] = boundary ? 0.0 : f(grid.node_point(i, j));
    }
  return GridField(grid, std::move(v), zero_boundary);
}

GridField GridField::constant(const Grid& grid, double value) {
  return GridField(grid, std::vector<double>(grid.node_count(), value));
}

double GridField::interpolate(Point p) const {
  double xi, eta;
  const int c = grid_.locate(p, xi, eta);
  const auto n = grid_.cell_nodes(c);
  if (grid_.dim() == 1) return (1 - xi) * values_[n[0]] + xi * values_[n[1]];
  return (1 - xi) * (1 - eta) * values_[n[0]] + xi * (1 - eta) * values_[n[1]] +
         xi * eta * values_[n[2]] + (1 - xi) * eta * values_[n[3]];
}

double GridField::cell_average(int c) const {
  const auto n = grid_.cell_nodes(c);
  if (grid_.dim() == 1) return 0.5 * (values_[n[0]] + values_[n[1]]);
  return 0.25 * (values_[n[0]] + values_[n[1]] + values_[n[2]] + values_[n[3]]);
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

CellField::CellField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.cell_count())
    throw std::invalid_argument("CellField: expected " + std::to_string(grid_.cell_count()) +
                                " cell values, got " + std::to_string(values_.size()));
}

CellField CellField::constant(const Grid& grid, double value) {
  return CellField(grid, std::vector<double>(grid.cell_count(), value));
}

CellField CellField::sample(const Grid& grid, const std::function<double(Point)>& f) {
  std::vector<double> v(grid.cell_count());
  for (int cj = 0; cj < grid.cells_y(); ++cj)
    for (int ci = 0; ci < grid.cells_x(); ++ci) v[grid.cell(ci, cj)] = f(grid.cell_center(ci, cj));
  return CellField(grid, std::move(v));
}

CellField CellField::averages(const GridField& w) {
  std::vector<double> v(w.grid().cell_count());
  for (int c = 0; c < w.grid().cell_count(); ++c) v[c] = w.cell_average(c);
  return CellField(w.grid(), std::move(v));
}

std::array<double, 2> VectorField::interpolate(Point p) const {
  double xi, eta;
  const int c = grid.locate(p, xi, eta);
  const auto n = grid.cell_nodes(c);
  std::array<double, 2> g{};
  if (grid.dim() == 1) {
    g[0] = (1 - xi) * values[n[0]][0] + xi * values[n[1]][0];
    return g;
  }
  const double w[4] = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
  for (int k = 0; k < 4; ++k) {
    g[0] += w[k] * values[n[k]][0];
    g[1] += w[k] * values[n[k]][1];
  }
  return g;
}

namespace {

double derivative(std::span<const double> f, int k, int n, int stride, double h) {
  auto at = [&](int m) { return f[static_cast<std::size_t>(m) * stride]; };
  if (n == 2) return (at(1) - at(0)) / h;
  if (k == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (k == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
  return (at(k + 1) - at(k - 1)) / (2.0 * h);
}

}  // namespace

VectorField gradient(const GridField& w) {
  const Grid& g = w.grid();
  VectorField out{g, std::vector<std::array<double, 2>>(g.node_count(), {0.0, 0.0})};
  const auto v = w.values();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      auto& d = out.values[g.node(i, j)];
      d[0] = derivative(v.subspan(g.node(0, j)), i, g.nx(), 1, g.hx());
      if (g.dim() == 2) d[1] = derivative(v.subspan(g.node(i, 0)), j, g.ny(), g.nx(), g.hy());
    }
  return out;
}

namespace {

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

double edge_factor(double d, double margin) { return smoothstep((d - margin) / margin); }

}  // namespace

double boundary_cutoff(const Grid& grid, Point p, double margin) {
  if (margin <= 0.0) return 1.0;
  const Box& b = grid.box();
  const double lx = b.x1 - b.x0;
  double f = edge_factor((p.x - b.x0) / lx, margin) * edge_factor((b.x1 - p.x) / lx, margin);
  if (grid.dim() == 2) {
    const double ly = b.y1 - b.y0;
    f *= edge_factor((p.y - b.y0) / ly, margin) * edge_factor((b.y1 - p.y) / ly, margin);
  }
  return f;
}

GridField apply_cutoff(const GridField& z, double margin) {
  const Grid& g = z.grid();
  std::vector<double> v(z.values().begin(), z.values().end());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) v[g.node(i, j)] *= boundary_cutoff(g, g.node_point(i, j), margin);
  return GridField(g, std::move(v), z.zero_boundary() || margin > 0.0);
}

}  // namespace nogap
