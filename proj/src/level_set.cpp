#include "nogap/level_set.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>

#include "nogap/cell_quadrature.hpp"

namespace nogap {

double LevelSetMesh::total_measure() const {
  double s = 0.0;
  for (const auto& e : elements) s += e.measure;
  return s;
}

namespace {

SurfaceElement make_element(const VectorField& grad, Point a, Point b, int cell) {
  SurfaceElement e;
  e.a = a;
  e.b = b;
  e.midpoint = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  e.measure = grad.grid.dim() == 2 ? std::hypot(b.x - a.x, b.y - a.y) : 1.0;
  const auto g = grad.interpolate(e.midpoint);
  e.grad_norm = std::hypot(g[0], g[1]);
  e.cell = cell;
  return e;
}

void extract_1d(const GridField& w, double b, const VectorField& grad, LevelSetMesh& mesh) {
  const Grid& g = w.grid();
  for (int i = 0; i + 1 < g.nx(); ++i) {
    const double v0 = w.at(i) - b, v1 = w.at(i + 1) - b;
    if ((v0 > 0.0) == (v1 > 0.0)) continue;
    const double s = v0 / (v0 - v1);
    const double x0 = g.node_point(i).x, x1 = g.node_point(i + 1).x;
    const Point p{s <= 0.0 ? x0 : (s >= 1.0 ? x1 : x0 + s * (x1 - x0)), 0.0};
    if (p.x == g.box().x0 || p.x == g.box().x1) continue;
    mesh.elements.push_back(make_element(grad, p, p, i));
  }
}

void extract_2d(const GridField& w, double b, const VectorField& grad, LevelSetMesh& mesh) {
  const Grid& g = w.grid();
  for (int cj = 0; cj < g.cells_y(); ++cj)
    for (int ci = 0; ci < g.cells_x(); ++ci) {
      const int c = g.cell(ci, cj);
      const auto n = g.cell_nodes(c);
      const double v[4] = {w[n[0]] - b, w[n[1]] - b, w[n[2]] - b, w[n[3]] - b};
      if (v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0 && v[3] == 0.0)
        throw DegenerateCellError(c, "extract_level_set: cell (" + std::to_string(ci) + ", " +
                                         std::to_string(cj) + ") lies entirely on level " +
                                         std::to_string(b));
      const bool up[4] = {v[0] > 0.0, v[1] > 0.0, v[2] > 0.0, v[3] > 0.0};
      Point corner[4];
      for (int k = 0; k < 4; ++k) corner[k] = g.node_point(n[k] % g.nx(), n[k] / g.nx());

      Point cross[4];
      bool has[4];
      bool boundary_node[4];  // crossing sits exactly on a boundary node
      int count = 0;
      for (int e = 0; e < 4; ++e) {
        const int a = e, bb = (e + 1) % 4;
        has[e] = up[a] != up[bb];
        if (!has[e]) continue;
        ++count;
        const double s = v[a] / (v[a] - v[bb]);
        boundary_node[e] = (s <= 0.0 && g.on_boundary(n[a] % g.nx(), n[a] / g.nx())) ||
                           (s >= 1.0 && g.on_boundary(n[bb] % g.nx(), n[bb] / g.nx()));
        cross[e] = s <= 0.0   ? corner[a]
                   : s >= 1.0 ? corner[bb]
                              : Point{corner[a].x + s * (corner[bb].x - corner[a].x),
                                      corner[a].y + s * (corner[bb].y - corner[a].y)};
      }
      auto add = [&](int e0, int e1) {
        const Point p = cross[e0], q = cross[e1];
        if (p.x == q.x && p.y == q.y) return;
        if (boundary_node[e0] && boundary_node[e1]) return;
        mesh.elements.push_back(make_element(grad, p, q, c));
      };
      if (count == 2) {
        int e0 = -1, e1 = -1;
        for (int e = 0; e < 4; ++e)
          if (has[e]) (e0 < 0 ? e0 : e1) = e;
        add(e0, e1);
      } else if (count == 4) {
        ++mesh.ambiguous_cells;
        const bool center_up = 0.25 * (v[0] + v[1] + v[2] + v[3]) > 0.0;
        if (center_up == up[0]) {
          add(0, 1);
          add(2, 3);
        } else {
          add(3, 0);
          add(1, 2);
        }
      }
    }
}

}  // namespace

LevelSetMesh extract_level_set(const GridField& w, double b) {
  LevelSetMesh mesh;
  mesh.level = b;
  const VectorField grad = gradient(w);
  if (w.grid().dim() == 1) extract_1d(w, b, grad, mesh);
  else extract_2d(w, b, grad, mesh);
  return mesh;
}

double surface_integral(const LevelSetMesh& mesh, const PointFunction& psi) {
  double s = 0.0;
  for (const auto& e : mesh.elements) s += psi(e.midpoint) * e.measure;
  return s;
}

double surface_integral(const LevelSetMesh& mesh, const GridField& psi) {
  return surface_integral(mesh, [&](Point p) { return psi.interpolate(p); });
}

double weighted_surface_integral(const LevelSetMesh& mesh, const PointFunction& psi) {
  double s = 0.0;
  for (const auto& e : mesh.elements) s += psi(e.midpoint) / e.grad_norm * e.measure;
  return s;
}

double weighted_surface_integral(const LevelSetMesh& mesh, const GridField& psi) {
  return weighted_surface_integral(mesh, [&](Point p) { return psi.interpolate(p); });
}

double tube_measure(const GridField& w, double b, double eps) {
  if (eps < 0.0) throw std::invalid_argument("tube_measure: eps must be >= 0");
  if (eps == 0.0) return 0.0;
  const GridField* fields[] = {&w};
  const FieldBreak breaks[] = {{{1.0}, -(b + eps)}, {{1.0}, -(b - eps)}};
  return integrate_fields(fields, breaks, [b, eps](std::span<const double> v, Point) {
    return std::abs(v[0] - b) <= eps ? 1.0 : 0.0;
  });
}

StructuralConstant structural_constant(const GridField& w, const std::vector<double>& levels,
                                       double eta, int eps_points) {
  if (!(eta > 0.0) || eps_points < 1)
    throw std::invalid_argument("structural_constant: need eta > 0 and eps_points >= 1");
  StructuralConstant out;
  for (int k = 1; k <= eps_points; ++k) {
    const double eps = eta * k / eps_points;
    double tube = 0.0;
    for (double b : levels) tube += tube_measure(w, b, eps);
    out.eps.push_back(eps);
    out.quotients.push_back(tube / eps);
    out.c = std::max(out.c, tube / eps);
  }
  for (double b : levels)
    out.surface_bound += 2.0 * weighted_surface_integral(extract_level_set(w, b),
                                                         [](Point) { return 1.0; });
  return out;
}

double default_degeneracy_threshold(const GridField& w) {
  return 1e-8 * w.max_abs() / w.grid().diameter();
}

NondegeneracyReport check_nondegeneracy(const GridField& w, const std::vector<double>& levels,
                                        double eps_degenerate) {
  NondegeneracyReport r;
  r.threshold = eps_degenerate >= 0.0 ? eps_degenerate : default_degeneracy_threshold(w);
  constexpr std::size_t kMaxWitnesses = 16;
  for (double b : levels) {
    try {
      const LevelSetMesh mesh = extract_level_set(w, b);
      for (const auto& e : mesh.elements) {
        r.min_grad_norm = std::min(r.min_grad_norm, e.grad_norm);
        if (e.grad_norm <= r.threshold) {
          r.ok = false;
          if (r.witnesses.size() < kMaxWitnesses) r.witnesses.push_back(e.midpoint);
        }
      }
    } catch (const DegenerateCellError& err) {
      r.ok = false;
      const Grid& g = w.grid();
      r.witnesses.push_back(g.cell_center(err.cell() % g.cells_x(), err.cell() / g.cells_x()));
      r.message = err.what();
    }
  }
  // A discrete critical point on a level: every gradient component changes sign strictly (or
  // vanishes) over the 3x3 node patch while the patch values straddle the level.
  const Grid& g = w.grid();
  const VectorField grad = gradient(w);
  const int dims = g.dim();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (g.on_boundary(i, j)) continue;
      double lo = kInf, hi = -kInf;
      std::array<double, 2> gmin{kInf, kInf}, gmax{-kInf, -kInf};
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (dims == 1 && dj != 0) continue;
          const int n = g.node(i + di, j + dj);
          lo = std::min(lo, w[n]);
          hi = std::max(hi, w[n]);
          for (int c = 0; c < dims; ++c) {
            gmin[c] = std::min(gmin[c], grad.values[n][c]);
            gmax[c] = std::max(gmax[c], grad.values[n][c]);
          }
        }
      bool flat = true;
      for (int c = 0; c < dims; ++c)
        flat = flat && ((gmin[c] < -r.threshold && gmax[c] > r.threshold) ||
                        std::max(-gmin[c], gmax[c]) <= r.threshold);
      if (!flat) continue;
      for (double b : levels)
        if (lo <= b && b <= hi) {
          r.ok = false;
          if (r.witnesses.size() < kMaxWitnesses) r.witnesses.push_back(g.node_point(i, j));
          if (r.message.empty()) r.message = "critical point of w on a kink level set";
          break;
        }
    }
  if (!r.ok && r.message.empty()) r.message = "gradient vanishes on a kink level set";
  return r;
}

}  // namespace nogap
