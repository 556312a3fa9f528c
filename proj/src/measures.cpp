#include "nogap/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nogap {

namespace {

constexpr double kGaussX[3] = {0.5 - 0.5 * 0.7745966692414834, 0.5, 0.5 + 0.5 * 0.7745966692414834};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double cell_mean(const Grid& g, int c, const PointFunction& psi) {
  const auto n = g.cell_nodes(c);
  const Point o = g.node_point(n[0] % g.nx(), n[0] / g.nx());
  double s = 0.0;
  if (g.dim() == 1) {
    for (int a = 0; a < 3; ++a) s += kGaussW[a] * psi({o.x + kGaussX[a] * g.hx(), 0.0});
    return s;
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      s += kGaussW[a] * kGaussW[b] * psi({o.x + kGaussX[a] * g.hx(), o.y + kGaussX[b] * g.hy()});
  return s;
}

double surface_pair(const StructuredMeasure& mu, const PointFunction& psi) {
  double s = 0.0;
  for (const auto& part : mu.surface())
    for (std::size_t e = 0; e < part.v2.size(); ++e)
      s += part.v2[e] * psi(part.mesh->elements[e].midpoint) * part.mesh->elements[e].measure;
  return s;
}

}  // namespace

StructuredMeasure::StructuredMeasure(CellField v1, std::vector<SurfacePart> surface)
    : v1_(std::move(v1)), surface_(std::move(surface)) {
  for (const auto& p : surface_) {
    if (!p.mesh) throw std::invalid_argument("StructuredMeasure: surface part without a mesh");
    if (p.v2.size() != p.mesh->elements.size())
      throw std::invalid_argument("StructuredMeasure: v2 size does not match the mesh");
    if (p.level < 0) throw std::invalid_argument("StructuredMeasure: negative level index");
  }
}

StructuredMeasure StructuredMeasure::zero(const Grid& grid) {
  return StructuredMeasure(CellField::constant(grid, 0.0));
}

StructuredMeasure StructuredMeasure::scaled(double s) const {
  std::vector<double> v(v1_.values().begin(), v1_.values().end());
  for (double& x : v) x *= s;
  std::vector<SurfacePart> parts = surface_;
  for (auto& p : parts)
    for (double& x : p.v2) x *= s;
  return StructuredMeasure(CellField(grid(), std::move(v)), std::move(parts));
}

StructuredMeasure StructuredMeasure::operator+(const StructuredMeasure& o) const {
  if (!(grid() == o.grid())) throw std::invalid_argument("StructuredMeasure: grids differ");
  std::vector<double> v(v1_.values().begin(), v1_.values().end());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] += o.v1()[static_cast<int>(c)];
  std::vector<SurfacePart> parts = surface_;
  for (const auto& q : o.surface()) {
    auto it = std::find_if(parts.begin(), parts.end(), [&](const SurfacePart& p) {
      return p.level == q.level && p.mesh == q.mesh;
    });
    if (it == parts.end()) {
      parts.push_back(q);
      continue;
    }
    for (std::size_t e = 0; e < q.v2.size(); ++e) it->v2[e] += q.v2[e];
  }
  return StructuredMeasure(CellField(grid(), std::move(v)), std::move(parts));
}

KinkWeights KinkWeights::of(const PiecewiseConvexFn& j) {
  KinkWeights k;
  for (const auto& kink : j.kinks()) {
    k.levels.push_back(kink.location);
    k.weights.push_back(kink.weight);
  }
  return k;
}

double KinkWeights::at(double w, double tol) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (std::abs(w - levels[i]) <= tol) return weights[i];
  return 0.0;
}

std::vector<std::shared_ptr<const LevelSetMesh>> kink_meshes(const PiecewiseConvexFn& j,
                                                             const GridField& w) {
  std::vector<std::shared_ptr<const LevelSetMesh>> out;
  for (const auto& k : j.kinks())
    out.push_back(std::make_shared<const LevelSetMesh>(extract_level_set(w, k.location)));
  return out;
}

double m_norm(const StructuredMeasure& mu) {
  double s = 0.0;
  for (double v : mu.v1().values()) s += std::abs(v);
  s *= mu.grid().cell_measure();
  for (const auto& part : mu.surface())
    for (std::size_t e = 0; e < part.v2.size(); ++e)
      s += std::abs(part.v2[e]) * part.mesh->elements[e].measure;
  return s;
}

double pair(const StructuredMeasure& mu, const PointFunction& psi) {
  const Grid& g = mu.grid();
  double s = 0.0;
  for (int c = 0; c < g.cell_count(); ++c)
    if (mu.v1()[c] != 0.0) s += mu.v1()[c] * cell_mean(g, c, psi);
  return s * g.cell_measure() + surface_pair(mu, psi);
}

double pair(const StructuredMeasure& mu, const GridField& psi) {
  if (!(psi.grid() == mu.grid())) throw std::invalid_argument("pair: grids differ");
  const Grid& g = mu.grid();
  double s = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) s += mu.v1()[c] * psi.cell_average(c);
  return s * g.cell_measure() + surface_pair(mu, [&](Point p) { return psi.interpolate(p); });
}

double G_value(const PiecewiseConvexFn& g, const CellField& u) {
  double s = 0.0;
  for (double v : u.values()) {
    if (!g.domain().contains(v)) return kInf;
    s += g(v);
  }
  return s * u.grid().cell_measure();
}

SubgradientCheck subgradient_check(const PiecewiseConvexFn& g, const CellField& u,
                                   const GridField& w, double tol) {
  if (!(u.grid() == w.grid())) throw std::invalid_argument("subgradient_check: grids differ");
  const PiecewiseConvexFn j = conjugate(g);
  std::vector<double> r(u.values().size());
  double sup = 0.0;
  for (std::size_t c = 0; c < r.size(); ++c) {
    const double wc = w.cell_average(static_cast<int>(c));
    r[c] = j.domain().contains(wc) ? j.subdifferential(wc).distance(u[static_cast<int>(c)]) : kInf;
    sup = std::max(sup, r[c]);
  }
  return {sup <= tol, sup, CellField(u.grid(), std::move(r))};
}

double snapped_cell_value(const PiecewiseConvexFn& j, const GridField& w, int cell,
                          const GSecondOptions& opts) {
  const double wc = w.cell_average(cell);
  const double band = opts.tol_sign * std::max(w.max_abs(), 1e-300);
  for (double b : j.nodes())
    if (std::abs(wc - b) <= band) return b;
  return wc;
}

GSecond G_second_parts(const PiecewiseConvexFn& j, const GridField& w,
                       const StructuredMeasure& mu, const GSecondOptions& opts) {
  if (!(w.grid() == mu.grid())) throw std::invalid_argument("G_second: grids differ");
  const auto& kinks = j.kinks();
  const double level_tol = 1e-12 * std::max(1.0, w.max_abs());
  GSecond out;
  for (const auto& part : mu.surface()) {
    if (part.level >= static_cast<int>(kinks.size()) ||
        std::abs(part.mesh->level - kinks[part.level].location) > level_tol)
      throw std::invalid_argument("G_second: surface density on a level that is not a kink of j");
    const double a = kinks[part.level].weight;
    for (std::size_t e = 0; e < part.v2.size(); ++e) {
      const auto& el = part.mesh->elements[e];
      out.surface += el.grad_norm / (2.0 * a) * part.v2[e] * part.v2[e] * el.measure;
    }
  }
  const Grid& g = mu.grid();
  double vol = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    const double v = mu.v1()[c];
    if (v == 0.0) continue;
    const double h = half_second_conjugate(j, snapped_cell_value(j, w, c, opts), v);
    if (h == kInf) {
      out.volume = kInf;
      return out;
    }
    vol += h;
  }
  out.volume = 2.0 * vol * g.cell_measure();
  return out;
}

double G_second(const PiecewiseConvexFn& j, const GridField& w, const StructuredMeasure& mu,
                const GSecondOptions& opts) {
  return G_second_parts(j, w, mu, opts).total();
}

}  // namespace nogap
