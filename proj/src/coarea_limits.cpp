#include "nogap/coarea_limits.hpp"

#include <algorithm>
#include <cmath>

namespace nogap {

namespace {

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

GridField prepared_direction(const GridField& z, const StudyOptions& opts) {
  return opts.cutoff_margin > 0.0 ? apply_cutoff(z, opts.cutoff_margin) : z;
}

double default_noise_floor(const Grid& g) {
  const double h = std::max(g.hx(), g.dim() == 2 ? g.hy() : 0.0);
  const Box& b = g.box();
  const double extent = g.dim() == 2 ? std::min(b.x1 - b.x0, b.y1 - b.y0) : b.x1 - b.x0;
  return std::pow(h / extent, 1.5);
}

double resolved_t(const GridField& w, const GridField& z, const std::vector<double>& levels,
                  const StudyOptions& opts) {
  if (!(opts.resolved_cells > 0.0)) return 0.0;
  const Grid& g = w.grid();
  const double h = std::max(g.hx(), g.dim() == 2 ? g.hy() : 0.0);
  double grad_min = kInf, z_max = 0.0;
  for (double b : levels)
    for (const auto& e : extract_level_set(w, b).elements) {
      grad_min = std::min(grad_min, e.grad_norm);
      z_max = std::max(z_max, std::abs(z.interpolate(e.midpoint)));
    }
  if (!(z_max > 0.0) || !std::isfinite(grad_min)) return 0.0;
  return opts.resolved_cells * h * grad_min / z_max;
}

LimitStudy finish(std::string name, const std::vector<double>& t, std::vector<double> q,
                  double target, double t_res, const StudyOptions& opts, const Grid& g) {
  LimitStudy s;
  s.name = std::move(name);
  s.t = t;
  s.quotients = std::move(q);
  s.target = target;
  s.t_resolved = t_res;
  std::size_t end = 0;
  while (end < s.t.size() && s.t[end] >= t_res) ++end;
  if (end < 3) end = s.t.size();
  s.fit_end = end;
  const double floor = opts.noise_floor >= 0.0 ? opts.noise_floor : default_noise_floor(g);
  s.fit = extrapolate(std::span(s.t).first(end), std::span(s.quotients).first(end), floor);
  return s;
}

// Mismatch-set integral of f(w, z) over ω with both fields interpolated.
double mismatch_integral(const GridField& w, const GridField& z, double t, bool split_on_z,
                         const std::function<double(double, double, Point)>& f,
                         const QuadratureOptions& q) {
  const GridField* fields[] = {&w, &z};
  std::vector<FieldBreak> breaks = {{{1.0, 0.0}, 0.0}, {{1.0, t}, 0.0}};
  if (split_on_z) breaks.push_back({{0.0, 1.0}, 0.0});
  return integrate_fields(
      fields, breaks,
      [&](std::span<const double> v, Point p) {
        return sgn(v[0]) != sgn(v[0] + t * v[1]) ? f(v[0], v[1], p) : 0.0;
      },
      q);
}

// Breaks where j or its smooth part changes formula along w and along w + t z.
std::vector<FieldBreak> formula_breaks(const PiecewiseConvexFn& j, double t, bool split_on_z) {
  std::vector<FieldBreak> breaks;
  for (double x : j.nodes()) {
    breaks.push_back({{1.0, 0.0}, -x});
    if (t != 0.0) breaks.push_back({{1.0, t}, -x});
  }
  if (split_on_z) breaks.push_back({{0.0, 1.0}, 0.0});
  return breaks;
}

double kink_selection(double shifted, double base, double b) {
  if (shifted > b) return 1.0;
  if (shifted < b) return -1.0;
  return base < b ? 1.0 : -1.0;
}

double selected_gradient(const PiecewiseConvexFn& j, double w, double shifted) {
  double x = j.smooth_slope(shifted);
  for (const Kink& k : j.kinks()) x += k.weight * kink_selection(shifted, w, k.location);
  return x;
}

double kink_surface_part(const PiecewiseConvexFn& j, const GridField& w,
                         const PointFunction& density) {
  double s = 0.0;
  for (const Kink& k : j.kinks())
    s += 2.0 * k.weight * weighted_surface_integral(extract_level_set(w, k.location), density);
  return s;
}

}  // namespace

double LimitStudy::mismatch() const {
  const double d = std::abs(limit() - target);
  return target != 0.0 ? d / std::abs(target) : d;
}

MismatchSet sign_mismatch_set(const GridField& w, const GridField& z, double t,
                              const QuadratureOptions& q) {
  if (!(w.grid() == z.grid())) throw std::invalid_argument("sign_mismatch_set: grids differ");
  std::vector<double> ind(w.grid().node_count());
  for (std::size_t n = 0; n < ind.size(); ++n)
    ind[n] = sgn(w[static_cast<int>(n)]) != sgn(w[static_cast<int>(n)] + t * z[static_cast<int>(n)]);
  const double m = t == 0.0 ? 0.0
                            : mismatch_integral(w, z, t, false,
                                                [](double, double, Point) { return 1.0; }, q);
  return {GridField(w.grid(), std::move(ind)), m};
}

LimitStudy limit_a(const GridField& w, const GridField& z_in, const PointFunction& psi,
                   const StudyOptions& opts) {
  const GridField z = prepared_direction(z_in, opts);
  std::vector<double> q;
  for (double t : opts.t)
    q.push_back(mismatch_integral(w, z, t, false,
                                  [&](double, double, Point p) { return psi(p); },
                                  opts.quadrature) /
                t);
  const double target = weighted_surface_integral(
      extract_level_set(w, 0.0), [&](Point p) { return psi(p) * std::abs(z.interpolate(p)); });
  return finish("limit_a", opts.t, std::move(q), target, resolved_t(w, z, {0.0}, opts), opts, w.grid());
}

LimitStudy limit_b(const GridField& w, const GridField& z_in, const PointFunction& psi,
                   const StudyOptions& opts) {
  const GridField z = prepared_direction(z_in, opts);
  std::vector<double> q;
  for (double t : opts.t)
    q.push_back(mismatch_integral(w, z, t, true,
                                  [&](double, double zv, Point p) { return psi(p) * sgn(zv); },
                                  opts.quadrature) /
                t);
  const double target = weighted_surface_integral(
      extract_level_set(w, 0.0), [&](Point p) { return psi(p) * z.interpolate(p); });
  return finish("limit_b", opts.t, std::move(q), target, resolved_t(w, z, {0.0}, opts), opts, w.grid());
}

LimitStudy limit_c(const GridField& w, const GridField& z_in, const StudyOptions& opts) {
  const GridField z = prepared_direction(z_in, opts);
  std::vector<double> q;
  for (double t : opts.t)
    q.push_back(mismatch_integral(w, z, t, false,
                                  [t](double wv, double, Point) { return std::abs(wv) / t; },
                                  opts.quadrature) /
                t);
  const double target = 0.5 * weighted_surface_integral(extract_level_set(w, 0.0), [&](Point p) {
    const double v = z.interpolate(p);
    return v * v;
  });
  return finish("limit_c", opts.t, std::move(q), target, resolved_t(w, z, {0.0}, opts), opts, w.grid());
}

double second_J_target(const PiecewiseConvexFn& j, const GridField& w, const GridField& z,
                       const QuadratureOptions& q) {
  const GridField* fields[] = {&w, &z};
  std::vector<FieldBreak> breaks;
  for (double x : j.breakpoints()) breaks.push_back({{1.0, 0.0}, -x});
  breaks.push_back({{0.0, 1.0}, 0.0});
  const double volume = integrate_fields(
      fields, breaks,
      [&](std::span<const double> v, Point) {
        if (v[1] == 0.0) return 0.0;
        return v[1] * v[1] * j.smooth_curvature(v[0], v[1] > 0.0 ? 1 : -1);
      },
      q);
  return volume + kink_surface_part(j, w, [&](Point p) {
           const double v = z.interpolate(p);
           return v * v;
         });
}

LimitStudy second_quotient_J(const PiecewiseConvexFn& j, const GridField& w,
                             const GridField& z_in, const StudyOptions& opts) {
  const GridField z = prepared_direction(z_in, opts);
  const GridField* fields[] = {&w, &z};
  std::vector<double> q;
  for (double t : opts.t) {
    const auto breaks = formula_breaks(j, t, false);
    const double integral = integrate_fields(
        fields, breaks,
        [&](std::span<const double> v, Point) { return j.remainder(v[0], t * v[1]); },
        opts.quadrature);
    q.push_back(2.0 * integral / (t * t));
  }
  return finish("second_quotient_J", opts.t, std::move(q), second_J_target(j, w, z, opts.quadrature),
                resolved_t(w, z, j.nodes(), opts), opts, w.grid());
}

double subdiff_quotient(const PiecewiseConvexFn& j, const GridField& w, const GridField& z,
                        double t, const PointFunction& psi, const QuadratureOptions& q) {
  if (!(t > 0.0)) throw std::invalid_argument("subdiff_quotient: need t > 0");
  const GridField* fields[] = {&w, &z};
  const auto breaks = formula_breaks(j, t, false);
  return integrate_fields(
      fields, breaks,
      [&](std::span<const double> v, Point p) {
        const double d = selected_gradient(j, v[0], v[0] + t * v[1]) -
                         selected_gradient(j, v[0], v[0]);
        return d / t * psi(p);
      },
      q);
}

double subdiff_norm(const PiecewiseConvexFn& j, const GridField& w, const GridField& z, double t,
                    const QuadratureOptions& q) {
  if (!(t > 0.0)) throw std::invalid_argument("subdiff_norm: need t > 0");
  const GridField* fields[] = {&w, &z};
  const auto breaks = formula_breaks(j, t, false);
  return integrate_fields(
      fields, breaks,
      [&](std::span<const double> v, Point) {
        return std::abs(selected_gradient(j, v[0], v[0] + t * v[1]) -
                        selected_gradient(j, v[0], v[0])) /
               t;
      },
      q);
}

SubdiffTarget subdiff_target(const PiecewiseConvexFn& j, const GridField& w, const GridField& z,
                             const PointFunction& psi, const QuadratureOptions& q) {
  const GridField* fields[] = {&w, &z};
  std::vector<FieldBreak> breaks;
  for (double x : j.breakpoints()) breaks.push_back({{1.0, 0.0}, -x});
  breaks.push_back({{0.0, 1.0}, 0.0});
  auto density = [&](std::span<const double> v) {
    if (v[1] == 0.0) return 0.0;
    return j.smooth_curvature(v[0], v[1] > 0.0 ? 1 : -1) * v[1];
  };
  SubdiffTarget out;
  out.pairing = integrate_fields(
                    fields, breaks,
                    [&](std::span<const double> v, Point p) { return density(v) * psi(p); }, q) +
                kink_surface_part(j, w, [&](Point p) { return z.interpolate(p) * psi(p); });
  out.norm = integrate_fields(
                 fields, breaks,
                 [&](std::span<const double> v, Point) { return std::abs(density(v)); }, q) +
             kink_surface_part(j, w, [&](Point p) { return std::abs(z.interpolate(p)); });
  return out;
}

SubdiffStudy subdiff_study(const PiecewiseConvexFn& j, const GridField& w, const GridField& z_in,
                           const PointFunction& psi, const StudyOptions& opts) {
  const GridField z = prepared_direction(z_in, opts);
  std::vector<double> pairing, norm;
  for (double t : opts.t) {
    pairing.push_back(subdiff_quotient(j, w, z, t, psi, opts.quadrature));
    norm.push_back(subdiff_norm(j, w, z, t, opts.quadrature));
  }
  const SubdiffTarget target = subdiff_target(j, w, z, psi, opts.quadrature);
  const double t_res = resolved_t(w, z, j.nodes(), opts);
  return {finish("subdiff_pairing", opts.t, std::move(pairing), target.pairing, t_res, opts, w.grid()),
          finish("subdiff_norm", opts.t, std::move(norm), target.norm, t_res, opts, w.grid())};
}

BracketCertificate bracket_1d(const GridField& w, const GridField& z, double s0, double slope,
                              double eps) {
  const Grid& g = w.grid();
  if (g.dim() != 1) throw std::invalid_argument("bracket_1d: needs a 1-d grid");
  BracketCertificate c;
  c.eps = eps;
  if (!(std::abs(slope) > eps)) return c;
  const double z0 = z.interpolate({s0, 0.0});
  // Largest delta on which both local conditions hold at every node.
  double delta = std::min(s0 - g.box().x0, g.box().x1 - s0);
  for (int i = 0; i < g.nx(); ++i) {
    const double s = g.node_point(i).x;
    const double d = std::abs(s - s0);
    if (d == 0.0 || d >= delta) continue;
    const bool ok = std::abs(z[i] - z0) <= eps && std::abs(w[i] - slope * (s - s0)) <= eps * d;
    if (!ok) delta = d;
  }
  // Shrink delta to the last node that still satisfies the conditions.
  double inner = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    const double d = std::abs(g.node_point(i).x - s0);
    if (d < delta) inner = std::max(inner, d);
  }
  delta = inner;
  if (delta <= 0.0) return c;
  // Outside the certified window |w| stays above m, so Omega_t is inside it once t |z| < m.
  double m = kInf, zmax = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    zmax = std::max(zmax, std::abs(z[i]));
    if (std::abs(g.node_point(i).x - s0) >= delta) m = std::min(m, std::abs(w[i]));
  }
  c.delta = delta;
  // Inside it, Omega_t stays within t (|z0| + eps) / (|slope| - eps) of s0.
  c.t0 = std::min(zmax > 0.0 ? m / zmax : kInf,
                  delta * (std::abs(slope) - eps) / (std::abs(z0) + eps));
  c.lower = (std::abs(z0) - 2.0 * eps) / (std::abs(slope) + eps);
  c.upper = (std::abs(z0) + 2.0 * eps) / (std::abs(slope) - eps);
  c.certified = true;
  return c;
}

}  // namespace nogap
