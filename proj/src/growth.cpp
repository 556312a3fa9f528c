#include "nogap/growth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nogap/parallel.hpp"

namespace nogap {

using std::numbers::pi;

const char* to_string(SampleFamily f) {
  switch (f) {
    case SampleFamily::kShift: return "shift";
    case SampleFamily::kBump: return "bump";
    case SampleFamily::kMixed: return "mixed";
    case SampleFamily::kTransported: return "transported";
  }
  return "?";
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

std::vector<Point> cell_centers(const Grid& g) {
  std::vector<Point> c(g.cell_count());
  for (int k = 0; k < g.cell_count(); ++k) c[k] = g.cell_center(k % g.cells_x(), k / g.cells_x());
  return c;
}

double l1_distance(const std::vector<double>& a, std::span<const double> b, double area) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += std::abs(a[c] - b[c]);
  return s * area;
}

double select(const PiecewiseConvexFn& j, double w) {
  const Interval d = j.subdifferential(w);
  return d.lo == d.hi ? d.lo : 0.5 * (d.lo + d.hi);
}

// Random smooth field with sup norm about 1 on the box.
struct SmoothField {
  double offset = 0.0;
  struct Mode {
    double amp, kx, ky, px, py;
  };
  std::vector<Mode> modes;
  Box box;

  static SmoothField draw(Rng& rng, const Box& box, int modes) {
    SmoothField f;
    f.box = box;
    f.offset = uniform(rng, -1.0, 1.0);
    for (int m = 0; m < modes; ++m)
      f.modes.push_back({uniform(rng, -1.0, 1.0), std::floor(uniform(rng, 1.0, 5.0)),
                         std::floor(uniform(rng, 1.0, 5.0)), uniform(rng, 0.0, 2 * pi),
                         uniform(rng, 0.0, 2 * pi)});
    return f;
  }
  double operator()(Point p) const {
    const double x = (p.x - box.x0) / (box.x1 - box.x0), y = (p.y - box.y0) / (box.y1 - box.y0);
    double v = offset;
    for (const auto& m : modes) v += m.amp * std::sin(pi * m.kx * x + m.px) * std::sin(pi * m.ky * y + m.py);
    return v / (1.0 + static_cast<double>(modes.size()));
  }
};

struct Bump {
  Point center;
  double radius = 0.1;
  double sign = 1.0;

  static Bump draw(Rng& rng, const Grid& g) {
    const Box& b = g.box();
    Bump out;
    out.center = {uniform(rng, b.x0, b.x1), g.dim() == 2 ? uniform(rng, b.y0, b.y1) : 0.0};
    out.radius = uniform(rng, 0.03, 0.3) * g.diameter();
    out.sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    return out;
  }
  double operator()(Point p) const {
    const double dx = p.x - center.x, dy = p.y - center.y;
    return sign * std::exp(-(dx * dx + dy * dy) / (radius * radius));
  }
};

// Nodal direction z with u(w + t z) - u(w) ~ t x for the structured direction x.
std::vector<double> transport_direction(const AssembledQ& Q, const Eigen::VectorXd& x,
                                        const PiecewiseConvexFn& j, const GridField& w) {
  const Grid& g = Q.space.grid;
  std::vector<double> sum(g.node_count(), 0.0), count(g.node_count(), 0.0);
  const int corners = g.dim() == 2 ? 4 : 2;
  for (int k = 0; k < Q.size(); ++k) {
    if (x[k] == 0.0) continue;
    const Dof& d = Q.space.dofs[k];
    double z = 0.0;
    int cell = d.index;
    if (d.kind == DofKind::kSurface) {
      const auto& el = Q.space.meshes[d.level]->elements[d.index];
      z = x[k] / d.extent * el.grad_norm / (2.0 * j.kinks()[d.level].weight);
      cell = el.cell;
    } else {
      const double wc = snapped_cell_value(j, w, d.index);
      z = x[k] / d.extent / j.smooth_curvature(wc, x[k] > 0.0 ? 1 : -1);
    }
    const auto n = g.cell_nodes(cell);
    for (int c = 0; c < corners; ++c) {
      sum[n[c]] += z;
      count[n[c]] += 1.0;
    }
  }
  for (int n = 0; n < g.node_count(); ++n)
    if (count[n] > 0.0) sum[n] /= count[n];
  return sum;
}

}  // namespace

GrowthResult growth_test(const OptimalControlProblem& p, const CellField& u_bar, const SOCReport& soc,
                         const GrowthOptions& opts) {
  if (soc.verdict == Verdict::kFirstOrderFail)
    throw std::invalid_argument("growth_test: the first-order condition does not hold");
  const Grid& g = u_bar.grid();
  const GridField& w = soc.first_order.w;
  const double area = g.cell_measure();
  const int cells = g.cell_count();
  const auto centers = cell_centers(g);
  std::vector<double> wc(cells);
  for (int c = 0; c < cells; ++c) wc[c] = w.cell_average(c);
  const Interval dom = p.g.domain();
  const double span = dom.bounded() ? dom.hi - dom.lo : 1.0;
  const double wscale = std::max(w.max_abs(), 1e-12);

  GrowthResult out;
  out.eps = opts.eps > 0.0 ? opts.eps : soc.eps_suggested;
  if (!(out.eps > 0.0)) throw std::invalid_argument("growth_test: no positive eps available");
  const auto ub = u_bar.values();

  struct Draw {
    SampleFamily family;
    std::vector<double> u;
  };
  std::vector<Draw> draws;
  auto accept = [&](SampleFamily f, std::vector<double> u) {
    const double m = l1_distance(u, ub, area);
    if (!(m > 0.0) || m > out.eps) return false;
    draws.push_back({f, std::move(u)});
    return true;
  };
  auto shifted = [&](const SmoothField& s, double rho) {
    std::vector<double> u(cells);
    for (int c = 0; c < cells; ++c) u[c] = select(p.j, wc[c] + rho * s(centers[c]));
    return u;
  };
  auto bumped = [&](std::vector<double> u, const Bump& b, double tau) {
    for (int c = 0; c < cells; ++c) u[c] = std::clamp(u[c] + tau * b(centers[c]), dom.lo, dom.hi);
    return u;
  };

  // Transported argmin of Q along a geometric ladder of step sizes.
  const int n_transport = soc.Q && soc.rayleigh.argmin.size() > 0
                              ? static_cast<int>(std::lround(opts.transported_fraction * opts.samples))
                              : 0;
  if (n_transport > 0) {
    const auto zn = transport_direction(*soc.Q, soc.rayleigh.argmin, p.j, w);
    const GridField z(g, zn);
    std::vector<double> zc(cells);
    double zmax = 0.0;
    for (int c = 0; c < cells; ++c) {
      zc[c] = z.cell_average(c);
      zmax = std::max(zmax, std::abs(zc[c]));
    }
    if (zmax > 0.0) {
      double t = wscale / zmax;
      auto at = [&](double tt) {
        std::vector<double> u(cells);
        for (int c = 0; c < cells; ++c) u[c] = select(p.j, wc[c] + tt * zc[c]);
        return u;
      };
      for (int k = 0; k < 200 && l1_distance(at(t), ub, area) > out.eps; ++k) t *= 0.5;
      for (int k = 0; k < 4 * n_transport && static_cast<int>(draws.size()) < n_transport; ++k, t *= 0.8)
        accept(SampleFamily::kTransported, at(t));
    }
  }

  Rng rng(opts.seed);
  const int n_random = opts.samples - static_cast<int>(draws.size());
  for (int k = 0; k < n_random; ++k) {
    const auto family = static_cast<SampleFamily>(k % 3);
    bool ok = false;
    for (int attempt = 0; attempt <= opts.max_redraws && !ok; ++attempt) {
      if (attempt > 0) ++out.rejected;
      const auto s = SmoothField::draw(rng, g.box(), 3);
      const auto b = Bump::draw(rng, g);
      double rho = wscale * std::pow(10.0, uniform(rng, -3.0, 0.0));
      double tau = span * std::pow(10.0, uniform(rng, -3.0, 0.0));
      for (int halving = 0; halving < 80 && !ok; ++halving, rho *= 0.5, tau *= 0.5) {
        std::vector<double> u;
        if (family == SampleFamily::kShift)
          u = shifted(s, rho);
        else if (family == SampleFamily::kBump)
          u = bumped(std::vector<double>(ub.begin(), ub.end()), b, tau);
        else
          u = bumped(shifted(s, rho), b, tau);
        const double m = l1_distance(u, ub, area);
        if (m == 0.0) break;
        if (m <= out.eps) ok = accept(family, std::move(u));
      }
    }
  }

  const double phi0 = p.objective(u_bar, opts.newton);
  out.samples.resize(draws.size());
  parallel_for(draws.size(), [&](std::size_t k) {
    const double l1 = l1_distance(draws[k].u, ub, area);
    const double gap = p.objective(CellField(g, draws[k].u), opts.newton) - phi0;
    out.samples[k] = {draws[k].family, l1, gap, gap / (0.5 * l1 * l1)};
  });
  for (const auto& s : out.samples)
    if (s.quotient < out.c_emp) {
      out.c_emp = s.quotient;
      out.worst = s;
    }
  return out;
}

namespace {

double max_curvature(const PiecewiseConvexFn& j, double lo, double hi) {
  double m = std::max(j.smooth_curvature(lo, 1), j.smooth_curvature(hi, -1));
  for (double b : j.breakpoints())
    if (b > lo && b < hi) m = std::max({m, j.smooth_curvature(b, -1), j.smooth_curvature(b, 1)});
  return m;
}

}  // namespace

DescentAscentReport descent_ascent_constants(const PiecewiseConvexFn& g, const GridField& w_bar,
                                             const CellField& u_bar, double eta,
                                             const DescentAscentOptions& opts) {
  if (!(eta > 0.0)) throw std::invalid_argument("descent_ascent_constants: need eta > 0");
  if (!(opts.ladder_ratio > 1.0)) throw std::invalid_argument("descent_ascent_constants: ladder ratio must exceed 1");
  const PiecewiseConvexFn j = conjugate(g);
  const Grid& grid = w_bar.grid();
  const int cells = grid.cell_count();
  const double area = grid.cell_measure();
  std::vector<double> wc(cells);
  for (int c = 0; c < cells; ++c) wc[c] = w_bar.cell_average(c);
  const auto ub = u_bar.values();

  DescentAscentReport rep;
  rep.eta = eta;
  std::vector<double> levels;
  double weight_sum = 0.0;
  for (const auto& k : j.kinks()) {
    levels.push_back(k.location);
    weight_sum += k.weight;
  }
  double lo = kInf, hi = -kInf;
  for (double v : wc) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!levels.empty()) rep.structural_c = structural_constant(w_bar, levels, eta).c;
  rep.lambda_theory = max_curvature(j, lo - eta, hi + eta) * grid.volume() + 4.0 * rep.structural_c * weight_sum;

  auto rem = [&](int c, double d) {
    const double v = j(wc[c] + d);
    return v == kInf ? kInf : v - j(wc[c]) - ub[c] * d;
  };
  auto worst = [&](double rho) {
    double s = 0.0;
    for (int c = 0; c < cells; ++c) s += std::max(rem(c, rho), rem(c, -rho));
    return s * area;
  };

  // Below the distance to the nearest kink each remainder is at most half the local curvature
  // times rho^2; above it, R is nondecreasing in rho, so bracketing the ladder bounds R / rho^2.
  double kink_gap = kInf;
  for (double v : wc)
    for (double b : levels) kink_gap = std::min(kink_gap, std::abs(v - b));
  const double rho0 = std::min(kink_gap, eta);
  if (rho0 > 0.0) {
    double small = 0.0;
    for (int c = 0; c < cells; ++c) small += max_curvature(j, wc[c] - rho0, wc[c] + rho0);
    rep.lambda_emp = small * area;
    double prev = rho0;
    while (prev < eta) {
      const double next = std::min(eta, prev * opts.ladder_ratio);
      const double r = worst(next);
      rep.lambda_emp = std::max(rep.lambda_emp, 2.0 * r / (prev * prev));
      rep.lambda_sampled = std::max(rep.lambda_sampled, 2.0 * r / (next * next));
      prev = next;
    }
  } else {
    rep.lambda_emp = rep.lambda_sampled = kInf;
  }

  const auto centers = cell_centers(grid);
  Rng rng(opts.seed);
  const double J0 = [&] {
    double s = 0.0;
    for (int c = 0; c < cells; ++c) s += j(wc[c]);
    return s * area;
  }();
  for (int k = 0; k < opts.descent_samples; ++k) {
    const double rho = eta * std::pow(uniform(rng, 0.0, 1.0), 3.0);
    std::vector<double> d(cells);
    if (k % 3 == 0) {
      const auto f = SmoothField::draw(rng, grid.box(), 3);
      for (int c = 0; c < cells; ++c) d[c] = f(centers[c]);
    } else if (k % 3 == 1) {
      const auto b = Bump::draw(rng, grid);
      for (int c = 0; c < cells; ++c) d[c] = b(centers[c]);
    } else {
      for (int c = 0; c < cells; ++c) d[c] = uniform(rng, -1.0, 1.0);
    }
    double sup = 0.0;
    for (double v : d) sup = std::max(sup, std::abs(v));
    if (!(sup > 0.0)) continue;
    double r = 0.0, dsup = 0.0;
    for (int c = 0; c < cells; ++c) {
      d[c] *= rho / sup;
      dsup = std::max(dsup, std::abs(d[c]));
      r += rem(c, d[c]);
    }
    r *= area;
    const double bound = 0.5 * rep.lambda_emp * dsup * dsup;
    if (bound > 0.0) rep.max_descent_ratio = std::max(rep.max_descent_ratio, r / bound);
    if (r > bound + 1e-12 * (1.0 + std::abs(J0))) ++rep.descent_violations;
  }

  const Interval dom = g.domain();
  const double span = dom.bounded() ? dom.hi - dom.lo : 1.0;
  const double radius = eta * rep.lambda_emp;
  double G0 = 0.0;
  for (int c = 0; c < cells; ++c) G0 += g(ub[c]);
  G0 *= area;
  for (int k = 0; k < opts.ascent_samples; ++k) {
    std::vector<double> y(ub.begin(), ub.end());
    const double tau = span * std::pow(10.0, uniform(rng, -3.0, 0.0));
    if (k % 2 == 0) {
      const auto b = Bump::draw(rng, grid);
      for (int c = 0; c < cells; ++c) y[c] = std::clamp(y[c] + tau * b(centers[c]), dom.lo, dom.hi);
    } else {
      for (int c = 0; c < cells; ++c) y[c] = std::clamp(y[c] + tau * uniform(rng, -1.0, 1.0), dom.lo, dom.hi);
    }
    double l1 = l1_distance(y, ub, area);
    if (std::isfinite(radius) && l1 > radius) {
      const double s = uniform(rng, 0.0, 1.0) * radius / l1;
      for (int c = 0; c < cells; ++c) y[c] = ub[c] + s * (y[c] - ub[c]);
      l1 = l1_distance(y, ub, area);
    }
    if (!(l1 > 0.0)) continue;
    double gap = 0.0;
    for (int c = 0; c < cells; ++c) gap += g(y[c]) - (y[c] - ub[c]) * wc[c];
    gap = gap * area - G0;
    rep.min_ascent_quotient = std::min(rep.min_ascent_quotient, gap / (l1 * l1));
    const double need = std::isfinite(rep.lambda_emp) ? l1 * l1 / (2.0 * rep.lambda_emp) : 0.0;
    if (gap < need - 1e-12 * (1.0 + std::abs(G0))) ++rep.ascent_violations;
  }
  return rep;
}

}  // namespace nogap
