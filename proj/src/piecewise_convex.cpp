#include "nogap/piecewise_convex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nogap/limit_study.hpp"

namespace nogap {

namespace {

constexpr double kSlopeTol = 1e-12;
constexpr double kValueTol = 1e-10;

double point_inside(double lo, double hi) {
  if (lo == -kInf && hi == kInf) return 0.0;
  if (lo == -kInf) return hi - 1.0;
  if (hi == kInf) return lo + 1.0;
  return 0.5 * (lo + hi);
}

void require_convex_piece(Quadratic& piece) {
  if (piece.p >= 0.0) return;
  const double scale = std::max({1.0, std::abs(piece.q), std::abs(piece.r)});
  if (piece.p < -kSlopeTol * scale)
    throw NonConvexError("piece with negative curvature p = " + std::to_string(piece.p));
  piece.p = 0.0;
}

}  // namespace

double Interval::distance(double w) const {
  if (w < lo) return lo - w;
  if (w > hi) return w - hi;
  return 0.0;
}

PiecewiseConvexFn::PiecewiseConvexFn(std::vector<double> breakpoints,
                                     std::vector<Quadratic> pieces, std::vector<Kink> kinks,
                                     Interval domain)
    : breakpoints_(std::move(breakpoints)),
      pieces_(std::move(pieces)),
      kinks_(std::move(kinks)),
      domain_(domain) {
  if (!(domain_.lo <= domain_.hi)) throw std::invalid_argument("domain must satisfy lo <= hi");
  if (pieces_.size() != breakpoints_.size() + 1)
    throw std::invalid_argument("need exactly one more piece than breakpoints");
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    const double x = breakpoints_[k];
    if (!std::isfinite(x) || x <= domain_.lo || x >= domain_.hi)
      throw std::invalid_argument("breakpoints must lie strictly inside the domain");
    if (k > 0 && x <= breakpoints_[k - 1])
      throw std::invalid_argument("breakpoints must be strictly increasing");
  }
  for (auto& piece : pieces_) {
    if (!std::isfinite(piece.p) || !std::isfinite(piece.q) || !std::isfinite(piece.r))
      throw std::invalid_argument("piece coefficients must be finite");
    require_convex_piece(piece);
  }
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    const double x = breakpoints_[k];
    const Quadratic& a = pieces_[k];
    const Quadratic& b = pieces_[k + 1];
    const double va = a(x), vb = b(x);
    const double sa = a.slope(x), sb = b.slope(x);
    const double vscale = std::max({1.0, std::abs(va), std::abs(vb), std::abs(x * sa)});
    if (std::abs(va - vb) > kValueTol * vscale)
      throw std::invalid_argument("smooth part is discontinuous at breakpoint " +
                                  std::to_string(x));
    const double sscale = std::max({1.0, std::abs(sa), std::abs(sb)});
    if (sb < sa - 1e-10 * sscale)
      throw NonConvexError("slope decreases across breakpoint " + std::to_string(x));
    if (std::abs(sb - sa) > 1e-10 * sscale)
      throw std::invalid_argument("smooth part is not C1 at breakpoint " + std::to_string(x) +
                                  "; use from_pieces to split slope jumps into kinks");
  }
  std::sort(kinks_.begin(), kinks_.end(),
            [](const Kink& a, const Kink& b) { return a.location < b.location; });
  for (std::size_t i = 0; i < kinks_.size(); ++i) {
    const Kink& k = kinks_[i];
    if (!(k.weight > 0.0) || !std::isfinite(k.weight))
      throw NonConvexError("kink weights must be positive");
    if (!std::isfinite(k.location) || k.location <= domain_.lo || k.location >= domain_.hi)
      throw std::invalid_argument("kinks must lie strictly inside the domain");
    if (i > 0 && k.location == kinks_[i - 1].location)
      throw std::invalid_argument("kink locations must be distinct");
  }
}

PiecewiseConvexFn PiecewiseConvexFn::from_pieces(std::vector<double> breakpoints,
                                                 std::vector<Quadratic> pieces,
                                                 Interval domain) {
  if (pieces.size() != breakpoints.size() + 1)
    throw std::invalid_argument("need exactly one more piece than breakpoints");
  for (auto& piece : pieces) require_convex_piece(piece);

  std::vector<Kink> kinks;
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    const double x = breakpoints[k];
    const double va = pieces[k](x), vb = pieces[k + 1](x);
    const double sa = pieces[k].slope(x), sb = pieces[k + 1].slope(x);
    const double vscale = std::max({1.0, std::abs(va), std::abs(vb), std::abs(x * sa)});
    if (std::abs(va - vb) > kValueTol * vscale)
      throw std::invalid_argument("function is discontinuous at " + std::to_string(x));
    const double jump = sb - sa;
    const double sscale = std::max({1.0, std::abs(sa), std::abs(sb)});
    if (jump < -kSlopeTol * sscale)
      throw NonConvexError("slope decreases at " + std::to_string(x));
    if (jump > kSlopeTol * sscale) kinks.push_back({x, 0.5 * jump});
  }

  std::vector<double> bounds;
  bounds.push_back(domain.lo);
  bounds.insert(bounds.end(), breakpoints.begin(), breakpoints.end());
  bounds.push_back(domain.hi);
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const double mid = point_inside(bounds[k], bounds[k + 1]);
    for (const Kink& kink : kinks) {
      const double s = mid > kink.location ? 1.0 : -1.0;
      pieces[k].q -= kink.weight * s;
      pieces[k].r += kink.weight * s * kink.location;
    }
  }

  std::vector<double> merged_breaks;
  std::vector<Quadratic> merged;
  merged.push_back(pieces[0]);
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    const Quadratic& a = merged.back();
    const Quadratic& b = pieces[k + 1];
    const double scale =
        std::max({1.0, std::abs(a.q), std::abs(a.r), std::abs(b.q), std::abs(b.r)});
    const bool same = std::abs(a.p - b.p) <= 1e-14 * std::max(1.0, std::abs(a.p)) &&
                      std::abs(a.q - b.q) <= 1e-14 * scale &&
                      std::abs(a.r - b.r) <= 1e-14 * scale;
    if (same) continue;
    merged_breaks.push_back(breakpoints[k]);
    merged.push_back(b);
  }
  return PiecewiseConvexFn(std::move(merged_breaks), std::move(merged), std::move(kinks),
                           domain);
}

PiecewiseConvexFn PiecewiseConvexFn::from_samples(std::span<const double> u,
                                                  std::span<const double> f) {
  if (u.size() != f.size() || u.size() < 2)
    throw std::invalid_argument("from_samples needs at least two (u, f) pairs");
  std::vector<double> breaks(u.begin() + 1, u.end() - 1);
  std::vector<Quadratic> pieces;
  for (std::size_t k = 0; k + 1 < u.size(); ++k) {
    if (!(u[k + 1] > u[k])) throw std::invalid_argument("sample abscissae must increase");
    const double slope = (f[k + 1] - f[k]) / (u[k + 1] - u[k]);
    pieces.push_back({0.0, slope, f[k] - slope * u[k]});
  }
  return from_pieces(std::move(breaks), std::move(pieces), Interval{u.front(), u.back()});
}

PiecewiseConvexFn PiecewiseConvexFn::quadratic(double p, double q, double r) {
  return PiecewiseConvexFn({}, {Quadratic{p, q, r}});
}

std::size_t PiecewiseConvexFn::piece_right(double w) const {
  return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), w) -
                                  breakpoints_.begin());
}

std::size_t PiecewiseConvexFn::piece_left(double w) const {
  return static_cast<std::size_t>(std::lower_bound(breakpoints_.begin(), breakpoints_.end(), w) -
                                  breakpoints_.begin());
}

double PiecewiseConvexFn::operator()(double w) const {
  if (!domain_.contains(w)) return kInf;
  double v = pieces_[piece_right(w)](w);
  for (const Kink& k : kinks_) v += k.weight * std::abs(w - k.location);
  return v;
}

PiecewiseConvexFn PiecewiseConvexFn::smooth_part() const {
  return PiecewiseConvexFn(breakpoints_, pieces_, {}, domain_);
}

double PiecewiseConvexFn::smooth_value(double w) const { return pieces_[piece_right(w)](w); }

double PiecewiseConvexFn::smooth_slope(double w) const {
  return pieces_[piece_right(w)].slope(w);
}

double PiecewiseConvexFn::smooth_curvature(double w, int side) const {
  const std::size_t k = side > 0 ? piece_right(w) : piece_left(w);
  return 2.0 * pieces_[k].p;
}

double PiecewiseConvexFn::smooth_remainder(double w, double d) const {
  if (d == 0.0) return 0.0;
  const double end = w + d;
  double cur = w;
  double acc = 0.0;  // |j0'(cur) - j0'(w)|, accumulated exactly piece by piece
  double total = 0.0;
  if (d > 0.0) {
    std::size_t k = piece_right(w);
    while (cur < end) {
      const double seg_end = k < breakpoints_.size() ? std::min(end, breakpoints_[k]) : end;
      const double len = seg_end - cur;
      total += len * (acc + pieces_[k].p * len);
      acc += 2.0 * pieces_[k].p * len;
      cur = seg_end;
      ++k;
    }
  } else {
    std::size_t k = piece_left(w);
    while (cur > end) {
      const double seg_end = k > 0 ? std::max(end, breakpoints_[k - 1]) : end;
      const double len = cur - seg_end;
      total += len * (acc + pieces_[k].p * len);
      acc += 2.0 * pieces_[k].p * len;
      cur = seg_end;
      if (k == 0) break;
      --k;
    }
  }
  return total;
}

double PiecewiseConvexFn::left_slope(double w) const {
  if (!domain_.contains(w)) throw std::domain_error("left_slope: point outside the domain");
  if (w == domain_.lo) return -kInf;
  double s = pieces_[piece_left(w)].slope(w);
  for (const Kink& k : kinks_) s += k.weight * (w > k.location ? 1.0 : -1.0);
  return s;
}

double PiecewiseConvexFn::right_slope(double w) const {
  if (!domain_.contains(w)) throw std::domain_error("right_slope: point outside the domain");
  if (w == domain_.hi) return kInf;
  double s = pieces_[piece_right(w)].slope(w);
  for (const Kink& k : kinks_) s += k.weight * (w >= k.location ? 1.0 : -1.0);
  return s;
}

Interval PiecewiseConvexFn::subdifferential(double w) const {
  return {left_slope(w), right_slope(w)};
}

double PiecewiseConvexFn::remainder(double w, double d) const {
  if (!domain_.contains(w + d)) return kInf;
  double v = smooth_remainder(w, d);
  for (const Kink& k : kinks_) {
    const double before = w - k.location;
    const double after = w + d - k.location;
    if (before * after < 0.0) v += 2.0 * k.weight * std::abs(after);
  }
  return v;
}

bool PiecewiseConvexFn::is_kink(double w) const {
  return std::any_of(kinks_.begin(), kinks_.end(),
                     [w](const Kink& k) { return k.location == w; });
}

std::vector<double> PiecewiseConvexFn::nodes() const {
  std::vector<double> all = breakpoints_;
  for (const Kink& k : kinks_) all.push_back(k.location);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

Quadratic PiecewiseConvexFn::full_quadratic_between(double lo, double hi) const {
  const double mid = point_inside(lo, hi);
  Quadratic out = pieces_[piece_right(mid)];
  for (const Kink& k : kinks_) {
    const double s = mid > k.location ? 1.0 : -1.0;
    out.q += k.weight * s;
    out.r -= k.weight * s * k.location;
  }
  return out;
}

PiecewiseConvexFn conjugate(const PiecewiseConvexFn& f) {
  const Interval dom = f.domain();
  if (dom.lo == dom.hi) {
    const double c = dom.lo;
    return PiecewiseConvexFn({}, {Quadratic{0.0, c, -f(c)}});
  }

  struct Segment {
    double lo, hi;
    Quadratic quad;
  };
  std::vector<double> points;
  points.push_back(dom.lo);
  for (double x : f.nodes()) points.push_back(x);
  points.push_back(dom.hi);
  std::vector<Segment> segs;
  for (std::size_t k = 0; k + 1 < points.size(); ++k)
    segs.push_back({points[k], points[k + 1], f.full_quadratic_between(points[k], points[k + 1])});

  struct YPiece {
    double lo, hi;
    Quadratic quad;
  };
  std::vector<YPiece> out;
  auto emit = [&out](double lo, double hi, Quadratic q) {
    if (hi > lo) out.push_back({lo, hi, q});
  };

  if (dom.lo > -kInf) emit(-kInf, segs.front().quad.slope(dom.lo), {0.0, dom.lo, -f(dom.lo)});
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& s = segs[k];
    const Quadratic& Q = s.quad;
    if (Q.p > 0.0) {
      const double ylo = s.lo > -kInf ? Q.slope(s.lo) : -kInf;
      const double yhi = s.hi < kInf ? Q.slope(s.hi) : kInf;
      emit(ylo, yhi, {0.25 / Q.p, -0.5 * Q.q / Q.p, 0.25 * Q.q * Q.q / Q.p - Q.r});
    }
    if (k + 1 < segs.size()) {
      const double u = s.hi;
      emit(Q.slope(u), segs[k + 1].quad.slope(u), {0.0, u, -f(u)});
    }
  }
  if (dom.hi < kInf) emit(segs.back().quad.slope(dom.hi), kInf, {0.0, dom.hi, -f(dom.hi)});

  if (out.empty()) {
    // f is affine on the whole line: f* = -r + indicator of {q}.
    const Quadratic& Q = segs.front().quad;
    return PiecewiseConvexFn({}, {Quadratic{0.0, 0.0, -Q.r}}, {}, Interval{Q.q, Q.q});
  }

  std::vector<double> breaks;
  std::vector<Quadratic> pieces;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i > 0) breaks.push_back(out[i].lo);
    pieces.push_back(out[i].quad);
  }
  return PiecewiseConvexFn::from_pieces(std::move(breaks), std::move(pieces),
                                        Interval{out.front().lo, out.back().hi});
}

double conjugate_numeric(const PiecewiseConvexFn& f, double w, const SamplingGrid& grid) {
  const Interval dom = f.domain();
  const double lo = std::max(grid.lo, dom.lo);
  const double hi = std::min(grid.hi, dom.hi);
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("conjugate_numeric: sampling grid misses the domain");
  if (grid.points < 3) throw std::invalid_argument("conjugate_numeric: need >= 3 grid points");
  auto phi = [&](double u) { return u * w - f(u); };
  if (lo == hi) return phi(lo);

  const int n = grid.points;
  const double h = (hi - lo) / (n - 1);
  int best = 0;
  double best_val = -kInf;
  for (int k = 0; k < n; ++k) {
    const double u = k == n - 1 ? hi : lo + k * h;
    const double v = phi(u);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  if ((best == 0 && lo > dom.lo) || (best == n - 1 && hi < dom.hi))
    throw TruncationError("conjugate_numeric: maximizer on the truncated grid boundary at w = " +
                          std::to_string(w));

  double a = lo + std::max(best - 1, 0) * h;
  double b = std::min(hi, lo + std::min(best + 1, n - 1) * h);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = phi(c), fd = phi(d);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = phi(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = phi(c);
    }
  }
  return std::max({best_val, fc, fd});
}

double directional_derivative(const PiecewiseConvexFn& f, double w, double z) {
  if (!f.domain().contains(w))
    throw std::domain_error("directional_derivative: point outside the domain");
  if (z == 0.0) return 0.0;
  return z > 0.0 ? z * f.right_slope(w) : z * f.left_slope(w);
}

SecondDerivData second_derivative_data(const PiecewiseConvexFn& f, double w) {
  SecondDerivData d;
  d.jpp_plus = f.smooth_curvature(w, +1);
  d.jpp_minus = f.smooth_curvature(w, -1);
  const auto& kinks = f.kinks();
  for (std::size_t i = 0; i < kinks.size(); ++i)
    if (kinks[i].location == w) d.kink_hit = static_cast<int>(i);
  return d;
}

double second_dir_derivative(const PiecewiseConvexFn& f, double w, double z) {
  if (!f.domain().contains(w))
    throw std::domain_error("second_dir_derivative: point outside the domain");
  if (z == 0.0) return 0.0;
  if ((z > 0.0 && w == f.domain().hi) || (z < 0.0 && w == f.domain().lo)) return kInf;
  if (f.is_kink(w)) return kInf;
  return z * z * f.smooth_curvature(w, z > 0.0 ? 1 : -1);
}

double half_second_conjugate(const PiecewiseConvexFn& f, double w, double v) {
  if (v == 0.0) return 0.0;
  const double d = f.smooth_curvature(w, v > 0.0 ? 1 : -1);
  return d > 0.0 ? 0.5 * v * v / d : kInf;
}

StructureCheck check_structure_assumption(const PiecewiseConvexFn& f, Interval W,
                                          const StructureOptions& opts) {
  if (!W.bounded() || W.lo > W.hi)
    throw std::invalid_argument("check_structure_assumption: W must be a bounded interval");
  const double lo = std::max(W.lo, f.domain().lo);
  const double hi = std::min(W.hi, f.domain().hi);
  StructureCheck out;
  if (lo > hi) return out;

  std::vector<double> probes;
  const auto n = static_cast<long>(std::ceil((hi - lo) * opts.points_per_unit)) + 1;
  for (long k = 0; k < n; ++k) probes.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
  for (double x : f.breakpoints())
    if (x >= lo && x <= hi) probes.push_back(x);

  for (double w : probes) {
    const double cp = f.smooth_curvature(w, +1);
    const double cm = f.smooth_curvature(w, -1);
    if (cp <= opts.tol || cm <= opts.tol) continue;
    const double ratio = std::max(cp / cm, cm / cp);
    if (ratio > out.witness_ratio) {
      out.witness_ratio = ratio;
      out.witness = w;
    }
  }
  out.c_j = out.witness_ratio;
  out.holds = out.c_j <= opts.c_max;
  return out;
}

D2Equivalence d2_equivalence_check(const PiecewiseConvexFn& f, double w, double z,
                                   std::span<const double> t_seq) {
  if (z == 0.0) throw std::invalid_argument("d2_equivalence_check: z must be nonzero");
  if (f.is_kink(w)) throw std::invalid_argument("d2_equivalence_check: w is a kink location");
  std::vector<double> lhs, rhs;
  const double s0 = f.smooth_slope(w);
  for (double t : t_seq) {
    lhs.push_back(2.0 * f.smooth_remainder(w, t * z) / (t * t));
    rhs.push_back((f.smooth_slope(w + t * z) - s0) / t * z);
  }
  const Extrapolation el = extrapolate(t_seq, lhs);
  const Extrapolation er = extrapolate(t_seq, rhs);
  D2Equivalence out;
  out.lhs = el.limit;
  out.rhs = er.limit;
  out.converged = el.warning.empty() && er.warning.empty();
  return out;
}

}  // namespace nogap
