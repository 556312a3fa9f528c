#include "nogap/cell_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nogap/parallel.hpp"

namespace nogap {

namespace {

constexpr double kGaussX[3] = {0.5 - 0.5 * 0.7745966692414834, 0.5, 0.5 + 0.5 * 0.7745966692414834};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

struct Neumaier {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
    else comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

class CellWorker {
 public:
  CellWorker(std::span<const GridField* const> fields, std::span<const FieldBreak> breaks,
             const CellIntegrand& integrand, const QuadratureOptions& opts)
      : fields_(fields), breaks_(breaks), integrand_(integrand), opts_(opts),
        grid_(fields.front()->grid()), nf_(fields.size()), corner_(4 * nf_), lo_(nf_), hi_(nf_),
        vals_(nf_), break_corner_(4 * breaks.size()) {}

  double cell(int c) {
    const auto nodes = grid_.cell_nodes(c);
    const int corners = grid_.dim() == 2 ? 4 : 2;
    for (std::size_t f = 0; f < nf_; ++f)
      for (int k = 0; k < corners; ++k) corner_[4 * f + k] = (*fields_[f])[nodes[k]];
    int crossing = -1;
    for (std::size_t b = 0; b < breaks_.size(); ++b) {
      bool pos = false, neg = false;
      for (int k = 0; k < corners; ++k) {
        double v = breaks_[b].offset;
        for (std::size_t f = 0; f < nf_; ++f) v += breaks_[b].coef[f] * corner_[4 * f + k];
        break_corner_[4 * b + k] = v;
        pos |= v > 0.0;
        neg |= v < 0.0;
      }
      if (pos && neg && crossing < 0) crossing = static_cast<int>(b);
    }
    const Point origin = grid_.node_point(nodes[0] % grid_.nx(), nodes[0] / grid_.nx());
    if (grid_.dim() == 1) return line_1d(origin) * grid_.hx();
    if (crossing < 0) return smooth_cell(origin) * grid_.hx() * grid_.hy();

    const double* L = &break_corner_[4 * crossing];
    const double dx = std::abs((L[1] - L[0]) + (L[2] - L[3]));
    const double dy = std::abs((L[3] - L[0]) + (L[2] - L[1]));
    return crossing_cell(origin, dy >= dx) * grid_.hx() * grid_.hy();
  }

 private:
  double eval(double xi, double eta, Point origin) {
    for (std::size_t f = 0; f < nf_; ++f) {
      const double* v = &corner_[4 * f];
      vals_[f] = (1 - xi) * (1 - eta) * v[0] + xi * (1 - eta) * v[1] + xi * eta * v[2] +
                 (1 - xi) * eta * v[3];
    }
    return integrand_(vals_, Point{origin.x + xi * grid_.hx(), origin.y + eta * grid_.hy()});
  }

  double smooth_cell(Point origin) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) s += kGaussW[a] * kGaussW[b] * eval(kGaussX[a], kGaussX[b], origin);
    return s;
  }

  // Roots in (0,1) of every break along a segment where all fields are affine.
  void line_roots(std::span<const double> start, std::span<const double> end) {
    roots_.clear();
    roots_.push_back(0.0);
    for (const auto& br : breaks_) {
      double a = br.offset, b = br.offset;
      for (std::size_t f = 0; f < nf_; ++f) {
        a += br.coef[f] * start[f];
        b += br.coef[f] * end[f];
      }
      if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
        const double s = a / (a - b);
        if (s > 0.0 && s < 1.0) roots_.push_back(s);
      }
    }
    roots_.push_back(1.0);
    std::sort(roots_.begin(), roots_.end());
  }

  double line_1d(Point origin) {
    for (std::size_t f = 0; f < nf_; ++f) {
      lo_[f] = corner_[4 * f];
      hi_[f] = corner_[4 * f + 1];
    }
    line_roots(lo_, hi_);
    double s = 0.0;
    for (std::size_t r = 0; r + 1 < roots_.size(); ++r) {
      const double a = roots_[r], len = roots_[r + 1] - roots_[r];
      if (len <= 0.0) continue;
      for (int g = 0; g < 3; ++g) {
        const double xi = a + len * kGaussX[g];
        for (std::size_t f = 0; f < nf_; ++f) vals_[f] = (1 - xi) * lo_[f] + xi * hi_[f];
        s += len * kGaussW[g] * integrand_(vals_, Point{origin.x + xi * grid_.hx(), 0.0});
      }
    }
    return s;
  }

  // Outer coordinates where some break meets one of the two edges parallel to the lines.
  void outer_splits(bool vertical_lines) {
    splits_.clear();
    splits_.push_back(0.0);
    const int ends[2][2] = {{0, vertical_lines ? 1 : 3}, {vertical_lines ? 3 : 1, 2}};
    for (std::size_t b = 0; b < breaks_.size(); ++b) {
      const double* L = &break_corner_[4 * b];
      for (const auto& e : ends) {
        const double a = L[e[0]], c = L[e[1]];
        if ((a < 0.0 && c > 0.0) || (a > 0.0 && c < 0.0)) splits_.push_back(a / (a - c));
      }
    }
    splits_.push_back(1.0);
    std::sort(splits_.begin(), splits_.end());
  }

  double crossing_cell(Point origin, bool vertical_lines) {
    const int m = std::max(1, opts_.crossing_subdivisions);
    outer_splits(vertical_lines);
    double s = 0.0;
    for (std::size_t piece = 0; piece + 1 < splits_.size(); ++piece) {
     const double p0 = splits_[piece], plen = splits_[piece + 1] - p0;
     if (plen <= 0.0) continue;
     const int pm = std::max(2, static_cast<int>(std::ceil(m * plen)));
     for (int sub = 0; sub < pm; ++sub) {
      for (int g = 0; g < 3; ++g) {
        const double outer = p0 + plen * (sub + kGaussX[g]) / pm;
        const double wout = plen * kGaussW[g] / pm;
        for (std::size_t f = 0; f < nf_; ++f) {
          const double* v = &corner_[4 * f];
          if (vertical_lines) {
            lo_[f] = v[0] + outer * (v[1] - v[0]);
            hi_[f] = v[3] + outer * (v[2] - v[3]);
          } else {
            lo_[f] = v[0] + outer * (v[3] - v[0]);
            hi_[f] = v[1] + outer * (v[2] - v[1]);
          }
        }
        line_roots(lo_, hi_);
        double line = 0.0;
        for (std::size_t r = 0; r + 1 < roots_.size(); ++r) {
          const double a = roots_[r], len = roots_[r + 1] - roots_[r];
          if (len <= 0.0) continue;
          for (int q = 0; q < 3; ++q) {
            const double inner = a + len * kGaussX[q];
            for (std::size_t f = 0; f < nf_; ++f) vals_[f] = (1 - inner) * lo_[f] + inner * hi_[f];
            const Point p = vertical_lines
                                ? Point{origin.x + outer * grid_.hx(), origin.y + inner * grid_.hy()}
                                : Point{origin.x + inner * grid_.hx(), origin.y + outer * grid_.hy()};
            line += len * kGaussW[q] * integrand_(vals_, p);
          }
        }
        s += wout * line;
      }
     }
    }
    return s;
  }

  std::span<const GridField* const> fields_;
  std::span<const FieldBreak> breaks_;
  const CellIntegrand& integrand_;
  const QuadratureOptions& opts_;
  const Grid& grid_;
  std::size_t nf_;
  std::vector<double> corner_, lo_, hi_, vals_, break_corner_, roots_, splits_;
};

}  // namespace

double integrate_fields(std::span<const GridField* const> fields,
                        std::span<const FieldBreak> breaks, const CellIntegrand& integrand,
                        const QuadratureOptions& opts) {
  if (fields.empty()) throw std::invalid_argument("integrate_fields: need at least one field");
  const Grid& grid = fields.front()->grid();
  for (const GridField* f : fields)
    if (!(f->grid() == grid)) throw std::invalid_argument("integrate_fields: grids differ");
  for (const auto& b : breaks)
    if (b.coef.size() != fields.size())
      throw std::invalid_argument("integrate_fields: break coefficient count mismatch");

  const int rows = grid.cells_y();
  std::vector<double> row_sum(rows, 0.0);
  parallel_for(static_cast<std::size_t>(rows), [&](std::size_t cj) {
    CellWorker worker(fields, breaks, integrand, opts);
    Neumaier acc;
    for (int ci = 0; ci < grid.cells_x(); ++ci)
      acc.add(worker.cell(grid.cell(ci, static_cast<int>(cj))));
    row_sum[cj] = acc.value();
  });
  Neumaier total;
  for (double r : row_sum) total.add(r);
  return total.value();
}

}  // namespace nogap
