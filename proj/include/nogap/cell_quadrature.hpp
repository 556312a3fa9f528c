#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nogap/grid.hpp"

namespace nogap {

// Zero set of sum_k coef[k] * field_k + offset, across which the integrand may be non-smooth.
struct FieldBreak {
  std::vector<double> coef;
  double offset = 0.0;
};

// Receives the interpolated field values and the physical point.
using CellIntegrand = std::function<double(std::span<const double> values, Point p)>;

struct QuadratureOptions {
  int crossing_subdivisions = 12;
};

// Integral over the grid domain of an integrand of the multilinear interpolants of `fields`.
// On lines through the cells the fields are affine, so every break is located exactly and
// each smooth segment gets a three-point Gauss rule.
double integrate_fields(std::span<const GridField* const> fields,
                        std::span<const FieldBreak> breaks, const CellIntegrand& integrand,
                        const QuadratureOptions& opts = {});

}  // namespace nogap
