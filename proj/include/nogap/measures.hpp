#pragma once

#include <memory>
#include <vector>

#include "nogap/grid.hpp"
#include "nogap/level_set.hpp"
#include "nogap/piecewise_convex.hpp"

namespace nogap {

// Density on one kink level set of the adjoint.
struct SurfacePart {
  int level = 0;  // index into the kink list of j
  std::shared_ptr<const LevelSetMesh> mesh;
  std::vector<double> v2;  // one value per mesh element
};

// v1 lambda + sum_i v2_i H^{d-1} restricted to {w = b_i}.
class StructuredMeasure {
 public:
  explicit StructuredMeasure(CellField v1, std::vector<SurfacePart> surface = {});
  static StructuredMeasure zero(const Grid& grid);

  const CellField& v1() const { return v1_; }
  const std::vector<SurfacePart>& surface() const { return surface_; }
  const Grid& grid() const { return v1_.grid(); }

  StructuredMeasure scaled(double s) const;
  StructuredMeasure operator+(const StructuredMeasure& o) const;

 private:
  CellField v1_;
  std::vector<SurfacePart> surface_;
};

struct KinkWeights {
  std::vector<double> levels;
  std::vector<double> weights;

  static KinkWeights of(const PiecewiseConvexFn& j);
  // a_i when w sits within tol of b_i, 0 otherwise.
  double at(double w, double tol = 0.0) const;
};

// One mesh per kink of j, in kink order.
std::vector<std::shared_ptr<const LevelSetMesh>> kink_meshes(const PiecewiseConvexFn& j,
                                                             const GridField& w);

double m_norm(const StructuredMeasure& mu);
// Cell part integrates psi over each cell by 3x3 Gauss; surface part uses element midpoints.
double pair(const StructuredMeasure& mu, const PointFunction& psi);
// Cell part uses the exact cell average of the bilinear interpolant.
double pair(const StructuredMeasure& mu, const GridField& psi);

// sum over cells of |cell| g(u_c), +inf if some u_c leaves dom g.
double G_value(const PiecewiseConvexFn& g, const CellField& u);

struct SubgradientCheck {
  bool holds = true;
  double sup_residual = 0.0;
  CellField residual;
};

// Distance of u_c to the subdifferential of j = g* at the cell-center value of w.
SubgradientCheck subgradient_check(const PiecewiseConvexFn& g, const CellField& u,
                                   const GridField& w, double tol = 1e-8);

struct GSecondOptions {
  // Cell values of w this close to a node of j (relative to max |w|) are moved onto it.
  double tol_sign = 1e-9;
};

// Cell value of w used by the volume term, after the sign-band snap.
double snapped_cell_value(const PiecewiseConvexFn& j, const GridField& w, int cell,
                          const GSecondOptions& opts = {});

struct GSecond {
  double surface = 0.0;
  double volume = 0.0;
  double total() const { return surface + volume; }
  bool finite() const { return total() < kInf; }
};

// G''(u, w; mu) for G = int g(u) with j = g*, split into its surface and volume terms.
GSecond G_second_parts(const PiecewiseConvexFn& j, const GridField& w,
                       const StructuredMeasure& mu, const GSecondOptions& opts = {});
double G_second(const PiecewiseConvexFn& j, const GridField& w, const StructuredMeasure& mu,
                const GSecondOptions& opts = {});

}  // namespace nogap
