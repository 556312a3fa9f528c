#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nogap/control_problem.hpp"
#include "nogap/level_set.hpp"
#include "nogap/measures.hpp"
#include "nogap/piecewise_convex.hpp"

namespace nogap {

// min_u F(u) + int g(u) with F the tracking functional of `pde`; j = g*.
struct OptimalControlProblem {
  SemilinearProblem pde;
  PiecewiseConvexFn g;
  PiecewiseConvexFn j;

  OptimalControlProblem(SemilinearProblem pde, PiecewiseConvexFn g);
  double objective(const CellField& u, const NewtonOptions& opts = {}) const;
};

struct FirstOrderReport {
  bool holds = false;
  double sup_residual = 0.0;
  GridField w{Grid::interval(2, 0.0, 1.0), {0.0, 0.0}};  // -F'(u)
  NondegeneracyReport nondegeneracy;
  StructuralConstant structural;
  StructureCheck curvature;  // C_j over the range of w
  std::vector<double> levels;
};

struct FirstOrderOptions {
  double tol = 1e-8;
  double eta = 0.1;  // tube radius for the structural constant, relative to max |w|
  NewtonOptions newton;
};

FirstOrderReport first_order_check(const OptimalControlProblem& p, const CellField& u,
                                   const FirstOrderOptions& opts = {});

enum class Cone { kFree, kNonneg, kNonpos };
enum class DofKind { kSurface, kVolume };

const char* to_string(Cone c);

// One coordinate of the structured-measure subspace, measured by its mass.
struct Dof {
  DofKind kind = DofKind::kSurface;
  int level = -1;  // kink index for surface dofs
  int index = 0;   // element index (surface) or cell index (volume)
  Cone cone = Cone::kFree;
  double weight_pos = 0.0;  // G'' = weight * mass^2 for positive mass
  double weight_neg = 0.0;
  double extent = 0.0;  // element length or cell area

  bool allows(int sign) const {
    return sign > 0 ? cone != Cone::kNonpos : sign < 0 ? cone != Cone::kNonneg : true;
  }
  double weight(double x) const { return x >= 0.0 ? weight_pos : weight_neg; }
};

struct AdmissibleSpace {
  Grid grid;
  std::vector<std::shared_ptr<const LevelSetMesh>> meshes;  // one per kink of j
  std::vector<Dof> dofs;

  int surface_count() const;
  int volume_count() const;
  int cone_count(Cone c) const;
  // Mass coordinates to densities.
  StructuredMeasure measure(const Eigen::VectorXd& x) const;
};

struct SpaceOptions {
  GSecondOptions g_second;
  // Level-set elements shorter than this fraction of h carry no dof.
  double min_element = 1e-6;
};

AdmissibleSpace admissible_space(const PiecewiseConvexFn& j, const GridField& w,
                                 const SpaceOptions& opts = {});

// Q(x) = x' F x + sum_k weight_k(sign x_k) x_k^2 in mass coordinates.
struct AssembledQ {
  AdmissibleSpace space;
  Eigen::MatrixXd F;

  int size() const { return static_cast<int>(space.dofs.size()); }
  double value(const Eigen::VectorXd& x) const;
  double g_part(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  double max_weight() const;
  // Minimum of the diagonal part over the unit sphere, 1 / sum_k 1/weight_k.
  double diagonal_scale() const;
};

struct AssembleOptions {
  bool include_F = true;  // false gives the pure G'' form
};

AssembledQ assemble_Q(const AdmissibleSpace& space, const QuadraticFormF& F,
                      const AssembleOptions& opts = {});
// Diagonal-only form, mainly for tests of min_rayleigh.
AssembledQ diagonal_Q(std::vector<double> weights, std::vector<Cone> cones = {});
AssembledQ dense_Q(Eigen::MatrixXd F, std::vector<double> weights, std::vector<Cone> cones = {});

struct RayleighOptions {
  int exact_max_dofs = 12;
  int eigen_max_dofs = 1200;
  int starts = 4;
  int iterations = 200;
  // Active-set steps after each descent, while the support has fewer than polish_max_support dofs.
  int polish_steps = 50;
  int polish_max_support = 64;
  // Stop early when the best value is within this relative gap of the spectral lower bound.
  double certify_gap = 1e-6;
  std::uint64_t seed = 1;
};

struct RayleighResult {
  double q_min = kInf;
  Eigen::VectorXd argmin;
  double lower_bound = -kInf;
  bool exact = false;
  bool budget_exhausted = false;
  std::string method;
};

// Smallest Q over {sum |x_k| = 1} intersected with the sign cones.
RayleighResult min_rayleigh(const AssembledQ& Q, const RayleighOptions& opts = {});

enum class Verdict { kPositive, kIndefinite, kDegenerate, kFirstOrderFail };
const char* to_string(Verdict v);

struct SOCOptions {
  FirstOrderOptions first_order;
  SpaceOptions space;
  AssembleOptions assemble;
  RayleighOptions rayleigh;
  double tol_pos = 1e-8;  // relative to min of the G'' part on the unit sphere
};

struct SOCReport {
  Verdict verdict = Verdict::kFirstOrderFail;
  FirstOrderReport first_order;
  int surface_dofs = 0, volume_dofs = 0;
  int nonneg_dofs = 0, nonpos_dofs = 0;
  RayleighResult rayleigh;
  double tol_pos = 0.0;
  double c_pred = 0.0;
  double eps_suggested = 0.0;
  double argmin_surface_mass = 0.0, argmin_volume_mass = 0.0;
  std::vector<std::string> notes;
  std::shared_ptr<const AssembledQ> Q;
};

SOCReport soc_verdict(const OptimalControlProblem& p, const CellField& u, const SOCOptions& opts = {});

}  // namespace nogap
