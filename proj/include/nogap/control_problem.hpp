#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <vector>

#include "nogap/grid.hpp"
#include "nogap/measures.hpp"

namespace nogap {

enum class Reaction { kZero, kLinear, kCubic };

// -Laplace(y) + c(x) r(y) = u in the domain, y = 0 on the boundary, r in {0, y, y^3}.
struct SemilinearProblem {
  Grid grid;
  Reaction reaction = Reaction::kZero;
  GridField coef;  // c >= 0 at the nodes
  GridField y_d;

  SemilinearProblem(Grid grid, Reaction reaction, GridField coef, GridField y_d);
  static SemilinearProblem linear(Grid grid, GridField y_d);

  double a(int node, double y) const;
  double a_y(int node, double y) const;
  double a_yy(int node, double y) const;
};

struct NewtonOptions {
  double tol = 1e-10;  // sup-norm residual relative to max(1, |load|_inf)
  int max_iter = 50;
};

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

// Nodal load density of a cell field: 1/4 (1/2 in dim 1) of the sum of adjacent cell values.
// Boundary entries are kept for mass bookkeeping; the Dirichlet solves ignore them.
std::vector<double> nodal_load(const CellField& u);
// Nodal load density of a structured measure; element masses v2 |e| go to the corners of the
// element's cell with bilinear weights at its midpoint.
std::vector<double> nodal_load(const StructuredMeasure& mu);

GridField solve_state(const SemilinearProblem& p, const CellField& u, const NewtonOptions& opts = {});
GridField solve_state_load(const SemilinearProblem& p, const std::vector<double>& load,
                           const NewtonOptions& opts = {});
GridField solve_adjoint(const SemilinearProblem& p, const GridField& y);

// Lumped tracking objective sum_n |cell| (y_n - y_d,n)^2 / 2 over interior nodes.
double F_objective(const SemilinearProblem& p, const GridField& y);
double F_value(const SemilinearProblem& p, const CellField& u, const NewtonOptions& opts = {});
// Adjoint state phi_u; F'(u) v = pair(v, phi_u).
GridField F_prime(const SemilinearProblem& p, const CellField& u, const NewtonOptions& opts = {});

// Discrete operator -Laplace + diag(weight) applied to y (interior rows; boundary entries 0).
std::vector<double> apply_operator(const Grid& grid, const std::vector<double>& weight,
                                   const GridField& y);

// Sparse nodal load density: (node, value) pairs.
using SparseLoad = std::vector<std::pair<int, double>>;

// Linearization at u frozen with one factorization of -Laplace + diag(a_y(y)).
class QuadraticFormF {
 public:
  QuadraticFormF(const SemilinearProblem& p, const CellField& u, const NewtonOptions& opts = {});
  ~QuadraticFormF();
  QuadraticFormF(QuadraticFormF&&) noexcept;
  QuadraticFormF& operator=(QuadraticFormF&&) noexcept;

  const GridField& state() const { return y_; }
  const GridField& adjoint() const { return phi_; }
  const std::vector<double>& reaction_weight() const { return reaction_; }
  const std::vector<double>& kappa() const { return kappa_; }
  const Grid& grid() const { return y_.grid(); }

  GridField linearized_solve(const StructuredMeasure& mu) const;
  GridField linearized_solve_load(const std::vector<double>& load) const;
  double form(const GridField& z1, const GridField& z2) const;
  double F_second(const StructuredMeasure& mu1, const StructuredMeasure& mu2) const;
  double F_second(const StructuredMeasure& mu) const { return F_second(mu, mu); }
  // Matrix of form(z_k, z_l) for the responses z_k to the given loads.
  Eigen::MatrixXd gram(const std::vector<SparseLoad>& loads) const;

 private:
  struct Solver;
  std::unique_ptr<Solver> solver_;
  GridField y_, phi_;
  std::vector<double> reaction_, kappa_;
};

}  // namespace nogap
