#include "nogap/control_problem.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>

#include "nogap/parallel.hpp"

namespace nogap {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Interior node numbering: boundary nodes carry the Dirichlet value 0.
struct Interior {
  explicit Interior(const Grid& g) : grid(g) {
    index.assign(g.node_count(), -1);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        if (!g.on_boundary(i, j)) {
          index[g.node(i, j)] = static_cast<int>(nodes.size());
          nodes.push_back(g.node(i, j));
        }
  }
  int size() const { return static_cast<int>(nodes.size()); }

  Vec gather(std::span<const double> v) const {
    Vec out(size());
    for (int k = 0; k < size(); ++k) out[k] = v[nodes[k]];
    return out;
  }
  GridField scatter(const Vec& x) const {
    std::vector<double> v(grid.node_count(), 0.0);
    for (int k = 0; k < size(); ++k) v[nodes[k]] = x[k];
    return GridField(grid, std::move(v), true);
  }

  Grid grid;
  std::vector<int> index;
  std::vector<int> nodes;
};

SpMat assemble(const Interior& in, const std::vector<double>& weight) {
  const Grid& g = in.grid;
  const double ax = 1.0 / (g.hx() * g.hx());
  const double ay = g.dim() == 2 ? 1.0 / (g.hy() * g.hy()) : 0.0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * in.size());
  for (int k = 0; k < in.size(); ++k) {
    const int n = in.nodes[k];
    const int i = n % g.nx(), j = n / g.nx();
    trip.emplace_back(k, k, 2.0 * ax + 2.0 * ay + weight[n]);
    auto link = [&](int ii, int jj, double c) {
      const int m = in.index[g.node(ii, jj)];
      if (m >= 0) trip.emplace_back(k, m, -c);
    };
    link(i - 1, j, ax);
    link(i + 1, j, ax);
    if (g.dim() == 2) {
      link(i, j - 1, ay);
      link(i, j + 1, ay);
    }
  }
  SpMat A(in.size(), in.size());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

double sup(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

SemilinearProblem::SemilinearProblem(Grid g, Reaction r, GridField c, GridField yd)
    : grid(std::move(g)), reaction(r), coef(std::move(c)), y_d(std::move(yd)) {
  if (!(coef.grid() == grid) || !(y_d.grid() == grid))
    throw std::invalid_argument("SemilinearProblem: fields must live on the problem grid");
  for (double v : coef.values())
    if (!(v >= 0.0)) throw std::invalid_argument("SemilinearProblem: reaction coefficient must be >= 0");
}

SemilinearProblem SemilinearProblem::linear(Grid g, GridField yd) {
  GridField c = GridField::constant(g, 0.0);
  return SemilinearProblem(std::move(g), Reaction::kZero, std::move(c), std::move(yd));
}

double SemilinearProblem::a(int n, double y) const {
  switch (reaction) {
    case Reaction::kZero: return 0.0;
    case Reaction::kLinear: return coef[n] * y;
    case Reaction::kCubic: return coef[n] * y * y * y;
  }
  return 0.0;
}

double SemilinearProblem::a_y(int n, double y) const {
  switch (reaction) {
    case Reaction::kZero: return 0.0;
    case Reaction::kLinear: return coef[n];
    case Reaction::kCubic: return 3.0 * coef[n] * y * y;
  }
  return 0.0;
}

double SemilinearProblem::a_yy(int n, double y) const {
  return reaction == Reaction::kCubic ? 6.0 * coef[n] * y : 0.0;
}

std::vector<double> nodal_load(const CellField& u) {
  const Grid& g = u.grid();
  std::vector<double> f(g.node_count(), 0.0);
  std::vector<int> count(g.node_count(), 0);
  const int corners = g.dim() == 2 ? 4 : 2;
  for (int c = 0; c < g.cell_count(); ++c) {
    const auto n = g.cell_nodes(c);
    for (int k = 0; k < corners; ++k) {
      f[n[k]] += u[c];
      ++count[n[k]];
    }
  }
  // Each node owns 1/corners of every adjacent cell, so the total mass is preserved.
  for (int n = 0; n < g.node_count(); ++n)
    if (count[n] > 0) f[n] /= corners;
  return f;
}

std::vector<double> nodal_load(const StructuredMeasure& mu) {
  const Grid& g = mu.grid();
  std::vector<double> f = nodal_load(mu.v1());
  const double area = g.cell_measure();
  for (const auto& part : mu.surface())
    for (std::size_t e = 0; e < part.v2.size(); ++e) {
      const auto& el = part.mesh->elements[e];
      const double mass = part.v2[e] * el.measure / area;
      double xi = 0.0, eta = 0.0;
      const int c = g.locate(el.midpoint, xi, eta);
      const auto n = g.cell_nodes(c);
      if (g.dim() == 1) {
        f[n[0]] += (1 - xi) * mass;
        f[n[1]] += xi * mass;
      } else {
        f[n[0]] += (1 - xi) * (1 - eta) * mass;
        f[n[1]] += xi * (1 - eta) * mass;
        f[n[2]] += xi * eta * mass;
        f[n[3]] += (1 - xi) * eta * mass;
      }
    }
  return f;
}

std::vector<double> apply_operator(const Grid& g, const std::vector<double>& weight,
                                   const GridField& y) {
  const Interior in(g);
  const Vec r = assemble(in, weight) * in.gather(y.values());
  std::vector<double> out(g.node_count(), 0.0);
  for (int k = 0; k < in.size(); ++k) out[in.nodes[k]] = r[k];
  return out;
}

GridField solve_state_load(const SemilinearProblem& p, const std::vector<double>& load,
                           const NewtonOptions& opts) {
  const Interior in(p.grid);
  const Vec f = in.gather(load);
  const double scale = std::max(1.0, sup(f));
  const std::vector<double> zero(p.grid.node_count(), 0.0);
  const SpMat K = assemble(in, zero);

  Vec y = Vec::Zero(in.size());
  auto residual = [&](const Vec& v) {
    Vec r = K * v - f;
    for (int k = 0; k < in.size(); ++k) r[k] += p.a(in.nodes[k], v[k]);
    return r;
  };
  Vec r = residual(y);
  std::vector<double> history{sup(r) / scale};
  Eigen::SimplicialLDLT<SpMat> ldlt;
  for (int it = 0; it < opts.max_iter && history.back() > opts.tol; ++it) {
    std::vector<double> w(p.grid.node_count(), 0.0);
    for (int k = 0; k < in.size(); ++k) w[in.nodes[k]] = p.a_y(in.nodes[k], y[k]);
    ldlt.compute(assemble(in, w));
    if (ldlt.info() != Eigen::Success) throw NewtonError("solve_state: factorization failed", history);
    const Vec step = ldlt.solve(r);
    double lambda = 1.0;
    Vec trial = y - step;
    Vec rt = residual(trial);
    while (rt.norm() >= r.norm() && lambda > 1e-8) {
      lambda *= 0.5;
      trial = y - lambda * step;
      rt = residual(trial);
    }
    y = trial;
    r = rt;
    history.push_back(sup(r) / scale);
  }
  if (history.back() > opts.tol)
    throw NewtonError("solve_state: Newton did not converge", history);
  return in.scatter(y);
}

GridField solve_state(const SemilinearProblem& p, const CellField& u, const NewtonOptions& opts) {
  if (!(u.grid() == p.grid)) throw std::invalid_argument("solve_state: control grid differs");
  for (double v : u.values())
    if (!std::isfinite(v)) throw std::invalid_argument("solve_state: control is not finite");
  return solve_state_load(p, nodal_load(u), opts);
}

GridField solve_adjoint(const SemilinearProblem& p, const GridField& y) {
  const Interior in(p.grid);
  std::vector<double> w(p.grid.node_count(), 0.0), rhs(p.grid.node_count(), 0.0);
  for (int n = 0; n < p.grid.node_count(); ++n) {
    w[n] = p.a_y(n, y[n]);
    rhs[n] = y[n] - p.y_d[n];
  }
  Eigen::SimplicialLDLT<SpMat> ldlt(assemble(in, w));
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("solve_adjoint: factorization failed");
  return in.scatter(ldlt.solve(in.gather(rhs)));
}

double F_objective(const SemilinearProblem& p, const GridField& y) {
  const Grid& g = p.grid;
  double s = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (g.on_boundary(i, j)) continue;
      const int n = g.node(i, j);
      const double d = y[n] - p.y_d[n];
      s += 0.5 * d * d;
    }
  return s * g.cell_measure();
}

double F_value(const SemilinearProblem& p, const CellField& u, const NewtonOptions& opts) {
  return F_objective(p, solve_state(p, u, opts));
}

GridField F_prime(const SemilinearProblem& p, const CellField& u, const NewtonOptions& opts) {
  return solve_adjoint(p, solve_state(p, u, opts));
}

struct QuadraticFormF::Solver {
  explicit Solver(const Grid& g) : in(g) {}
  Interior in;
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

QuadraticFormF::QuadraticFormF(const SemilinearProblem& p, const CellField& u,
                               const NewtonOptions& opts)
    : solver_(std::make_unique<Solver>(p.grid)),
      y_(solve_state(p, u, opts)),
      phi_(solve_adjoint(p, y_)) {
  const int nn = p.grid.node_count();
  reaction_.assign(nn, 0.0);
  kappa_.assign(nn, 0.0);
  for (int n = 0; n < nn; ++n) {
    reaction_[n] = p.a_y(n, y_[n]);
    kappa_[n] = 1.0 - p.a_yy(n, y_[n]) * phi_[n];
  }
  solver_->ldlt.compute(assemble(solver_->in, reaction_));
  if (solver_->ldlt.info() != Eigen::Success)
    throw std::runtime_error("QuadraticFormF: factorization failed");
}

QuadraticFormF::~QuadraticFormF() = default;
QuadraticFormF::QuadraticFormF(QuadraticFormF&&) noexcept = default;
QuadraticFormF& QuadraticFormF::operator=(QuadraticFormF&&) noexcept = default;

GridField QuadraticFormF::linearized_solve_load(const std::vector<double>& load) const {
  const Interior& in = solver_->in;
  return in.scatter(solver_->ldlt.solve(in.gather(load)));
}

GridField QuadraticFormF::linearized_solve(const StructuredMeasure& mu) const {
  if (!(mu.grid() == grid())) throw std::invalid_argument("linearized_solve: grids differ");
  return linearized_solve_load(nodal_load(mu));
}

double QuadraticFormF::form(const GridField& z1, const GridField& z2) const {
  double s = 0.0;
  for (int n : solver_->in.nodes) s += kappa_[n] * z1[n] * z2[n];
  return s * grid().cell_measure();
}

double QuadraticFormF::F_second(const StructuredMeasure& mu1, const StructuredMeasure& mu2) const {
  const GridField z1 = linearized_solve(mu1);
  if (&mu1 == &mu2) return form(z1, z1);
  return form(z1, linearized_solve(mu2));
}

Eigen::MatrixXd QuadraticFormF::gram(const std::vector<SparseLoad>& loads) const {
  const Interior& in = solver_->in;
  const int m = static_cast<int>(loads.size());
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(in.size(), m);
  constexpr int kBlock = 64;
  const int blocks = (m + kBlock - 1) / kBlock;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const int c0 = static_cast<int>(b) * kBlock, nc = std::min(kBlock, m - c0);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(in.size(), nc);
    for (int k = 0; k < nc; ++k)
      for (const auto& [node, v] : loads[c0 + k]) {
        const int r = in.index[node];
        if (r >= 0) rhs(r, k) += v;
      }
    Z.middleCols(c0, nc) = solver_->ldlt.solve(rhs);
  });
  Vec weight(in.size());
  for (int k = 0; k < in.size(); ++k) weight[k] = kappa_[in.nodes[k]] * grid().cell_measure();
  const Eigen::MatrixXd WZ = weight.asDiagonal() * Z;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const int c0 = static_cast<int>(b) * kBlock, nc = std::min(kBlock, m - c0);
    G.block(c0, c0, m - c0, nc).noalias() = Z.rightCols(m - c0).transpose() * WZ.middleCols(c0, nc);
  });
  return G.selfadjointView<Eigen::Lower>();
}

}  // namespace nogap
