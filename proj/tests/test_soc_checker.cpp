#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nogap/growth.hpp"
#include "nogap/parallel.hpp"
#include "nogap/presets.hpp"
#include "nogap/scalar_fixtures.hpp"

using namespace nogap;
using std::numbers::pi;

namespace {

// Brute-force oracle: minimum over signed vertices allowed by the cones. For a diagonal form
// the Rayleigh minimum on the l1 sphere sits at such a vertex whenever some weight is <= 0,
// and otherwise at x_k = (1/w_k) / sum(1/w).
double vertex_oracle(const std::vector<double>& w_pos, const std::vector<double>& w_neg,
                     const std::vector<Cone>& cones) {
  double best = kInf;
  for (std::size_t k = 0; k < w_pos.size(); ++k) {
    if (cones[k] != Cone::kNonpos) best = std::min(best, w_pos[k]);
    if (cones[k] != Cone::kNonneg) best = std::min(best, w_neg[k]);
  }
  return best;
}

Eigen::VectorXd random_admissible(const AssembledQ& Q, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd x(Q.size());
  for (int k = 0; k < Q.size(); ++k) {
    double v = n01(rng);
    const Dof& d = Q.space.dofs[k];
    if (!d.allows(v > 0 ? 1 : -1)) v = -v;
    x[k] = v;
  }
  return x;
}

}  // namespace

TEST_CASE("diagonal forms on the l1 sphere") {
  const auto r = min_rayleigh(diagonal_Q({2.0, 3.0}));
  CHECK(r.exact);
  // Interior stationary point 1 / (1/2 + 1/3) = 1.2 beats both vertices.
  CHECK(r.q_min == doctest::Approx(1.2).epsilon(1e-12));

  const auto neg = min_rayleigh(diagonal_Q({-1.0, 3.0}));
  CHECK(neg.q_min == doctest::Approx(-1.0));
  CHECK(std::abs(neg.argmin[0]) == doctest::Approx(1.0));

  SUBCASE("cone-restricted negative vertex") {
    const auto r1 = min_rayleigh(diagonal_Q({-1.0, 1.0}, {Cone::kNonneg, Cone::kFree}));
    CHECK(r1.q_min == doctest::Approx(-1.0));
    CHECK(r1.argmin[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("exact enumeration agrees with the heuristic search") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + trial % 6;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = n01(rng);
    Eigen::MatrixXd F = 0.3 * (A + A.transpose());
    std::vector<double> w(n);
    std::vector<Cone> cones(n);
    for (int k = 0; k < n; ++k) {
      w[k] = 0.5 + std::abs(n01(rng));
      cones[k] = static_cast<Cone>(rng() % 3);
    }
    const auto Q = dense_Q(F, w, cones);
    const auto exact = min_rayleigh(Q);
    RayleighOptions heuristic;
    heuristic.exact_max_dofs = 0;
    heuristic.starts = 16;
    const auto approx = min_rayleigh(Q, heuristic);
    CHECK(exact.exact);
    CHECK(approx.q_min >= exact.q_min - 1e-9);
    CHECK(approx.q_min <= exact.q_min + 1e-3 * (1.0 + std::abs(exact.q_min)));
    CHECK(Q.value(exact.argmin) == doctest::Approx(exact.q_min).epsilon(1e-9));
    CHECK(exact.argmin.lpNorm<1>() == doctest::Approx(1.0));
  }
}

TEST_CASE("cone tags and sign flips") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6;
    std::vector<double> w(n);
    std::vector<Cone> cones(n);
    for (int k = 0; k < n; ++k) {
      w[k] = static_cast<double>(rng() % 7) - 2.0;
      cones[k] = static_cast<Cone>(rng() % 3);
    }
    const double q = min_rayleigh(diagonal_Q(w, cones)).q_min;
    if (vertex_oracle(w, w, cones) <= 0.0) CHECK(q == doctest::Approx(vertex_oracle(w, w, cones)));

    // Negating every free dof is a symmetry of Q: x -> Sx with S = diag(+-1) on free dofs.
    Eigen::MatrixXd A = Eigen::MatrixXd::Random(n, n);
    Eigen::MatrixXd F = A + A.transpose();
    Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
    for (int k = 0; k < n; ++k)
      if (cones[k] == Cone::kFree) s[k] = -1.0;
    const Eigen::MatrixXd SFS = s.asDiagonal() * F * s.asDiagonal();
    std::vector<double> wpos(n, 1.0);
    CHECK(min_rayleigh(dense_Q(F, wpos, cones)).q_min ==
          doctest::Approx(min_rayleigh(dense_Q(SFS, wpos, cones)).q_min).epsilon(1e-10));

    // Turning a nonneg tag into nonpos flips which vertex of that dof is feasible.
    for (int k = 0; k < n; ++k) {
      if (cones[k] == Cone::kFree) continue;
      std::vector<double> e(n, 5.0);
      e[k] = -1.0;
      auto flipped = cones;
      flipped[k] = cones[k] == Cone::kNonneg ? Cone::kNonpos : Cone::kNonneg;
      const auto a = min_rayleigh(diagonal_Q(e, cones));
      const auto b = min_rayleigh(diagonal_Q(e, flipped));
      CHECK(a.q_min == doctest::Approx(-1.0));
      CHECK(b.q_min == doctest::Approx(-1.0));
      CHECK(a.argmin[k] == doctest::Approx(-b.argmin[k]));
    }
  }
}

TEST_CASE("presets give their verdicts") {
  const auto pos = make_preset("bangbang-positive", 33);
  const auto r = soc_verdict(pos.problem, pos.u_bar);
  CHECK(r.verdict == Verdict::kPositive);
  CHECK(r.first_order.holds);
  CHECK(r.first_order.sup_residual < 1e-8);
  CHECK(r.volume_dofs == 0);
  CHECK(r.surface_dofs > 0);
  CHECK(r.c_pred == r.rayleigh.q_min);

  const auto ind = make_preset("bangbang-indefinite", 65);
  const auto ri = soc_verdict(ind.problem, ind.u_bar);
  CHECK(ri.verdict == Verdict::kIndefinite);
  CHECK(ri.first_order.sup_residual < 1e-8);

  const auto l0 = make_preset("l0", 33);
  const auto rl = soc_verdict(l0.problem, l0.u_bar);
  CHECK(rl.verdict == Verdict::kPositive);
  CHECK(rl.volume_dofs > 0);
  CHECK(rl.nonneg_dofs > 0);
  CHECK(rl.nonpos_dofs > 0);
  // v <= 0 where w = +alpha gamma and v >= 0 where w = -alpha gamma.
  for (const Dof& d : rl.Q->space.dofs) {
    if (d.cone == Cone::kFree) continue;
    const double wc = rl.first_order.w.cell_average(d.index);
    CHECK(std::abs(std::abs(wc) - 4.0) < 1e-6);
    CHECK((d.cone == Cone::kNonpos) == (wc > 0.0));
  }
}

TEST_CASE("Q matches F'' + G'' evaluated directly") {
  std::mt19937_64 rng(3);
  for (const char* name : {"bangbang-positive", "l0"}) {
    const auto p = make_preset(name, 33);
    const auto r = soc_verdict(p.problem, p.u_bar);
    REQUIRE(r.Q);
    const QuadraticFormF F(p.problem.pde, p.u_bar);
    for (int s = 0; s < 20; ++s) {
      const Eigen::VectorXd x = random_admissible(*r.Q, rng);
      const auto mu = r.Q->space.measure(x);
      const double direct = F.F_second(mu) + G_second(p.problem.j, r.first_order.w, mu);
      CHECK(std::abs(r.Q->value(x) - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
      CHECK(m_norm(mu) == doctest::Approx(x.lpNorm<1>()).epsilon(1e-12));
    }
  }
}

TEST_CASE("pure G'' form has the harmonic-mean minimum") {
  const auto p = make_preset("bangbang-positive", 33);
  SOCOptions opts;
  opts.assemble.include_F = false;
  const auto r = soc_verdict(p.problem, p.u_bar, opts);
  double inv = 0.0;
  for (const Dof& d : r.Q->space.dofs) inv += 1.0 / d.weight_pos;
  CHECK(r.rayleigh.q_min == doctest::Approx(1.0 / inv).epsilon(1e-8));
  CHECK(r.verdict == Verdict::kPositive);
}

TEST_CASE("first-order failures") {
  const auto p = make_preset("bangbang-positive", 33);
  const Grid& g = p.u_bar.grid();
  std::vector<double> u(p.u_bar.values().begin(), p.u_bar.values().end());
  int cell = -1;
  for (int c = 0; c < g.cell_count() && cell < 0; ++c)
    if (std::abs(p.w_bar.cell_average(c)) < 0.3) cell = c;
  REQUIRE(cell >= 0);
  u[cell] += 0.1;
  const CellField bumped(g, u);
  const auto fo = first_order_check(p.problem, bumped);
  CHECK_FALSE(fo.holds);
  // Moving 0.1 of control on one cell shifts w only by O(h^2), so the residual is 0.1.
  CHECK(fo.sup_residual == doctest::Approx(0.1).epsilon(1e-3));
  const auto r = soc_verdict(p.problem, bumped);
  CHECK(r.verdict == Verdict::kFirstOrderFail);
  CHECK_FALSE(r.Q);
}

TEST_CASE("critical point on a kink level") {
  const Grid g = Grid::square(33);
  // Saddle of value alpha = 0.5 at the center, so the kink level set crosses itself there.
  auto w = GridField::sample(g, [](Point p) {
    return std::sin(pi * p.x) * std::sin(pi * p.y) * (0.5 + 8.0 * (p.x - 0.5) * (p.y - 0.5));
  }, true);
  const auto p = inverse_construction("peak", g, Reaction::kZero, GridField::constant(g, 0.0),
                                      bang_off_bang_g(0.5, -1.0, 1.0), std::move(w));
  const auto fo = first_order_check(p.problem, p.u_bar);
  CHECK(fo.holds);
  CHECK_FALSE(fo.nondegeneracy.ok);
  bool at_saddle = false;
  for (Point q : fo.nondegeneracy.witnesses) at_saddle |= std::hypot(q.x - 0.5, q.y - 0.5) < 0.1;
  CHECK(at_saddle);
}

TEST_CASE("growth quotients follow the verdict") {
  const auto pos = make_preset("bangbang-positive", 33);
  const auto rp = soc_verdict(pos.problem, pos.u_bar);
  GrowthOptions opts;
  opts.samples = 60;
  set_thread_count(4);
  const auto gp = growth_test(pos.problem, pos.u_bar, rp, opts);
  CHECK(gp.c_emp > 0.0);
  CHECK(gp.samples.size() == 60);
  for (const auto& s : gp.samples) {
    CHECK(s.l1 > 0.0);
    CHECK(s.l1 <= gp.eps);
  }

  // Same seed, same samples regardless of the thread count.
  set_thread_count(1);
  const auto again = growth_test(pos.problem, pos.u_bar, rp, opts);
  REQUIRE(again.samples.size() == gp.samples.size());
  for (std::size_t k = 0; k < gp.samples.size(); ++k) CHECK(again.samples[k].gap == gp.samples[k].gap);

  const auto ind = make_preset("bangbang-indefinite", 65);
  const auto ri = soc_verdict(ind.problem, ind.u_bar);
  const auto gi = growth_test(ind.problem, ind.u_bar, ri, opts);
  CHECK(gi.c_emp < 0.0);
  bool transported_negative = false;
  for (const auto& s : gi.samples)
    transported_negative |= s.family == SampleFamily::kTransported && s.quotient < 0.0;
  CHECK(transported_negative);
}

TEST_CASE("descent and ascent constants") {
  const Grid g = Grid::square(33);
  SUBCASE("affine j") {
    // g = indicator of {0.3}, j(w) = 0.3 w.
    const PiecewiseConvexFn gpt({}, {Quadratic{0.0, 0.0, 0.0}}, {}, Interval{0.3, 0.3});
    const auto w = GridField::sample(g, [](Point p) { return p.x - 0.5; });
    const auto rep = descent_ascent_constants(gpt, w, CellField::constant(g, 0.3), 0.2);
    CHECK(rep.lambda_emp == doctest::Approx(0.0));
    CHECK(rep.descent_ok());
    CHECK(rep.ascent_ok());
  }
  SUBCASE("max(w, 0) across a straight level line") {
    const PiecewiseConvexFn box({}, {Quadratic{0.0, 0.0, 0.0}}, {}, Interval{0.0, 1.0});
    const auto w = GridField::sample(g, [](Point p) { return p.x - 0.5; });
    const auto u = subgradient_selection(conjugate(box), w);
    const auto rep = descent_ascent_constants(box, w, u, 0.2);
    CHECK(std::isfinite(rep.lambda_emp));
    CHECK(rep.lambda_emp > 0.0);
    CHECK(rep.lambda_emp >= rep.lambda_sampled);
    CHECK(rep.lambda_emp <= rep.lambda_theory);
    CHECK(rep.structural_c == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rep.descent_ok());
    CHECK(rep.ascent_ok());
    CHECK(rep.min_ascent_quotient >= 1.0 / (2.0 * rep.lambda_emp));
  }
}
