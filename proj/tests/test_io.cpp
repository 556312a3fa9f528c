#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "nogap/io.hpp"
#include "nogap/scalar_fixtures.hpp"

using namespace nogap;

namespace {

void check_same(const PiecewiseConvexFn& a, const PiecewiseConvexFn& b) {
  REQUIRE(a.breakpoints() == b.breakpoints());
  REQUIRE(a.pieces().size() == b.pieces().size());
  for (std::size_t k = 0; k < a.pieces().size(); ++k) {
    CHECK(a.pieces()[k].p == b.pieces()[k].p);
    CHECK(a.pieces()[k].q == b.pieces()[k].q);
    CHECK(a.pieces()[k].r == b.pieces()[k].r);
  }
  REQUIRE(a.kinks().size() == b.kinks().size());
  for (std::size_t k = 0; k < a.kinks().size(); ++k) {
    CHECK(a.kinks()[k].location == b.kinks()[k].location);
    CHECK(a.kinks()[k].weight == b.kinks()[k].weight);
  }
  CHECK(a.domain().lo == b.domain().lo);
  CHECK(a.domain().hi == b.domain().hi);
}

}  // namespace

TEST_CASE("convex functions round-trip exactly through JSON text") {
  for (const auto& f : {bang_off_bang_g(0.1, -1.0 / 3.0, std::sqrt(2.0)), l0_envelope_g(2.0, 1.0, 2.0),
                        conjugate(l0_envelope_g(0.7, 0.3, 1.9)), oscillating_curvature_fn(6)}) {
    const auto text = to_json(f).dump();
    check_same(f, piecewise_from_json(Json::parse(text)));
  }
}

TEST_CASE("function specs") {
  const auto bob = convex_fn_from_spec(Json::parse(R"({"family": "bang_off_bang", "alpha": 0.5})"));
  CHECK(conjugate(bob)(2.0) == doctest::Approx(1.5));
  const auto env = convex_fn_from_spec(
      Json::parse(R"({"breakpoints": [-1, 0, 1], "pieces": [[1,0,1],[0,-2,0],[0,2,0],[1,0,1]], "domain": [-2, 2]})"));
  REQUIRE(env.kinks().size() == 1);
  CHECK(env.kinks()[0].weight == doctest::Approx(2.0));
  CHECK_THROWS_AS(convex_fn_from_spec(Json::parse(R"({"breakpoints": [0], "pieces": [[0,1,0],[0,-1,0]]})")),
                  NonConvexError);
  CHECK_THROWS_AS(convex_fn_from_spec(Json::parse(R"({"family": "cosine"})")), FormatError);
  CHECK(json_number(number_json(-kInf)) == -kInf);
}

TEST_CASE("grid fields round-trip through CSV") {
  const Grid g(2, Box{-1.0, 2.0, 0.5, 1.5}, 7, 5);
  const auto w = GridField::sample(g, [](Point p) { return std::exp(p.x) / 3.0 - p.y; });
  std::stringstream ss;
  write_grid_csv(ss, w);
  const auto back = read_grid_field(ss);
  CHECK(back.grid() == g);
  for (int n = 0; n < g.node_count(); ++n) CHECK(back[n] == w[n]);

  const auto u = CellField::sample(g, [](Point p) { return 1.0 / (3.0 + p.x * p.y); });
  std::stringstream cs;
  write_grid_csv(cs, u);
  const auto ub = read_cell_field(cs);
  for (int c = 0; c < g.cell_count(); ++c) CHECK(ub[c] == u[c]);

  std::stringstream bad("# {\"kind\": \"node\", \"dim\": 1, \"box\": [0, 1], \"shape\": [3]}\n1,2\n");
  CHECK_THROWS_AS(read_grid_field(bad), FormatError);
}

TEST_CASE("problem files reproduce the preset") {
  const auto dir = std::filesystem::temp_directory_path() / "nogap_io_test";
  const Preset p = make_preset("bangbang-positive", 17);
  write_problem(dir, p);
  const ProblemFile back = load_problem(dir / "problem.json");
  CHECK(back.name == p.name);
  CHECK(back.problem.objective(back.u_bar) == p.problem.objective(p.u_bar));
  check_same(back.problem.g, p.problem.g);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reports carry a schema version") {
  const auto p = make_preset("bangbang-positive", 17);
  const auto r = soc_verdict(p.problem, p.u_bar);
  const Json j = to_json(r);
  CHECK(j.at("schema_version") == kSchemaVersion);
  CHECK(j.at("verdict") == to_string(r.verdict));
  CHECK(Json::parse(j.dump()) == j);
}
