#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "nogap/coarea_limits.hpp"
#include "nogap/growth.hpp"
#include "nogap/level_set.hpp"
#include "nogap/measures.hpp"
#include "nogap/piecewise_convex.hpp"
#include "nogap/presets.hpp"
#include "nogap/soc_checker.hpp"

namespace nogap {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Doubles as JSON numbers, with "inf" / "-inf" for the infinities.
Json number_json(double v);
double json_number(const Json& j);

// {breakpoints, pieces: [[p, q, r], ...], kinks: [{location, weight}], domain: [lo, hi]}.
Json to_json(const PiecewiseConvexFn& f);
PiecewiseConvexFn piecewise_from_json(const Json& j);

// Either a full document as above, {"pieces": ..., "breakpoints": ...} of a continuous convex
// piecewise quadratic, or a named family: {"family": "bang_off_bang", "alpha", "u_a", "u_b"},
// {"family": "l0_envelope", "alpha", "beta", "gamma"}, {"family": "quadratic", "p", "q", "r"}.
PiecewiseConvexFn convex_fn_from_spec(const Json& spec);

Json grid_json(const Grid& g);
Grid grid_from_json(const Json& j);

// CSV grid whose first line is "# " followed by the JSON header {kind, dim, box, shape, ...};
// one CSV row per grid line in y.
void write_grid_csv(std::ostream& os, const GridField& f);
void write_grid_csv(std::ostream& os, const CellField& f);
GridField read_grid_field(std::istream& is);
CellField read_cell_field(std::istream& is);
void save(const std::filesystem::path& p, const GridField& f);
void save(const std::filesystem::path& p, const CellField& f);
GridField load_grid_field(const std::filesystem::path& p);
CellField load_cell_field(const std::filesystem::path& p);

// x, y, length, grad_norm, cell
void write_mesh_csv(std::ostream& os, const LevelSetMesh& mesh);

// JSON header line, then a "v1" block of cell rows and one "v2" block per surface part.
void write_measure(std::ostream& os, const StructuredMeasure& mu);

// t, quotient, target, mismatch
void write_study_csv(std::ostream& os, const LimitStudy& s);
Json study_summary(const LimitStudy& s, double tolerance);

Json to_json(const StructureCheck& c);
Json to_json(const NondegeneracyReport& r);
Json to_json(const FirstOrderReport& r);
Json to_json(const RayleighResult& r);
Json to_json(const SOCReport& r);
Json to_json(const GrowthResult& r);
Json to_json(const DescentAscentReport& r);
// l1, gap, quotient, family
void write_growth_csv(std::ostream& os, const GrowthResult& r);

const char* to_string(Reaction r);
Reaction reaction_from_string(const std::string& s);

// A node field given as a number, {"constant": c}, {"expr": tag} or {"file": path} with paths
// relative to `base`. Tags: "zero", "sinsin" = sin(pi x) sin(pi y), "slab" = x - 1/2.
GridField field_from_spec(const Json& spec, const Grid& g, const std::filesystem::path& base);

// problem.json: {schema_version, name, grid, reaction, coef, y_d, g, u_bar, w_bar?, parameters}.
struct ProblemFile {
  std::string name;
  OptimalControlProblem problem;
  CellField u_bar;
};
ProblemFile load_problem(const std::filesystem::path& p);
// Writes problem.json with coef.csv, y_d.csv, u_bar.csv and w_bar.csv next to it.
void write_problem(const std::filesystem::path& dir, const Preset& preset);

void write_text(const std::filesystem::path& p, const std::string& text);
Json read_json(const std::filesystem::path& p);
void write_json(const std::filesystem::path& p, const Json& j);

}  // namespace nogap
