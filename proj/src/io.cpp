#include "nogap/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nogap/scalar_fixtures.hpp"

namespace nogap {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw FormatError("not a number: '" + s + "'");
  return v;
}

Json point_json(Point p) { return Json::array({p.x, p.y}); }

Json interval_json(Interval i) { return Json::array({number_json(i.lo), number_json(i.hi)}); }

Json header(const Grid& g, const char* kind) {
  Json h = grid_json(g);
  h["kind"] = kind;
  h["schema_version"] = kSchemaVersion;
  return h;
}

Json read_header(std::istream& is, const char* kind) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw FormatError("grid file: missing '# {...}' header");
  Json h;
  try {
    h = Json::parse(line.substr(2));
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("grid file header: ") + e.what());
  }
  if (h.value("kind", "") != kind) throw FormatError(std::string("grid file: expected kind '") + kind + "'");
  return h;
}

std::vector<double> read_rows(std::istream& is, int cols, int rows) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(cols) * rows);
  std::string line;
  for (int r = 0; r < rows; ++r) {
    if (!std::getline(is, line)) throw FormatError("grid file: too few rows");
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      v.push_back(parse_double(cell));
      ++c;
    }
    if (c != cols) throw FormatError("grid file: row " + std::to_string(r) + " has " + std::to_string(c) + " values");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  return is;
}

}  // namespace

Json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double json_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    return parse_double(s);
  }
  throw FormatError("expected a number, got " + j.dump());
}

Json to_json(const PiecewiseConvexFn& f) {
  Json pieces = Json::array();
  for (const auto& q : f.pieces()) pieces.push_back({q.p, q.q, q.r});
  Json kinks = Json::array();
  for (const auto& k : f.kinks()) kinks.push_back({{"location", k.location}, {"weight", k.weight}});
  return {{"breakpoints", f.breakpoints()}, {"pieces", pieces}, {"kinks", kinks},
          {"domain", interval_json(f.domain())}};
}

namespace {

std::vector<Quadratic> pieces_from(const Json& j) {
  std::vector<Quadratic> out;
  for (const auto& q : j.at("pieces")) {
    if (!q.is_array() || q.size() != 3) throw FormatError("piece must be [p, q, r]: " + q.dump());
    out.push_back({json_number(q[0]), json_number(q[1]), json_number(q[2])});
  }
  return out;
}

std::vector<double> numbers_from(const Json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(json_number(x));
  return v;
}

Interval domain_from(const Json& j) {
  if (!j.contains("domain")) return {};
  const auto& d = j.at("domain");
  if (!d.is_array() || d.size() != 2) throw FormatError("domain must be [lo, hi]");
  return {json_number(d[0]), json_number(d[1])};
}

}  // namespace

PiecewiseConvexFn piecewise_from_json(const Json& j) {
  try {
    std::vector<Kink> kinks;
    for (const auto& k : j.value("kinks", Json::array()))
      kinks.push_back({json_number(k.at("location")), json_number(k.at("weight"))});
    return PiecewiseConvexFn(numbers_from(j.value("breakpoints", Json::array())), pieces_from(j),
                             std::move(kinks), domain_from(j));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("convex function: ") + e.what());
  }
}

PiecewiseConvexFn convex_fn_from_spec(const Json& spec) {
  try {
    if (spec.contains("family")) {
      const auto fam = spec.at("family").get<std::string>();
      if (fam == "bang_off_bang")
        return bang_off_bang_g(spec.value("alpha", 0.5), spec.value("u_a", -1.0), spec.value("u_b", 1.0));
      if (fam == "l0_envelope")
        return l0_envelope_g(spec.value("alpha", 2.0), spec.value("beta", 1.0), spec.value("gamma", 2.0));
      if (fam == "quadratic")
        return PiecewiseConvexFn::quadratic(spec.value("p", 0.5), spec.value("q", 0.0), spec.value("r", 0.0));
      throw FormatError("unknown function family '" + fam + "'");
    }
    if (spec.contains("kinks")) return piecewise_from_json(spec);
    return PiecewiseConvexFn::from_pieces(numbers_from(spec.value("breakpoints", Json::array())),
                                          pieces_from(spec), domain_from(spec));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("convex function: ") + e.what());
  }
}

Json grid_json(const Grid& g) {
  const Box& b = g.box();
  Json box = g.dim() == 2 ? Json::array({b.x0, b.x1, b.y0, b.y1}) : Json::array({b.x0, b.x1});
  Json shape = g.dim() == 2 ? Json::array({g.nx(), g.ny()}) : Json::array({g.nx()});
  return {{"dim", g.dim()}, {"box", box}, {"shape", shape}};
}

Grid grid_from_json(const Json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    const auto& box = j.at("box");
    const auto& shape = j.at("shape");
    if (dim == 1) return Grid::interval(shape.at(0).get<int>(), box.at(0).get<double>(), box.at(1).get<double>());
    if (dim == 2)
      return Grid(2, Box{box.at(0).get<double>(), box.at(1).get<double>(), box.at(2).get<double>(), box.at(3).get<double>()},
                  shape.at(0).get<int>(), shape.at(1).get<int>());
    throw FormatError("grid: dim must be 1 or 2");
  } catch (const Json::exception& e) {
    throw FormatError(std::string("grid: ") + e.what());
  }
}

void write_grid_csv(std::ostream& os, const GridField& f) {
  const Grid& g = f.grid();
  Json h = header(g, "node");
  h["zero_boundary"] = f.zero_boundary();
  os << "# " << h.dump() << '\n';
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) os << (i ? "," : "") << fmt(f.at(i, j));
    os << '\n';
  }
}

void write_grid_csv(std::ostream& os, const CellField& f) {
  const Grid& g = f.grid();
  os << "# " << header(g, "cell").dump() << '\n';
  for (int j = 0; j < g.cells_y(); ++j) {
    for (int i = 0; i < g.cells_x(); ++i) os << (i ? "," : "") << fmt(f[g.cell(i, j)]);
    os << '\n';
  }
}

GridField read_grid_field(std::istream& is) {
  const Json h = read_header(is, "node");
  const Grid g = grid_from_json(h);
  return GridField(g, read_rows(is, g.nx(), g.ny()), h.value("zero_boundary", false));
}

CellField read_cell_field(std::istream& is) {
  const Grid g = grid_from_json(read_header(is, "cell"));
  return CellField(g, read_rows(is, g.cells_x(), g.cells_y()));
}

void save(const std::filesystem::path& p, const GridField& f) {
  auto os = open_out(p);
  write_grid_csv(os, f);
}

void save(const std::filesystem::path& p, const CellField& f) {
  auto os = open_out(p);
  write_grid_csv(os, f);
}

GridField load_grid_field(const std::filesystem::path& p) {
  auto is = open_in(p);
  return read_grid_field(is);
}

CellField load_cell_field(const std::filesystem::path& p) {
  auto is = open_in(p);
  return read_cell_field(is);
}

void write_mesh_csv(std::ostream& os, const LevelSetMesh& mesh) {
  os << "x,y,length,grad_norm,cell\n";
  for (const auto& e : mesh.elements)
    os << fmt(e.midpoint.x) << ',' << fmt(e.midpoint.y) << ',' << fmt(e.measure) << ','
       << fmt(e.grad_norm) << ',' << e.cell << '\n';
}

void write_measure(std::ostream& os, const StructuredMeasure& mu) {
  Json h = header(mu.grid(), "structured_measure");
  Json parts = Json::array();
  for (const auto& s : mu.surface())
    parts.push_back({{"level", s.level}, {"value", s.mesh->level}, {"elements", s.v2.size()}});
  h["surface"] = parts;
  os << "# " << h.dump() << '\n';
  os << "# v1\n";
  write_grid_csv(os, mu.v1());
  for (const auto& s : mu.surface()) {
    os << "# v2 level " << s.level << '\n';
    os << "x,y,length,v2\n";
    for (std::size_t e = 0; e < s.v2.size(); ++e) {
      const auto& el = s.mesh->elements[e];
      os << fmt(el.midpoint.x) << ',' << fmt(el.midpoint.y) << ',' << fmt(el.measure) << ',' << fmt(s.v2[e]) << '\n';
    }
  }
}

void write_study_csv(std::ostream& os, const LimitStudy& s) {
  os << "t,quotient,target,mismatch\n";
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    const double q = s.quotients[k];
    const double m = s.target != 0.0 ? std::abs(q - s.target) / std::abs(s.target) : std::abs(q);
    os << fmt(s.t[k]) << ',' << fmt(q) << ',' << fmt(s.target) << ',' << fmt(m) << '\n';
  }
}

Json study_summary(const LimitStudy& s, double tolerance) {
  return {{"name", s.name},
          {"limit", number_json(s.limit())},
          {"raw_last", number_json(s.fit.raw_last)},
          {"order", number_json(s.order())},
          {"stationary", s.fit.stationary},
          {"target", number_json(s.target)},
          {"mismatch", number_json(s.mismatch())},
          {"tolerance", tolerance},
          {"warning", s.fit.warning},
          {"pass", s.mismatch() <= tolerance}};
}

Json to_json(const StructureCheck& c) {
  return {{"holds", c.holds}, {"c_j", number_json(c.c_j)}, {"witness", c.witness},
          {"witness_ratio", number_json(c.witness_ratio)}};
}

Json to_json(const NondegeneracyReport& r) {
  Json w = Json::array();
  for (Point p : r.witnesses) w.push_back(point_json(p));
  return {{"ok", r.ok},
          {"min_grad_norm", r.min_grad_norm == NondegeneracyReport::kNoElements ? Json(nullptr) : Json(r.min_grad_norm)},
          {"threshold", r.threshold},
          {"witnesses", w},
          {"message", r.message}};
}

Json to_json(const FirstOrderReport& r) {
  return {{"holds", r.holds},
          {"sup_residual", number_json(r.sup_residual)},
          {"kink_levels", r.levels},
          {"nondegeneracy", to_json(r.nondegeneracy)},
          {"structural", {{"c", number_json(r.structural.c)}, {"surface_bound", number_json(r.structural.surface_bound)}}},
          {"curvature", to_json(r.curvature)}};
}

Json to_json(const RayleighResult& r) {
  return {{"q_min", number_json(r.q_min)},        {"lower_bound", number_json(r.lower_bound)},
          {"exact", r.exact},                     {"budget_exhausted", r.budget_exhausted},
          {"method", r.method}};
}

Json to_json(const SOCReport& r) {
  Json j = {{"schema_version", kSchemaVersion}, {"verdict", to_string(r.verdict)}};
  j["first_order"] = to_json(r.first_order);
  j["space"] = {{"surface_dofs", r.surface_dofs},
                {"volume_dofs", r.volume_dofs},
                {"nonneg_dofs", r.nonneg_dofs},
                {"nonpos_dofs", r.nonpos_dofs},
                {"free_dofs", r.surface_dofs + r.volume_dofs - r.nonneg_dofs - r.nonpos_dofs}};
  j["rayleigh"] = to_json(r.rayleigh);
  j["minimizer"] = {{"surface_mass", r.argmin_surface_mass}, {"volume_mass", r.argmin_volume_mass}};
  j["tol_pos"] = number_json(r.tol_pos);
  j["c_pred"] = number_json(r.c_pred);
  j["norm_equivalence"] = 1.0;
  j["eps_suggested"] = number_json(r.eps_suggested);
  j["notes"] = r.notes;
  return j;
}

Json to_json(const GrowthResult& r) {
  int negative = 0;
  for (const auto& s : r.samples) negative += s.quotient < 0.0;
  return {{"schema_version", kSchemaVersion},
          {"c_emp", number_json(r.c_emp)},
          {"eps", r.eps},
          {"samples", r.samples.size()},
          {"negative_samples", negative},
          {"rejected", r.rejected},
          {"worst",
           {{"family", to_string(r.worst.family)},
            {"l1", r.worst.l1},
            {"gap", r.worst.gap},
            {"quotient", number_json(r.worst.quotient)}}}};
}

Json to_json(const DescentAscentReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"eta", r.eta},
          {"lambda_emp", number_json(r.lambda_emp)},
          {"lambda_sampled", number_json(r.lambda_sampled)},
          {"lambda_theory", number_json(r.lambda_theory)},
          {"structural_c", number_json(r.structural_c)},
          {"descent_violations", r.descent_violations},
          {"ascent_violations", r.ascent_violations},
          {"max_descent_ratio", number_json(r.max_descent_ratio)},
          {"min_ascent_quotient", number_json(r.min_ascent_quotient)},
          {"descent_ok", r.descent_ok()},
          {"ascent_ok", r.ascent_ok()}};
}

void write_growth_csv(std::ostream& os, const GrowthResult& r) {
  os << "l1,gap,quotient,family\n";
  for (const auto& s : r.samples)
    os << fmt(s.l1) << ',' << fmt(s.gap) << ',' << fmt(s.quotient) << ',' << to_string(s.family) << '\n';
}

const char* to_string(Reaction r) {
  switch (r) {
    case Reaction::kZero: return "zero";
    case Reaction::kLinear: return "linear";
    case Reaction::kCubic: return "cubic";
  }
  return "?";
}

Reaction reaction_from_string(const std::string& s) {
  for (Reaction r : {Reaction::kZero, Reaction::kLinear, Reaction::kCubic})
    if (s == to_string(r)) return r;
  throw FormatError("unknown reaction '" + s + "' (zero, linear, cubic)");
}

GridField field_from_spec(const Json& spec, const Grid& g, const std::filesystem::path& base) {
  if (spec.is_number()) return GridField::constant(g, spec.get<double>());
  if (spec.contains("constant")) return GridField::constant(g, json_number(spec.at("constant")));
  if (spec.contains("file")) {
    GridField f = load_grid_field(base / spec.at("file").get<std::string>());
    if (!(f.grid() == g)) throw FormatError("field file " + spec.at("file").get<std::string>() + " is on another grid");
    return f;
  }
  if (spec.contains("expr")) {
    const auto tag = spec.at("expr").get<std::string>();
    if (tag == "zero") return GridField::constant(g, 0.0);
    if (tag == "sinsin")
      return GridField::sample(g, [](Point p) { return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y); });
    if (tag == "slab") return GridField::sample(g, [](Point p) { return p.x - 0.5; });
    throw FormatError("unknown field expression '" + tag + "'");
  }
  throw FormatError("field spec must be a number, constant, expr or file: " + spec.dump());
}

ProblemFile load_problem(const std::filesystem::path& p) {
  const Json j = read_json(p);
  const auto base = p.parent_path();
  try {
    const Grid g = grid_from_json(j.at("grid"));
    SemilinearProblem pde(g, reaction_from_string(j.value("reaction", "zero")),
                          field_from_spec(j.value("coef", Json(0.0)), g, base),
                          field_from_spec(j.at("y_d"), g, base));
    CellField u = CellField::constant(g, 0.0);
    const auto& us = j.at("u_bar");
    if (us.contains("file")) {
      u = load_cell_field(base / us.at("file").get<std::string>());
      if (!(u.grid() == g)) throw FormatError("u_bar is on another grid");
    } else {
      u = CellField::constant(g, json_number(us.at("constant")));
    }
    return {j.value("name", p.stem().string()),
            OptimalControlProblem(std::move(pde), convex_fn_from_spec(j.at("g"))), std::move(u)};
  } catch (const Json::exception& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

void write_problem(const std::filesystem::path& dir, const Preset& preset) {
  const auto& pde = preset.problem.pde;
  save(dir / "coef.csv", pde.coef);
  save(dir / "y_d.csv", pde.y_d);
  save(dir / "u_bar.csv", preset.u_bar);
  save(dir / "w_bar.csv", preset.w_bar);
  Json params = Json::object();
  for (const auto& [k, v] : preset.parameters) params[k] = v;
  const Json j = {{"schema_version", kSchemaVersion},
                  {"name", preset.name},
                  {"description", preset.description},
                  {"grid", grid_json(pde.grid)},
                  {"reaction", to_string(pde.reaction)},
                  {"coef", {{"file", "coef.csv"}}},
                  {"y_d", {{"file", "y_d.csv"}}},
                  {"g", to_json(preset.problem.g)},
                  {"u_bar", {{"file", "u_bar.csv"}}},
                  {"w_bar", {{"file", "w_bar.csv"}}},
                  {"parameters", params}};
  write_json(dir / "problem.json", j);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  auto os = open_out(p);
  os << text;
}

Json read_json(const std::filesystem::path& p) {
  auto is = open_in(p);
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

}  // namespace nogap
