#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include "nogap/coarea_limits.hpp"
#include "nogap/field_fixtures.hpp"
#include "nogap/growth.hpp"
#include "nogap/io.hpp"
#include "nogap/parallel.hpp"
#include "nogap/presets.hpp"
#include "nogap/scalar_fixtures.hpp"

namespace fs = std::filesystem;
using namespace nogap;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const NonConvexError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// Command-line flags merged over the optional JSON config; config paths are relative to it.
struct Config {
  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  int threads = 1;
  std::string preset, problem;
  Json doc = Json::object();
  fs::path base = ".";

  void load() {
    if (!config_path.empty()) {
      doc = read_json(config_path);
      base = fs::absolute(config_path).parent_path();
    }
    if (!seed && doc.contains("seed")) seed = doc.at("seed").get<std::uint64_t>();
    if (!grid && doc.contains("grid")) grid = doc.at("grid").get<int>();
    if (preset.empty()) preset = doc.value("preset", "");
    if (problem.empty() && doc.contains("problem")) problem = (base / doc.at("problem").get<std::string>()).string();
    if (doc.contains("threads") && threads == 1) threads = doc.at("threads").get<int>();
    set_thread_count(threads);
  }
  template <class T>
  T get(const char* key, T fallback) const {
    return doc.contains(key) ? doc.at(key).get<T>() : fallback;
  }
  std::uint64_t require_seed(const char* command) const {
    if (!seed) throw std::invalid_argument(std::string(command) + " is stochastic: pass --seed or a config seed");
    return *seed;
  }
  fs::path out_dir() const {
    fs::create_directories(out);
    return out;
  }
};

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--grid", c.grid, "nodes per side of the PDE grid");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

void add_problem(CLI::App* sub, Config& c) {
  sub->add_option("--preset", c.preset, "preset name: bangbang-positive, bangbang-indefinite, l0");
  sub->add_option("--problem", c.problem, "problem.json written by the preset command")->check(CLI::ExistingFile);
}

ProblemFile resolve_problem(const Config& c) {
  return stage("problem", [&] {
    if (!c.problem.empty()) return load_problem(c.problem);
    if (c.preset.empty()) throw std::invalid_argument("pass --preset or --problem (or set one in the config)");
    Preset p = make_preset(c.preset, c.grid.value_or(65));
    return ProblemFile{p.name, std::move(p.problem), std::move(p.u_bar)};
  });
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int finish(const char* command, bool pass, double seconds) {
  std::cout << command << ": " << (pass ? "PASS" : "FAIL") << " (" << seconds << " s)\n";
  return pass ? 0 : kExitFail;
}

// ---------------------------------------------------------------------------------------------

int cmd_conjugate(Config& c, const std::string& g_path) {
  const auto t0 = std::chrono::steady_clock::now();
  Json spec;
  if (!g_path.empty())
    spec = read_json(g_path);
  else if (c.doc.contains("g"))
    spec = c.doc.at("g").contains("file") ? read_json(c.base / c.doc.at("g").at("file").get<std::string>()) : c.doc.at("g");
  else
    throw std::invalid_argument("conjugate: pass --g FILE or set \"g\" in the config");
  const PiecewiseConvexFn g = stage("read", [&] { return convex_fn_from_spec(spec); });
  const PiecewiseConvexFn j = stage("conjugate", [&] { return conjugate(g); });

  const int points = c.get("points", 1000);
  double lo = -5.0, hi = 5.0;
  if (c.doc.contains("range")) {
    lo = c.doc.at("range").at(0).get<double>();
    hi = c.doc.at("range").at(1).get<double>();
  } else if (!j.nodes().empty()) {
    lo = j.nodes().front() - 2.0;
    hi = j.nodes().back() + 2.0;
  }
  SamplingGrid sg;
  if (g.domain().bounded()) {
    sg.lo = g.domain().lo;
    sg.hi = g.domain().hi;
  } else {
    sg.lo = c.get("oracle_lo", -50.0);
    sg.hi = c.get("oracle_hi", 50.0);
  }
  sg.points = c.get("oracle_points", sg.points);

  const fs::path out = c.out_dir();
  std::ofstream csv(out / "samples.csv");
  csv << "w,j,j_oracle,mismatch\n";
  csv.precision(17);
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const double w = lo + (hi - lo) * k / (points - 1);
    const double a = j(w);
    const double b = stage("oracle", [&] { return conjugate_numeric(g, w, sg); });
    const double m = std::abs(a - b);
    worst = std::max(worst, m);
    csv << w << ',' << a << ',' << b << ',' << m << '\n';
  }
  const double tol = c.get("tolerance", 1e-6);
  write_json(out / "conjugate.json", to_json(j));
  write_json(out / "summary.json", {{"schema_version", kSchemaVersion},
                                    {"command", "conjugate"},
                                    {"points", points},
                                    {"range", {lo, hi}},
                                    {"max_mismatch", worst},
                                    {"tolerance", tol},
                                    {"pass", worst <= tol}});
  return finish("conjugate", worst <= tol, seconds_since(t0));
}

// ---------------------------------------------------------------------------------------------

struct Check {
  std::string name;
  Json data;
  bool pass = false;
};

struct FixtureResult {
  std::string name;
  bool required = true;
  std::string status;
  std::vector<Check> checks;
  bool pass() const {
    for (const auto& ch : checks)
      if (!ch.pass) return false;
    return true;
  }
};

Check study_check(const fs::path& dir, const LimitStudy& s, double tol, double min_order = -1.0) {
  std::ofstream os(dir / (s.name + ".csv"));
  write_study_csv(os, s);
  Json d = study_summary(s, tol);
  bool pass = s.mismatch() <= tol;
  if (min_order >= 0.0) {
    d["min_order"] = min_order;
    pass = pass && s.order() >= min_order;
  }
  d["pass"] = pass;
  return {s.name, d, pass};
}

PiecewiseConvexFn positive_part() {
  return PiecewiseConvexFn::from_pieces({0.0}, {Quadratic{0, 0, 0}, Quadratic{0, 1, 0}});
}

FixtureResult fixture_circle(const fs::path& dir, int n, double tol) {
  FixtureResult r;
  r.name = "circle";
  const auto w = circle_field(n);
  const auto one = GridField::constant(w.grid(), 1.0);
  const PointFunction unit = [](Point) { return 1.0; };
  r.checks.push_back(study_check(dir, limit_a(w, one, unit), tol));
  r.checks.push_back(study_check(dir, limit_b(w, one, unit), tol));
  r.checks.push_back(study_check(dir, limit_c(w, one), tol));
  // Direction and weight that make the quotients move with t, to measure the order.
  const auto z = GridField::sample(w.grid(), [](Point p) { return 1.0 + 0.5 * p.x; });
  const PointFunction psi = [](Point p) { return 1.0 + 0.25 * p.y; };
  for (auto s : {limit_a(w, z, psi), limit_b(w, z, psi), limit_c(w, z)}) {
    s.name += "_varying";
    r.checks.push_back(study_check(dir, s, tol, 0.8));
  }
  auto sq = second_quotient_J(positive_part(), w, one);
  sq.name = "second_quotient_positive_part";
  r.checks.push_back(study_check(dir, sq, 0.02));
  return r;
}

Check tube_check(const GridField& w, double t, double tol) {
  const auto mesh = extract_level_set(w, 0.0);
  const double target = 2.0 * weighted_surface_integral(mesh, [](Point) { return 1.0; });
  const double q = tube_measure(w, 0.0, t) / t;
  const double m = std::abs(q - target) / target;
  return {"tube_quotient", {{"t", t}, {"quotient", q}, {"target", target}, {"mismatch", m}, {"tolerance", tol}, {"pass", m <= tol}},
          m <= tol};
}

FixtureResult fixture_slab(const fs::path& dir, int n) {
  FixtureResult r;
  r.name = "slab";
  const auto w = slab_field(n);
  const auto one = GridField::constant(w.grid(), 1.0);
  const PointFunction unit = [](Point) { return 1.0; };
  auto a = limit_a(w, one, unit);
  r.checks.push_back(study_check(dir, a, 1e-6));
  auto sd = subdiff_study(positive_part(), w, one, unit);
  sd.pairing.name = "subdiff_pairing";
  sd.norm.name = "subdiff_norm";
  r.checks.push_back(study_check(dir, sd.pairing, 0.02));
  r.checks.push_back(study_check(dir, sd.norm, 0.02));
  r.checks.push_back(tube_check(w, 1e-3, 0.02));
  return r;
}

FixtureResult fixture_circle_tube(int n) {
  FixtureResult r;
  r.name = "circle_tube";
  r.checks.push_back(tube_check(circle_field(n), 1e-3, 0.02));
  return r;
}

FixtureResult fixture_cube(const fs::path& dir, int n, double tol) {
  FixtureResult r;
  r.name = "cube1d";
  const auto w = cube_field_1d(n);
  const auto one = GridField::constant(w.grid(), 1.0);
  r.checks.push_back(study_check(dir, limit_a(w, one, [](Point) { return 1.0; }), tol));
  return r;
}

FixtureResult fixture_sharpness(const fs::path& dir, int n) {
  FixtureResult r;
  r.name = "example35";
  const auto f = sharpness_fixture(n);
  StudyOptions opts;
  opts.cutoff_margin = 0.0;
  auto s = second_quotient_J(positive_part(), f.w, f.z, opts);
  std::ofstream os(dir / (s.name + ".csv"));
  write_study_csv(os, s);
  // The surface target vanishes while the quotient tends to 1/2: the divergence is the point.
  const bool diverges = s.target == 0.0 && std::abs(s.limit() - 0.5) <= 0.02 &&
                        std::abs(s.quotients.back() - 0.5) <= 0.02;
  r.status = diverges ? "EXPECTED_DIVERGENCE" : "UNEXPECTED";
  Json d = study_summary(s, 0.02);
  d["expected_limit"] = 0.5;
  d["status"] = r.status;
  d["pass"] = diverges;
  r.checks.push_back({s.name, d, diverges});
  return r;
}

int cmd_validate_limits(Config& c, std::vector<std::string> fixtures) {
  const auto t0 = std::chrono::steady_clock::now();
  if (fixtures.empty()) fixtures = c.get("fixtures", std::vector<std::string>{"circle", "slab", "cube1d", "example35"});
  const double tol = c.get("tolerance", 0.015);
  const fs::path out = c.out_dir();
  Json list = Json::array();
  bool pass = true;
  for (const auto& name : fixtures) {
    const fs::path dir = out / name;
    fs::create_directories(dir);
    FixtureResult r = stage(name, [&] {
      if (name == "circle") return fixture_circle(dir, c.grid.value_or(257), tol);
      if (name == "circle_tube") return fixture_circle_tube(c.grid.value_or(257));
      if (name == "slab") return fixture_slab(dir, c.grid.value_or(65));
      if (name == "cube1d") return fixture_cube(dir, c.get("grid_1d", 4001), tol);
      if (name == "example35") return fixture_sharpness(dir, c.get("grid_1d", 2001));
      throw std::invalid_argument("unknown fixture '" + name + "'");
    });
    Json checks = Json::array();
    for (const auto& ch : r.checks) checks.push_back(ch.data);
    const bool ok = r.pass();
    if (r.status.empty()) r.status = ok ? "PASS" : "FAIL";
    list.push_back({{"name", r.name}, {"required", r.required}, {"status", r.status}, {"pass", ok}, {"checks", checks}});
    std::cout << "  " << r.name << ": " << r.status << '\n';
    pass = pass && (ok || !r.required);
  }
  write_json(out / "summary.json", {{"schema_version", kSchemaVersion}, {"command", "validate-limits"}, {"fixtures", list}, {"pass", pass}});
  return finish("validate-limits", pass, seconds_since(t0));
}

// ---------------------------------------------------------------------------------------------

int cmd_check_assumptions(Config& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemFile pf = resolve_problem(c);
  FirstOrderOptions fo;
  fo.eta = c.get("eta", fo.eta);
  const auto r = stage("first_order", [&] { return first_order_check(pf.problem, pf.u_bar, fo); });
  const fs::path out = c.out_dir();
  for (std::size_t k = 0; k < r.levels.size(); ++k) {
    try {
      std::ofstream os(out / ("level_" + std::to_string(k) + ".csv"));
      write_mesh_csv(os, extract_level_set(r.w, r.levels[k]));
    } catch (const DegenerateCellError&) {
      // reported through the nondegeneracy block
    }
  }
  const bool structural = r.levels.empty() || std::isfinite(r.structural.c);
  const bool pass = r.holds && r.nondegeneracy.ok && structural && r.curvature.holds;
  Json j = {{"schema_version", kSchemaVersion}, {"command", "check-assumptions"}, {"problem", pf.name}};
  j["first_order"] = to_json(r);
  j["note"] = "the structural bound is checked in place of the nondegeneracy growth condition itself";
  j["pass"] = pass;
  write_json(out / "assumptions.json", j);
  return finish("check-assumptions", pass, seconds_since(t0));
}

SOCOptions soc_options(const Config& c, std::uint64_t seed) {
  SOCOptions o;
  o.tol_pos = c.get("tol_pos", o.tol_pos);
  o.rayleigh.starts = c.get("starts", o.rayleigh.starts);
  o.rayleigh.iterations = c.get("iterations", o.rayleigh.iterations);
  o.rayleigh.seed = seed;
  o.first_order.eta = c.get("eta", o.first_order.eta);
  return o;
}

int cmd_soc(Config& c, const std::string& expect) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto seed = c.require_seed("soc");
  const ProblemFile pf = resolve_problem(c);
  const SOCReport r = stage("soc", [&] { return soc_verdict(pf.problem, pf.u_bar, soc_options(c, seed)); });
  const fs::path out = c.out_dir();
  Json j = to_json(r);
  j["problem"] = pf.name;
  j["seed"] = seed;
  write_json(out / "soc_report.json", j);
  if (r.Q && r.rayleigh.argmin.size() > 0) {
    std::ofstream os(out / "argmin_measure.txt");
    write_measure(os, r.Q->space.measure(r.rayleigh.argmin));
  }
  std::cout << "verdict " << to_string(r.verdict) << ", q_min " << r.rayleigh.q_min << '\n';
  const std::string want = expect.empty() ? c.get("expect", std::string()) : expect;
  return finish("soc", want.empty() || want == to_string(r.verdict), seconds_since(t0));
}

int cmd_growth(Config& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto seed = c.require_seed("growth");
  const ProblemFile pf = resolve_problem(c);
  const SOCReport soc = stage("soc", [&] { return soc_verdict(pf.problem, pf.u_bar, soc_options(c, seed)); });
  const fs::path out = c.out_dir();
  write_json(out / "soc_report.json", to_json(soc));
  if (soc.verdict == Verdict::kFirstOrderFail) {
    std::cout << "first-order condition fails; no growth test\n";
    return finish("growth", false, seconds_since(t0));
  }

  std::vector<double> eps = c.get("eps", std::vector<double>{});
  if (eps.empty()) eps.push_back(soc.eps_suggested);
  GrowthOptions go;
  go.samples = c.get("samples", go.samples);
  go.seed = seed;
  go.transported_fraction = c.get("transported_fraction", go.transported_fraction);

  Json runs = Json::array();
  bool consistent = true;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    go.eps = eps[k];
    const GrowthResult g = stage("growth", [&] { return growth_test(pf.problem, pf.u_bar, soc, go); });
    std::ofstream os(out / (eps.size() == 1 ? std::string("growth.csv") : "growth_" + std::to_string(k) + ".csv"));
    write_growth_csv(os, g);
    bool negative_transported = false;
    for (const auto& s : g.samples) negative_transported |= s.family == SampleFamily::kTransported && s.quotient < 0.0;
    bool ok = true;
    if (soc.verdict == Verdict::kPositive) ok = g.c_emp > 0.0;
    if (soc.verdict == Verdict::kIndefinite) ok = g.c_emp < 0.0;
    Json jr = to_json(g);
    jr["negative_transported"] = negative_transported;
    jr["c_pred"] = soc.c_pred;
    jr["consistent"] = ok;
    runs.push_back(jr);
    consistent = consistent && ok;
    std::cout << "eps " << g.eps << ": c_emp " << g.c_emp << " over " << g.samples.size() << " samples\n";
  }

  DescentAscentOptions da;
  da.seed = seed;
  da.descent_samples = c.get("descent_samples", da.descent_samples);
  da.ascent_samples = c.get("ascent_samples", da.ascent_samples);
  const double eta = c.get("eta", 0.1) * soc.first_order.w.max_abs();
  const auto dar = stage("descent_ascent", [&] {
    return descent_ascent_constants(pf.problem.g, soc.first_order.w, pf.u_bar, eta, da);
  });
  const bool lemmas = dar.descent_ok() && dar.ascent_ok();
  write_json(out / "growth_summary.json", {{"schema_version", kSchemaVersion},
                                           {"command", "growth"},
                                           {"problem", pf.name},
                                           {"seed", seed},
                                           {"verdict", to_string(soc.verdict)},
                                           {"c_pred", number_json(soc.c_pred)},
                                           {"runs", runs},
                                           {"descent_ascent", to_json(dar)},
                                           {"consistent", consistent},
                                           {"pass", consistent && lemmas}});
  return finish("growth", consistent && lemmas, seconds_since(t0));
}

int cmd_preset(Config& c, const std::string& name) {
  const auto t0 = std::chrono::steady_clock::now();
  const Preset p = stage("preset", [&] { return make_preset(name, c.grid.value_or(65)); });
  write_problem(c.out_dir(), p);
  return finish("preset", true, seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"No-gap second-order conditions on structured measures: batch experiments."};
  app.require_subcommand(1);
  Config cfg;

  std::string g_path;
  auto* conj = app.add_subcommand("conjugate", "conjugate a convex piecewise quadratic and compare with a sampled sup");
  add_common(conj, cfg);
  conj->add_option("--g", g_path, "convex function JSON")->check(CLI::ExistingFile);

  std::vector<std::string> fixtures;
  auto* lim = app.add_subcommand("validate-limits", "run the limit studies over the fixture catalog");
  add_common(lim, cfg);
  lim->add_option("--fixtures", fixtures, "circle, circle_tube, slab, cube1d, example35");

  auto* ass = app.add_subcommand("check-assumptions", "first-order, nondegeneracy and structural checks");
  add_common(ass, cfg);
  add_problem(ass, cfg);

  std::string expect;
  auto* soc = app.add_subcommand("soc", "second-order verdict");
  add_common(soc, cfg);
  add_problem(soc, cfg);
  soc->add_option("--expect", expect, "exit nonzero unless the verdict matches");

  auto* gro = app.add_subcommand("growth", "empirical quadratic growth and descent/ascent constants");
  add_common(gro, cfg);
  add_problem(gro, cfg);

  std::string preset_name;
  auto* pre = app.add_subcommand("preset", "write the problem files of a preset");
  add_common(pre, cfg);
  pre->add_option("name", preset_name, "bangbang-positive, bangbang-indefinite or l0")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    cfg.load();
    if (*conj) return cmd_conjugate(cfg, g_path);
    if (*lim) return cmd_validate_limits(cfg, fixtures);
    if (*ass) return cmd_check_assumptions(cfg);
    if (*soc) return cmd_soc(cfg, expect);
    if (*gro) return cmd_growth(cfg);
    if (*pre) return cmd_preset(cfg, preset_name);
  } catch (const NonConvexError& e) {
    std::cerr << "error: input is not convex: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
