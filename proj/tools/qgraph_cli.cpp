// qgraph command-line front end.
//
// Exit codes: 0 success (solve: Converged), 1 usage/input/runtime error,
// 2 solve ended at MaxIters, 3 solve reported UnboundedBelowDetected.
// selftest returns 0 after reporting, or 4 with --strict when a criterion fails.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "qgraph/acceptance.hpp"
#include "qgraph/qgraph.hpp"

namespace fs = std::filesystem;
using namespace qgraph;

namespace {

struct Common {
  std::string graph;
  double trunc_L = 40.0;
  double step_h = 1e-2;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string out;
  std::vector<std::string> formats{"json"};
  std::string config;
};

bool wants(const Common& c, const std::string& f) { return std::find(c.formats.begin(), c.formats.end(), f) != c.formats.end(); }

void emit(const Common& c, const std::string& stem, const std::string& ext, const std::string& body) {
  if (c.out.empty()) {
    std::cout << body;
    if (!body.empty() && body.back() != '\n') std::cout << '\n';
    return;
  }
  fs::create_directories(c.out);
  const auto path = fs::path(c.out) / (stem + "." + ext);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << body;
  std::cerr << "wrote " << path.string() << "\n";
}

std::vector<double> parse_mass_grid(const std::string& s) {
  // "a:b:n" (n evenly spaced points) or a comma list
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    double a, b;
    std::size_t n;
    char c1, c2;
    std::istringstream in(s);
    if (!(in >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 2) throw CLI::ValidationError("--mass-grid", "expected a:b:n with n >= 2");
    for (std::size_t i = 0; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
  }
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw CLI::ValidationError("--mass-grid", "empty grid");
  return out;
}

SolverConfig solver_config(const Common& c) {
  SolverConfig cfg;
  if (!c.config.empty()) {
    std::ifstream f(c.config);
    if (!f) throw std::runtime_error("cannot read " + c.config);
    const auto j = json::parse(f);
    cfg = solver_config_from_json(j.contains("config") ? j["config"] : j);
    return cfg;
  }
  cfg.grid = {c.step_h, c.trunc_L};
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  return cfg;
}

json header(const std::string& command, const MetricGraph& g) {
  return {{"command", command}, {"graph", g.name()}, {"constants", constants_block()}, {"unbounded_definition", unbounded_definition()}};
}

void add_common(CLI::App* app, Common& c, bool needs_graph = true) {
  auto* g = app->add_option("--graph", c.graph, "graph file");
  if (needs_graph) g->required()->check(CLI::ExistingFile);
  app->add_option("--trunc-L", c.trunc_L, "half-line truncation length")->check(CLI::PositiveNumber);
  app->add_option("--step-h", c.step_h, "mesh step")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "seed for random starts");
  app->add_option("--workers", c.workers, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory (default: stdout)");
  app->add_option("--format", c.formats, "json, csv, svg (repeatable or comma separated)")->delimiter(',')->check(CLI::IsMember({"json", "csv", "svg"}));
}

int cmd_classify(const Common& c) {
  const auto g = load_graph(c.graph);
  const auto tc = classify(g);
  auto j = header("classify", g);
  j["topology"] = to_json(g, tc);
  if (wants(c, "json")) emit(c, "classify", "json", j.dump(2));
  if (wants(c, "csv")) {
    std::ostringstream o;
    o << "# qgraph.classify.v1\ngraph,case,tag,bridges,terminal_points\n" << g.name() << ',' << case_letter(tc.tag) << ','
      << to_string(tc.tag) << ',' << tc.bridges.size() << ',' << tc.terminal_points.size() << '\n';
    emit(c, "classify", "csv", o.str());
  }
  std::cerr << g.name() << ": " << critical_mass_text(tc) << "\n";
  return 0;
}

int status_code(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return 0;
    case SolverStatus::MaxIters: return 2;
    case SolverStatus::UnboundedBelowDetected: return 3;
  }
  return 1;
}

int cmd_solve(const Common& c, double mu) {
  const auto g = load_graph(c.graph);
  const auto cfg = solver_config(c);
  const auto r = minimize_at_mass(g, mu, cfg);
  auto j = header("solve", g);
  j["config"] = to_json(cfg);
  j["mass"] = mu;
  j["result"] = to_json(r, true, true);
  if (wants(c, "json")) emit(c, "solve", "json", j.dump(2));
  if (wants(c, "csv")) emit(c, "solve_profile", "csv", profile_csv(r.u));
  if (wants(c, "svg")) emit(c, "solve_profile", "svg", profile_svg(r.u, g.name() + "  mu = " + std::to_string(mu) + "  " + to_string(r.status)));
  std::cerr << to_string(r.status) << "  E = " << r.energy.total << "  omega = " << r.omega << "\n";
  return status_code(r.status);
}

int cmd_scan(const Common& c, const std::string& grid_text) {
  const auto g = load_graph(c.graph);
  const auto cfg = solver_config(c);
  const auto grid = parse_mass_grid(grid_text);
  const auto s = energy_scan(g, grid, cfg);
  auto j = header("scan", g);
  j["config"] = to_json(cfg);
  j["mass_grid"] = grid;
  j["scan"] = to_json(s);
  if (wants(c, "json")) emit(c, "scan", "json", j.dump(2));
  if (wants(c, "csv")) emit(c, "scan", "csv", scan_csv(s));
  if (wants(c, "svg")) emit(c, "scan", "svg", scan_svg(s, g.name() + ": best energy vs mass"));
  return 0;
}

int cmd_gn(const Common& c) {
  const auto g = load_graph(c.graph);
  GNConfig cfg;
  cfg.grid = {c.step_h, c.trunc_L};
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  const auto est = maximize_quotient(g, cfg);
  const auto rep = consistency_report(g, est, classify(g));
  auto j = header("gn", g);
  j["config"] = to_json(cfg);
  j["estimate"] = to_json(est);
  j["consistency"] = to_json(rep);
  if (wants(c, "json")) emit(c, "gn", "json", j.dump(2));
  if (wants(c, "csv")) emit(c, "gn", "csv", gn_csv(est));
  if (wants(c, "svg")) emit(c, "gn_maximizer", "svg", profile_svg(est.maximizer, g.name() + ": quotient maximizer"));
  std::cerr << rep.summary << "\n";
  return 0;
}

std::string line_profile_csv(const PiecewiseLinear& p) {
  std::ostringstream o;
  o << "# qgraph.rearranged.v1\nx,value\n";
  o.precision(17);
  for (std::size_t i = 0; i < p.x.size(); ++i) o << p.x[i] << ',' << p.y[i] << '\n';
  return o.str();
}

int cmd_transform(const Common& c, const std::string& function_file, const std::string& name) {
  const auto g = load_graph(c.graph);
  std::ifstream f(function_file);
  if (!f) throw std::runtime_error("cannot read " + function_file);
  auto jf = json::parse(f);
  // a solve record carries its function under result.function
  if (jf.contains("result") && jf["result"].contains("function")) jf = jf["result"]["function"];
  const auto u = function_from_json(jf, discretization_from_json(jf, g));
  auto j = header("transform", g);
  j["transform"] = name;
  if (name == "bridge_double") {
    const auto bd = bridge_double(u);
    json bridges = json::array();
    double m_b = 0.0, p6_b = 0.0;
    for (std::size_t e : bd.bridges) {
      bridges.push_back(g.edge(e).id);
      m_b += edge_mass(u, e);
      p6_b += edge_lp(u, e, 6);
    }
    const auto bb = bridge_doubling_bound_check(u.abs());
    j["bridges"] = bridges;
    j["identities"] = {{"mass", {{"doubled", mass(bd.u)}, {"expected", mass(u) + 3.0 * m_b}}},
                       {"L6", {{"doubled", lp_norm_p(bd.u, 6)}, {"expected", lp_norm_p(u, 6) + 3.0 * p6_b}}},
                       {"kinetic", {{"doubled", kinetic(bd.u)}, {"expected", kinetic(u)}}}};
    j["bound"] = {{"lhs", bb.lhs}, {"rhs", bb.rhs}, {"holds", bb.lhs <= bb.rhs}};
    j["doubled_is_cycle_covered"] = has_cycle_covering(bd.graph);
    if (wants(c, "json")) {
      emit(c, "transform", "json", j.dump(2));
      if (!c.out.empty()) {
        emit(c, "doubled", "graph", to_text(bd.graph));
        emit(c, "doubled_function", "json", to_json(bd.u).dump());
      }
    }
    if (wants(c, "svg")) emit(c, "doubled_profile", "svg", profile_svg(bd.u, bd.graph.name()));
    return 0;
  }
  if (name == "decreasing" || name == "symmetric") {
    const auto r = name == "decreasing" ? decreasing_rearrangement(u) : symmetric_rearrangement(u);
    j["domain"] = name == "decreasing" ? "half-line" : "line";
    j["norms"] = {{"mass", {{"source", mass(u)}, {"rearranged", r.mass()}}},
                  {"L6", {{"source", lp_norm_p(u, 6)}, {"rearranged", r.lp_norm_p(6)}}},
                  {"cell_model_L6", {{"source", cell_model_lp(u, 6)}, {"rearranged", r.cell_lp_norm_p(6)}}},
                  {"kinetic", {{"source", kinetic(u)}, {"rearranged", r.kinetic()}}}};
    j["reinterpolation_error"] = r.reinterpolation_error;
    j["kinetic_bound_asserted"] = name == "decreasing" || has_cycle_covering(g);
    if (wants(c, "json")) emit(c, "transform", "json", j.dump(2));
    if (wants(c, "csv")) emit(c, "rearranged", "csv", line_profile_csv(r.profile));
    if (wants(c, "svg")) emit(c, "rearranged", "svg", to_svg({name + " rearrangement", "x", "value", {{"u", r.profile.x, r.profile.y}}, {}}));
    return 0;
  }
  if (name == "modified_gn") {
    const auto m = modified_gn_check(u);
    j["modified_gn"] = {{"mu", m.mu},        {"ell", m.ell},           {"theta", m.theta},           {"lhs", m.lhs},
                        {"rhs_kinetic", m.rhs_kinetic}, {"measured_C", m.measured_C}, {"C_graph", m.C_graph},
                        {"gamma", m.gamma},  {"x0", m.tail.x0},        {"lambda", m.tail.lambda}};
    if (wants(c, "json")) emit(c, "transform", "json", j.dump(2));
    return 0;
  }
  throw CLI::ValidationError("--name", "unknown transform '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgraph: ground states of the quintic NLS on metric graphs"};
  app.require_subcommand(1);
  Common c;
  double mu = 0.0;
  std::string grid = "0.8:2.8:11", function_file, transform = "bridge_double";
  std::vector<std::string> only;
  bool strict = false;

  auto* classify_cmd = app.add_subcommand("classify", "topology class and critical mass");
  add_common(classify_cmd, c);
  auto* solve_cmd = app.add_subcommand("solve", "minimize the energy at fixed mass");
  add_common(solve_cmd, c);
  solve_cmd->add_option("--mass", mu, "mass mu")->required()->check(CLI::PositiveNumber);
  solve_cmd->add_option("--config", c.config, "reuse the config block of an earlier run record");
  auto* scan_cmd = app.add_subcommand("scan", "best energy over a mass grid");
  add_common(scan_cmd, c);
  scan_cmd->add_option("--mass-grid", grid, "a:b:n or comma list")->capture_default_str();
  scan_cmd->add_option("--config", c.config, "reuse the config block of an earlier run record");
  auto* gn_cmd = app.add_subcommand("gn", "lower bound on the Gagliardo-Nirenberg constant");
  add_common(gn_cmd, c);
  auto* tr_cmd = app.add_subcommand("transform", "apply a transform to a stored function");
  add_common(tr_cmd, c);
  tr_cmd->add_option("--function", function_file, "function document (qgraph-function/1) or a solve record")->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("--name", transform, "bridge_double, decreasing, symmetric, modified_gn")->capture_default_str();
  auto* self_cmd = app.add_subcommand("selftest", "run the acceptance suite");
  add_common(self_cmd, c, false);
  self_cmd->add_option("--only", only, "criterion ids")->delimiter(',');
  self_cmd->add_flag("--strict", strict, "nonzero exit when a criterion fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    if (*classify_cmd) return cmd_classify(c);
    if (*solve_cmd) return cmd_solve(c, mu);
    if (*scan_cmd) return cmd_scan(c, grid);
    if (*gn_cmd) return cmd_gn(c);
    if (*tr_cmd) return cmd_transform(c, function_file, transform);
    if (*self_cmd) {
      acceptance::Options o;
      o.fixture_dir = QGRAPH_FIXTURE_DIR;
      o.workers = c.workers;
      o.only.insert(only.begin(), only.end());
      const auto res = acceptance::run(o);
      bool all = true;
      for (const auto& r : res) all &= r.passed;
      return strict && !all ? 4 : 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
