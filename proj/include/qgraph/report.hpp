#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgraph/gn_estimator.hpp"
#include "qgraph/reference.hpp"
#include "qgraph/solver.hpp"
#include "qgraph/topology.hpp"
#include "qgraph/transforms.hpp"

namespace qgraph {

using json = nlohmann::json;

/// CSV files start with "# <schema>" and then a fixed header row.
inline constexpr const char* kScanCsvSchema = "qgraph.scan.v1";
inline constexpr const char* kGnCsvSchema = "qgraph.gn.v1";
inline constexpr const char* kProfileCsvSchema = "qgraph.profile.v1";

/// Operational meaning of UnboundedBelowDetected, written into every run record.
inline const char* unbounded_definition() {
  return "UnboundedBelowDetected: a mass-mu state with energy below -E_cut and half-mass width below "
         "width_factor * h_min was found (detected at this resolution, not proved)";
}

inline json constants_block() {
  return {{"mu_R", Constants::mu_R},
          {"mu_R_plus", Constants::mu_R_plus},
          {"K_R", Constants::K_R},
          {"K_R_plus", Constants::K_R_plus}};
}

inline json to_json(const GridSpec& g) { return {{"step_h", g.step_h}, {"trunc_L", g.trunc_L}}; }

inline json to_json(const SolverConfig& c) {
  return {{"max_iters", c.max_iters},
          {"tol", c.tol},
          {"armijo", c.armijo},
          {"initial_step", c.initial_step},
          {"max_step", c.max_step},
          {"E_cut", c.E_cut},
          {"width_factor", c.width_factor},
          {"multi_start", c.multi_start},
          {"starts_per_family", c.starts_per_family},
          {"seed", c.seed},
          {"probe", c.probe},
          {"probe_lambda_max", c.probe_lambda_max},
          {"stall_window", c.stall_window},
          {"stall_rel", c.stall_rel},
          {"workers", c.workers},
          {"grid", to_json(c.grid)}};
}

inline json to_json(const GNConfig& c) {
  return {{"max_iters", c.max_iters},
          {"armijo", c.armijo},
          {"stall_window", c.stall_window},
          {"stall_rel", c.stall_rel},
          {"random_starts", c.random_starts},
          {"starts_per_family", c.starts_per_family},
          {"seed", c.seed},
          {"workers", c.workers},
          {"eps_levels", c.eps_levels},
          {"eps_reach", c.eps_reach},
          {"grid", to_json(c.grid)}};
}

/// The solver settings a run record stores, read back; keys that are
/// missing keep their defaults.
inline SolverConfig solver_config_from_json(const json& j) {
  SolverConfig c;
  c.max_iters = j.value("max_iters", c.max_iters);
  c.tol = j.value("tol", c.tol);
  c.armijo = j.value("armijo", c.armijo);
  c.initial_step = j.value("initial_step", c.initial_step);
  c.max_step = j.value("max_step", c.max_step);
  c.E_cut = j.value("E_cut", c.E_cut);
  c.width_factor = j.value("width_factor", c.width_factor);
  c.multi_start = j.value("multi_start", c.multi_start);
  c.starts_per_family = j.value("starts_per_family", c.starts_per_family);
  c.seed = j.value("seed", c.seed);
  c.probe = j.value("probe", c.probe);
  c.probe_lambda_max = j.value("probe_lambda_max", c.probe_lambda_max);
  c.stall_window = j.value("stall_window", c.stall_window);
  c.stall_rel = j.value("stall_rel", c.stall_rel);
  c.workers = j.value("workers", c.workers);
  if (j.contains("grid")) {
    c.grid.step_h = j["grid"].value("step_h", c.grid.step_h);
    c.grid.trunc_L = j["grid"].value("trunc_L", c.grid.trunc_L);
  }
  return c;
}

inline std::string critical_mass_text(const TopologyClass& tc) {
  std::string s = std::string("case (") + case_letter(tc.tag) + "), ";
  switch (tc.tag) {
    case TopologyTag::Tip:
    case TopologyTag::OneHalfLineNoTip: return s + "mu_G = pi*sqrt(3)/4 exactly";
    case TopologyTag::CycleCovered: return s + "mu_G = pi*sqrt(3)/2 exactly";
    case TopologyTag::Other: return s + "mu_G in [pi*sqrt(3)/4, pi*sqrt(3)/2]";
  }
  return s;
}

inline json to_json(const MetricGraph& g, const TopologyClass& tc) {
  json tips = json::array(), bridges = json::array();
  for (std::size_t v : tc.terminal_points) tips.push_back(g.vertices()[v]);
  for (std::size_t e : tc.bridges) bridges.push_back(g.edge(e).id);
  const auto cm = critical_mass_exact(tc);
  json j{{"graph", g.name()},
         {"case", case_letter(tc.tag)},
         {"tag", to_string(tc.tag)},
         {"terminal_points", tips},
         {"bridges", bridges},
         {"half_lines", tc.half_line_count},
         {"critical_mass", {{"lower", cm.lower}, {"upper", cm.upper}}},
         {"summary", critical_mass_text(tc)}};
  if (cm.exact) j["critical_mass"]["exact"] = *cm.exact;
  return j;
}

inline json to_json(const ProbeResult& p) {
  return {{"detected", p.detected},   {"kind", p.kind},         {"edge", p.edge},
          {"lambdas", p.lambdas},     {"energies", p.energies}, {"widths", p.widths},
          {"scaling_ratio", p.scaling_ratio}};
}

inline json to_json(const GroundStateResult& r, bool with_log = false, bool with_function = false) {
  json j{{"status", to_string(r.status)},
         {"energy", r.energy.total},
         {"best_energy", r.best_energy},
         {"kinetic", r.energy.kinetic},
         {"potential", r.energy.potential},
         {"mass", r.energy.mass},
         {"omega", r.omega},
         {"residual", r.residual},
         {"iterations", r.iterations},
         {"init", r.init_label},
         {"half_mass_width", half_mass_width(r.u)}};
  if (r.probe) j["probe"] = to_json(*r.probe);
  if (with_log) {
    json log = json::array();
    for (const auto& it : r.log) log.push_back({it.iter, it.energy, it.residual, it.omega, it.step});
    j["log"] = {{"columns", {"iter", "energy", "residual", "omega", "step"}}, {"rows", log}};
  }
  if (with_function) j["function"] = to_json(r.u);
  return j;
}

inline json to_json(const EnergyScan& s) {
  json pts = json::array();
  for (std::size_t i = 0; i < s.masses.size(); ++i) {
    json p{{"mu", s.masses[i]}, {"energy", s.energies[i]}, {"status", to_string(s.statuses[i])}, {"omega", s.omegas[i]},
           {"residual", s.residuals[i]}};
    if (!s.errors[i].empty()) p["error"] = s.errors[i];
    pts.push_back(p);
  }
  json b{{"budget", s.budget}};
  b["lower"] = s.bracket_lower ? json(*s.bracket_lower) : json(nullptr);
  b["upper"] = s.bracket_upper ? json(*s.bracket_upper) : json(nullptr);
  b["unbounded_onset"] = s.unbounded_onset ? json(*s.unbounded_onset) : json(nullptr);
  bool monotone = true;
  for (std::size_t i = 1; i < s.energies.size(); ++i) monotone &= !(s.energies[i] > s.energies[i - 1]);
  return {{"points", pts}, {"bracket", b}, {"observed_nonincreasing", monotone}};
}

inline json to_json(const GNEstimate& e) {
  json runs = json::array();
  for (const auto& r : e.runs)
    runs.push_back({{"family", r.family},
                    {"label", r.label},
                    {"epsilon", r.epsilon},
                    {"initial_quotient", r.initial_quotient},
                    {"final_quotient", r.final_quotient},
                    {"iterations", r.iterations}});
  json j{{"K_lower", e.K_lower}, {"mu_upper", e.mu_upper}, {"family", e.family}, {"label", e.label},
         {"truncation_limited", e.truncation_limited}, {"runs", runs}};
  j["K_exact"] = e.K_exact ? json(*e.K_exact) : json(nullptr);
  j["mu_exact"] = e.mu_exact ? json(*e.mu_exact) : json(nullptr);
  j["epsilon"] = e.epsilon ? json(*e.epsilon) : json(nullptr);
  return j;
}

inline json to_json(const ConsistencyReport& r) {
  json j{{"case", case_letter(r.tag)},
         {"K_lower", r.K_lower},
         {"mu_upper", r.mu_upper},
         {"budget", r.budget},
         {"violation", r.violation},
         {"within_universal_bounds", r.within_universal_bounds},
         {"margin_below_mu_R", r.margin_below_mu_R},
         {"summary", r.summary}};
  j["K_exact"] = r.K_exact ? json(*r.K_exact) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string scan_csv(const EnergyScan& s) {
  std::ostringstream o;
  o << "# " << kScanCsvSchema << "\nmu,energy,omega,residual,status\n";
  for (std::size_t i = 0; i < s.masses.size(); ++i)
    o << detail::fmt(s.masses[i]) << ',' << detail::fmt(s.energies[i]) << ',' << detail::fmt(s.omegas[i]) << ','
      << detail::fmt(s.residuals[i]) << ',' << (s.errors[i].empty() ? to_string(s.statuses[i]) : "Error") << '\n';
  return o.str();
}

inline std::string gn_csv(const GNEstimate& e) {
  std::ostringstream o;
  o << "# " << kGnCsvSchema << "\nfamily,label,epsilon,initial_quotient,final_quotient,iterations\n";
  for (const auto& r : e.runs)
    o << r.family << ',' << r.label << ',' << detail::fmt(r.epsilon) << ',' << detail::fmt(r.initial_quotient) << ','
      << detail::fmt(r.final_quotient) << ',' << r.iterations << '\n';
  return o.str();
}

/// Edges laid end to end in file order along one arclength axis. Half-lines
/// show only their first `half_line_window` units.
struct Unrolled {
  std::vector<std::string> edge;
  std::vector<double> s;  ///< arclength on the edge
  std::vector<double> x;  ///< position on the unrolled axis
  std::vector<double> value;
};

inline Unrolled unroll(const GraphFunction& u, double half_line_window = 20.0) {
  const auto& d = u.disc();
  Unrolled out;
  double offset = 0.0;
  for (std::size_t e = 0; e < d.edge_count(); ++e) {
    const auto& eg = d.edge_grid(e);
    const double shown = eg.to == kNoDof ? std::min(eg.length, half_line_window) : eg.length;
    for (std::size_t k = 0; k <= eg.cells; ++k) {
      const double s = d.node_position(e, k);
      if (s > shown + 1e-12) break;
      out.edge.push_back(d.graph().edge(e).id);
      out.s.push_back(s);
      out.x.push_back(offset + s);
      out.value.push_back(u.node(e, k));
    }
    offset += shown;
  }
  return out;
}

inline std::string profile_csv(const GraphFunction& u, double half_line_window = 20.0) {
  const auto p = unroll(u, half_line_window);
  std::ostringstream o;
  o << "# " << kProfileCsvSchema << "\nedge,s,x,value\n";
  for (std::size_t i = 0; i < p.x.size(); ++i)
    o << p.edge[i] << ',' << detail::fmt(p.s[i]) << ',' << detail::fmt(p.x[i]) << ',' << detail::fmt(p.value[i]) << '\n';
  return o.str();
}

// ---------------------------------------------------------------------------
// SVG

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct Plot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<PlotSeries> series;
  std::vector<double> vlines;  ///< dashed reference positions on the x axis
};

namespace detail {

inline std::string escape_xml(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace detail

inline std::string to_svg(const Plot& p) {
  constexpr double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 >= x0)) x0 = 0, x1 = 1;
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto X = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << detail::escape_xml(p.title) << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    char bx[32], by[32];
    std::snprintf(bx, sizeof bx, "%.3g", xv);
    std::snprintf(by, sizeof by, "%.3g", yv);
    o << "<text x=\"" << X(xv) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << bx << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << by << "</text>\n";
  }
  if (y0 < 0.0 && y1 > 0.0)
    o << "<line x1=\"" << ml << "\" x2=\"" << W - mr << "\" y1=\"" << Y(0) << "\" y2=\"" << Y(0) << "\" stroke=\"#999\"/>\n";
  for (double v : p.vlines)
    if (v >= x0 && v <= x1)
      o << "<line x1=\"" << X(v) << "\" x2=\"" << X(v) << "\" y1=\"" << mt << "\" y2=\"" << H - mb
        << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << detail::escape_xml(p.xlabel) << "</text>\n";
  o << "<text transform=\"translate(16 " << (mt + H - mb) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << detail::escape_xml(p.ylabel) << "</text>\n";
  for (std::size_t si = 0; si < p.series.size(); ++si) {
    const auto& s = p.series[si];
    const char* c = colors[si % 6];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
    o << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          o << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i]) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    o << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 14 * si << "\" fill=\"" << c << "\">" << detail::escape_xml(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline std::string profile_svg(const GraphFunction& u, const std::string& title) {
  const auto p = unroll(u);
  Plot plot{title, "unrolled arclength (edges in file order)", "u", {{"u", p.x, p.value}}, {}};
  for (std::size_t i = 1; i < p.x.size(); ++i)
    if (p.edge[i] != p.edge[i - 1]) plot.vlines.push_back(p.x[i]);
  return to_svg(plot);
}

inline std::string scan_svg(const EnergyScan& s, const std::string& title) {
  Plot plot{title, "mass mu", "best energy", {{"E(mu)", s.masses, s.energies, true}}, {Constants::mu_R_plus, Constants::mu_R}};
  return to_svg(plot);
}

}  // namespace qgraph
