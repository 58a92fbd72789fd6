#include "lgq/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <string>

#include "lgq/geometry.hpp"
#include "lgq/oracles.hpp"
#include "lgq/sweeps.hpp"

namespace lgq {
namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

void reject_unknown(const json& j, const std::set<std::string>& keys, const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) fail(ctx + ": unknown key '" + it.key() + "'");
}

double req_num(const json& j, const char* key, const std::string& label) {
  require(j.contains(key), label + " is required");
  const json& v = j.at(key);
  require(v.is_number(), label + " must be a number");
  return v.get<double>();
}

double opt_num(const json& j, const char* key, const std::string& label, double def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  require(v.is_number(), label + " must be a number");
  return v.get<double>();
}

double opt_pos(const json& j, const char* key, const std::string& label, double def) {
  double v = opt_num(j, key, label, def);
  require(v > 0.0, label + " must be > 0");
  return v;
}

long opt_int(const json& j, const char* key, const std::string& label, long def, long min_value) {
  if (!j.contains(key)) {
    require(def >= min_value, label + " default out of range");
    return def;
  }
  const json& v = j.at(key);
  require(v.is_number_integer(), label + " must be an integer");
  long n = v.get<long>();
  require(n >= min_value, label + " must be at least " + std::to_string(min_value));
  return n;
}

std::string req_prefix(const json& cfg) {
  require(cfg.contains("output_prefix"), "output_prefix is required");
  const json& v = cfg.at("output_prefix");
  require(v.is_string(), "output_prefix must be a string");
  std::string s = v.get<std::string>();
  require(!s.empty(), "output_prefix must not be empty");
  return s;
}

SolverSettings parse_solver(const json& cfg, int default_scan = 200) {
  SolverSettings s;
  s.scan_points = default_scan;
  if (!cfg.contains("solver")) return s;
  const json& j = cfg.at("solver");
  require(j.is_object(), "solver must be an object");
  reject_unknown(j, {"kappa_min", "kappa_max", "scan_points", "tol", "degeneracy_rel_tol",
                     "refine_cap"},
                 "solver");
  s.kappa_min = opt_num(j, "kappa_min", "solver.kappa_min", 0.0);
  s.kappa_max = opt_num(j, "kappa_max", "solver.kappa_max", 0.0);
  require(s.kappa_min >= 0.0, "solver.kappa_min must be >= 0");
  require(s.kappa_max >= 0.0, "solver.kappa_max must be >= 0");
  if (s.kappa_min > 0.0 && s.kappa_max > 0.0)
    require(s.kappa_max > s.kappa_min, "solver.kappa_max must exceed solver.kappa_min");
  s.scan_points = (int)opt_int(j, "scan_points", "solver.scan_points", default_scan, 8);
  s.tol = opt_num(j, "tol", "solver.tol", 1e-10);
  require(s.tol > 0.0, "solver.tol must be > 0");
  s.degeneracy_rel_tol = opt_num(j, "degeneracy_rel_tol", "solver.degeneracy_rel_tol", 1e-6);
  require(s.degeneracy_rel_tol > 0.0, "solver.degeneracy_rel_tol must be > 0");
  s.refine_cap = (int)opt_int(j, "refine_cap", "solver.refine_cap", 64, 0);
  return s;
}

json solver_to_json(const SolverSettings& s) {
  return json{{"kappa_min", s.kappa_min},  // 0 = library default for the geometry
              {"kappa_max", s.kappa_max},
              {"scan_points", s.scan_points},
              {"tol", s.tol},
              {"degeneracy_rel_tol", s.degeneracy_rel_tol},
              {"refine_cap", s.refine_cap}};
}

std::vector<double> parse_grid(const json& cfg) {
  require(cfg.contains("grid"), "grid is required");
  const json& g = cfg.at("grid");
  require(g.is_object(), "grid must be an object");
  reject_unknown(g, {"values", "from", "to", "step", "points"}, "grid");
  std::vector<double> out;
  if (g.contains("values")) {
    require(!g.contains("from") && !g.contains("to") && !g.contains("step") &&
                !g.contains("points"),
            "grid: give either values or a from/to range, not both");
    const json& v = g.at("values");
    require(v.is_array(), "grid.values must be an array");
    for (const auto& e : v) {
      require(e.is_number(), "grid.values entries must be numbers");
      out.push_back(e.get<double>());
    }
  } else {
    double from = req_num(g, "from", "grid.from");
    double to = req_num(g, "to", "grid.to");
    require(to > from, "grid.to must exceed grid.from");
    if (g.contains("step")) {
      require(!g.contains("points"), "grid: give step or points, not both");
      double step = req_num(g, "step", "grid.step");
      require(step > 0.0, "grid.step must be > 0");
      long n = (long)std::floor((to - from) / step + 1e-9) + 1;
      for (long i = 0; i < n; ++i) out.push_back(from + (double)i * step);
    } else {
      require(g.contains("points"), "grid needs step, points, or values");
      long n = opt_int(g, "points", "grid.points", -1, 2);
      for (long i = 0; i < n; ++i)
        out.push_back(from + (to - from) * (double)i / (double)(n - 1));
    }
  }
  require(out.size() >= 2, "grid must contain at least 2 values");
  for (std::size_t i = 1; i < out.size(); ++i)
    require(out[i] > out[i - 1], "grid values must be strictly increasing");
  return out;
}

std::optional<Rect> parse_window(const json& cfg) {
  if (!cfg.contains("window")) return std::nullopt;
  const json& w = cfg.at("window");
  require(w.is_object(), "window must be an object");
  reject_unknown(w, {"xmin", "xmax", "ymin", "ymax"}, "window");
  Rect r;
  r.xmin = req_num(w, "xmin", "window.xmin");
  r.xmax = req_num(w, "xmax", "window.xmax");
  r.ymin = req_num(w, "ymin", "window.ymin");
  r.ymax = req_num(w, "ymax", "window.ymax");
  require(r.xmax > r.xmin, "window.xmax must exceed window.xmin");
  require(r.ymax > r.ymin, "window.ymax must exceed window.ymin");
  return r;
}

// ---------------------------------------------------------------- configs

struct RingCfg {
  std::string prefix;
  double radius, cut_angle, gamma;
  int count;
  SolverSettings solver;
};

RingCfg parse_ring(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "radius", "cut_angle", "count", "gamma",
                       "solver"},
                 "config");
  RingCfg c;
  c.prefix = req_prefix(cfg);
  c.radius = opt_pos(cfg, "radius", "radius", 10.0);
  c.cut_angle = opt_num(cfg, "cut_angle", "cut_angle", 0.0);
  require(c.cut_angle >= 0.0 && c.cut_angle < 2 * kPi, "cut_angle must lie in [0, 2*pi)");
  c.count = (int)opt_int(cfg, "count", "count", 1000, 1);
  c.gamma = opt_pos(cfg, "gamma", "gamma", 1.0);
  c.solver = parse_solver(cfg);
  return c;
}

struct RingConvCfg {
  std::string prefix;
  double radius, gamma;
  std::vector<long> counts;
  int level;
  SolverSettings solver;
};

RingConvCfg parse_ring_convergence(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "radius", "counts", "level", "gamma",
                       "solver"},
                 "config");
  RingConvCfg c;
  c.prefix = req_prefix(cfg);
  c.radius = opt_pos(cfg, "radius", "radius", 10.0);
  c.gamma = opt_pos(cfg, "gamma", "gamma", 1.0);
  if (cfg.contains("counts")) {
    const json& v = cfg.at("counts");
    require(v.is_array(), "counts must be an array of integers");
    for (const auto& e : v) {
      require(e.is_number_integer(), "counts entries must be integers");
      long n = e.get<long>();
      require(n >= 1, "counts entries must be >= 1");
      c.counts.push_back(n);
    }
  } else {
    c.counts = {100, 200, 400, 800};
  }
  require(c.counts.size() >= 2, "counts must contain at least 2 values");
  for (std::size_t i = 1; i < c.counts.size(); ++i)
    require(c.counts[i] > c.counts[i - 1], "counts must be strictly increasing");
  c.level = (int)opt_int(cfg, "level", "level", 0, 0);
  c.solver = parse_solver(cfg);
  return c;
}

struct StarSweepCfg {
  std::string prefix;
  bool beta_sweep;
  double beta = 0.0;                 // arm_length sweep only
  std::vector<double> arm_lengths;   // beta sweep only
  std::vector<double> grid;
  double gamma, resolution, slope_threshold;
  SolverSettings solver;
};

StarSweepCfg parse_star_sweep(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "sweep_parameter", "beta", "arm_lengths",
                       "grid", "gamma", "resolution", "slope_threshold", "solver"},
                 "config");
  StarSweepCfg c;
  c.prefix = req_prefix(cfg);
  std::string sp = "beta";
  if (cfg.contains("sweep_parameter")) {
    const json& v = cfg.at("sweep_parameter");
    require(v.is_string(), "sweep_parameter must be a string");
    sp = v.get<std::string>();
  }
  require(sp == "beta" || sp == "arm_length",
          "sweep_parameter must be \"beta\" or \"arm_length\"");
  c.beta_sweep = (sp == "beta");
  c.grid = parse_grid(cfg);
  require(c.grid.size() >= 3, "grid must contain at least 3 values for a sweep");
  if (c.beta_sweep) {
    require(!cfg.contains("beta"), "beta conflicts with a beta sweep (it is the swept value)");
    require(cfg.contains("arm_lengths"), "arm_lengths is required for a beta sweep");
    const json& v = cfg.at("arm_lengths");
    require(v.is_array() && v.size() == 2, "arm_lengths must be an array of exactly 2 lengths");
    for (const auto& e : v) {
      require(e.is_number(), "arm_lengths entries must be numbers");
      double l = e.get<double>();
      require(l > 0.0, "arm_lengths entries must be > 0");
      c.arm_lengths.push_back(l);
    }
    for (double b : c.grid)
      require(b > 0.0 && b < 2 * kPi, "grid: beta values must lie in (0, 2*pi)");
  } else {
    require(!cfg.contains("arm_lengths"), "arm_lengths conflicts with an arm_length sweep");
    c.beta = req_num(cfg, "beta", "beta");
    require(c.beta > 0.0 && c.beta < 2 * kPi, "beta must lie in (0, 2*pi)");
    for (double l : c.grid) require(l > 0.0, "grid: arm lengths must be > 0");
  }
  c.gamma = opt_pos(cfg, "gamma", "gamma", 1.0);
  c.resolution = opt_pos(cfg, "resolution", "resolution", 1.5);
  c.slope_threshold = opt_num(cfg, "slope_threshold", "slope_threshold", 0.0);
  if (cfg.contains("slope_threshold"))
    require(c.slope_threshold > 0.0, "slope_threshold must be > 0");
  c.solver = parse_solver(cfg);
  return c;
}

struct ResonanceSweepCfg {
  std::string prefix;
  double radius, flare_angle, gamma, resolution, slope_threshold;
  std::optional<double> delta;      // exactly one of delta / gap_angle
  std::optional<double> gap_angle;
  std::vector<double> grid;
  SolverSettings solver;
};

ResonanceSweepCfg parse_resonance_sweep(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "radius", "flare_angle", "delta",
                       "gap_angle", "grid", "gamma", "resolution", "slope_threshold", "solver"},
                 "config");
  ResonanceSweepCfg c;
  c.prefix = req_prefix(cfg);
  c.radius = opt_pos(cfg, "radius", "radius", 10.0);
  c.flare_angle = opt_num(cfg, "flare_angle", "flare_angle", 2.2);
  require(c.flare_angle >= 0.0, "flare_angle must be >= 0");
  bool has_d = cfg.contains("delta"), has_g = cfg.contains("gap_angle");
  require(has_d != has_g, "give exactly one of delta or gap_angle");
  if (has_d) {
    double d = req_num(cfg, "delta", "delta");
    require(d > 0.0, "delta must be > 0");
    require(d < 2 * c.radius, "delta must be smaller than 2*radius");
    c.delta = d;
  } else {
    double g = req_num(cfg, "gap_angle", "gap_angle");
    require(g > 0.0 && g < 2 * kPi, "gap_angle must lie in (0, 2*pi)");
    c.gap_angle = g;
  }
  c.grid = parse_grid(cfg);
  require(c.grid.size() >= 3, "grid must contain at least 3 values for a sweep");
  for (double l : c.grid) require(l > 0.0, "grid: leg lengths must be > 0");
  c.gamma = opt_pos(cfg, "gamma", "gamma", 1.0);
  c.resolution = opt_pos(cfg, "resolution", "resolution", 0.3);
  c.slope_threshold = opt_num(cfg, "slope_threshold", "slope_threshold", 0.0);
  if (cfg.contains("slope_threshold"))
    require(c.slope_threshold > 0.0, "slope_threshold must be > 0");
  c.solver = parse_solver(cfg);
  return c;
}

struct ZLineSweepCfg {
  std::string prefix;
  double mid_length, bend_angle, gamma, resolution, slope_threshold;
  std::vector<double> grid;
  SolverSettings solver;
};

ZLineSweepCfg parse_zline_sweep(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "mid_length", "bend_angle", "grid",
                       "gamma", "resolution", "slope_threshold", "solver"},
                 "config");
  ZLineSweepCfg c;
  c.prefix = req_prefix(cfg);
  c.mid_length = opt_pos(cfg, "mid_length", "mid_length", 10.0);
  c.bend_angle = opt_num(cfg, "bend_angle", "bend_angle", kPi / 2);
  require(c.bend_angle > 0.0 && c.bend_angle <= kPi, "bend_angle must lie in (0, pi]");
  c.grid = parse_grid(cfg);
  require(c.grid.size() >= 3, "grid must contain at least 3 values for a sweep");
  for (double l : c.grid) require(l > 0.0, "grid: arm lengths must be > 0");
  c.gamma = opt_pos(cfg, "gamma", "gamma", 1.0);
  c.resolution = opt_pos(cfg, "resolution", "resolution", 0.1);
  c.slope_threshold = opt_num(cfg, "slope_threshold", "slope_threshold", 0.0);
  if (cfg.contains("slope_threshold"))
    require(c.slope_threshold > 0.0, "slope_threshold must be > 0");
  c.solver = parse_solver(cfg);
  return c;
}

struct EigenfunctionCfg {
  std::string prefix;
  double radius, cut_angle, gamma;
  int count, state, nx, ny;
  std::optional<Rect> window;
  SolverSettings solver;
};

EigenfunctionCfg parse_eigenfunction(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "radius", "cut_angle", "count", "gamma",
                       "state", "window", "nx", "ny", "solver"},
                 "config");
  EigenfunctionCfg c;
  c.prefix = req_prefix(cfg);
  c.radius = opt_pos(cfg, "radius", "radius", 10.0);
  c.cut_angle = opt_num(cfg, "cut_angle", "cut_angle", 0.0);
  require(c.cut_angle >= 0.0 && c.cut_angle < 2 * kPi, "cut_angle must lie in [0, 2*pi)");
  c.count = (int)opt_int(cfg, "count", "count", 1000, 1);
  c.gamma = opt_pos(cfg, "gamma", "gamma", 1.0);
  c.state = (int)opt_int(cfg, "state", "state", 0, 0);
  c.nx = (int)opt_int(cfg, "nx", "nx", 160, 2);
  c.ny = (int)opt_int(cfg, "ny", "ny", 160, 2);
  c.window = parse_window(cfg);
  c.solver = parse_solver(cfg);
  return c;
}

struct PolymerCfg {
  std::string prefix;
  double alpha, l0, tol;
  std::vector<long> ns;
  long m_max;
};

PolymerCfg parse_polymer(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "alpha", "n", "l0", "m_max", "tol"},
                 "config");
  PolymerCfg c;
  c.prefix = req_prefix(cfg);
  c.alpha = req_num(cfg, "alpha", "alpha");
  require(c.alpha > 0.0, "alpha must be > 0");
  if (cfg.contains("n")) {
    const json& v = cfg.at("n");
    if (v.is_number_integer()) {
      c.ns.push_back(v.get<long>());
    } else if (v.is_array()) {
      for (const auto& e : v) {
        require(e.is_number_integer(), "n entries must be integers");
        c.ns.push_back(e.get<long>());
      }
      require(!c.ns.empty(), "n must not be empty");
    } else {
      fail("n must be an integer or an array of integers");
    }
  } else {
    c.ns = {1, 2, 4, 8};
  }
  for (long n : c.ns) require(n >= 1 && n <= 1000000, "n values must lie in [1, 1e6]");
  c.l0 = opt_pos(cfg, "l0", "l0", 1.0);
  c.m_max = opt_int(cfg, "m_max", "m_max", 100000, 10000);
  c.tol = opt_num(cfg, "tol", "tol", 1e-10);
  require(c.tol > 0.0, "tol must be > 0");
  return c;
}

struct OracleRingCfg {
  std::string prefix;
  double radius, gamma, tol;
  std::optional<int> lmax;
};

OracleRingCfg parse_oracle_ring(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "radius", "gamma", "lmax", "tol"},
                 "config");
  OracleRingCfg c;
  c.prefix = req_prefix(cfg);
  c.radius = opt_pos(cfg, "radius", "radius", 10.0);
  c.gamma = opt_pos(cfg, "gamma", "gamma", 1.0);
  if (cfg.contains("lmax")) c.lmax = (int)opt_int(cfg, "lmax", "lmax", 0, 0);
  c.tol = opt_num(cfg, "tol", "tol", 1e-13);
  require(c.tol > 0.0, "tol must be > 0");
  return c;
}

struct BsStarCfg {
  std::string prefix;
  double beta, gamma, arm_length, resolution;
  int nodes_per_arm;
  SolverSettings solver;
};

BsStarCfg parse_bs_star(const json& cfg) {
  reject_unknown(cfg, {"experiment", "output_prefix", "beta", "gamma", "arm_length",
                       "nodes_per_arm", "resolution", "solver"},
                 "config");
  BsStarCfg c;
  c.prefix = req_prefix(cfg);
  c.beta = opt_num(cfg, "beta", "beta", kPi / 2);
  require(c.beta > 0.0 && c.beta <= kPi, "beta must lie in (0, pi]");
  c.gamma = opt_pos(cfg, "gamma", "gamma", 1.0);
  c.arm_length = opt_pos(cfg, "arm_length", "arm_length", 8.0);
  c.nodes_per_arm = (int)opt_int(cfg, "nodes_per_arm", "nodes_per_arm", 600, 50);
  c.resolution = opt_pos(cfg, "resolution", "resolution", 0.01);
  c.solver = parse_solver(cfg, 32);
  return c;
}

// ---------------------------------------------------------------- runners

struct Built {
  std::string csv;
  std::optional<std::string> gaps;
  json geometry = nullptr;
  json resolution = nullptr;
  json gamma = nullptr;
  json solver = nullptr;
  json extras = json::object();
  std::vector<std::string> warnings;
};

json geometry_json(const GraphSpec& spec) { return json::parse(graph_spec_to_json(spec)); }

json count_resolution(long n) { return json{{"kind", "count"}, {"count", n}}; }
json spacing_resolution(double h) { return json{{"kind", "spacing"}, {"spacing", h}}; }

void collect_level_warnings(const Spectrum& sp, std::vector<std::string>& warnings) {
  for (std::size_t i = 0; i < sp.levels.size(); ++i)
    if (sp.levels[i].branch_warning)
      warnings.push_back("level " + std::to_string(i) +
                         ": root from an unresolved scan interval (increase scan_points)");
}

Spectrum solve_sys(const LambdaSystem& sys, const SolverSettings& s) {
  double kmin = s.kappa_min > 0.0 ? s.kappa_min : default_kappa_min(sys);
  double kmax = s.kappa_max > 0.0 ? s.kappa_max : default_kappa_max(sys);
  return find_eigenvalues(sys, kmin, kmax, s.scan_points, s.tol, s.degeneracy_rel_tol,
                          s.refine_cap);
}

Spectrum solve_graph(const DiscretizedGraph& g, const SolverSettings& s) {
  return solve_sys(LambdaSystem(g), s);
}

Built run_ring(const RingCfg& c) {
  Built b;
  Ring spec{c.radius, c.cut_angle};
  DiscretizedGraph g = discretize(spec, c.gamma, Resolution::by_count(c.count));
  Spectrum sp = solve_graph(g, c.solver);
  collect_level_warnings(sp, b.warnings);
  b.csv = spectrum_to_csv(sp);
  b.geometry = geometry_json(spec);
  b.resolution = count_resolution(c.count);
  b.gamma = c.gamma;
  b.solver = solver_to_json(c.solver);
  b.extras = json{{"levels", sp.levels.size()},
                  {"total_multiplicity", sp.total_multiplicity()},
                  {"spacing", g.spacing},
                  {"total_length", g.total_length}};
  return b;
}

Built run_ring_convergence(const RingConvCfg& c) {
  Built b;
  Ring spec{c.radius, 0.0};
  std::vector<RingLevel> exact = ring_exact_all(c.radius, c.gamma);
  if ((std::size_t)c.level >= exact.size())
    fail("level " + std::to_string(c.level) + " does not exist: gamma*radius = " +
         fmt17(c.gamma * c.radius) + " supports " + std::to_string(exact.size()) +
         " distinct levels");
  double e_exact = exact[(std::size_t)c.level].energy;
  std::string csv = "count,energy,exact,abs_error,rel_error\n";
  std::vector<std::pair<double, double>> errs;
  for (long n : c.counts) {
    DiscretizedGraph g = discretize(spec, c.gamma, Resolution::by_count((int)n));
    Spectrum sp = solve_graph(g, c.solver);
    collect_level_warnings(sp, b.warnings);
    if ((std::size_t)c.level >= sp.levels.size())
      throw std::runtime_error("count " + std::to_string(n) + ": only " +
                               std::to_string(sp.levels.size()) +
                               " levels in the scan window (need level " +
                               std::to_string(c.level) + ")");
    double e = sp.levels[(std::size_t)c.level].energy;
    double abs_err = std::abs(e - e_exact);
    csv += std::to_string(n) + "," + fmt17(e) + "," + fmt17(e_exact) + "," + fmt17(abs_err) +
           "," + fmt17(abs_err / std::abs(e_exact)) + "\n";
    errs.emplace_back((double)n, abs_err);
  }
  b.csv = csv;
  b.geometry = geometry_json(spec);
  json counts = json::array();
  for (long n : c.counts) counts.push_back(n);
  b.resolution = json{{"kind", "count"}, {"counts", counts}};
  b.gamma = c.gamma;
  b.solver = solver_to_json(c.solver);
  b.extras = json{{"level", c.level}, {"exact_energy", e_exact}};
  if (errs.size() >= 3) {
    ConvergenceFit fit = convergence_fit(errs);
    b.extras["fit"] = json{{"exponent", fit.exponent},
                           {"prefactor", fit.prefactor},
                           {"residual", fit.residual}};
  }
  return b;
}

void finish_sweep(Built& b, const SweepResult& sr, double slope_threshold) {
  b.csv = sweep_to_csv(sr);
  double thr = slope_threshold > 0.0 ? slope_threshold : default_slope_threshold(sr.gamma);
  GapReport gr = gap_report(sr, thr);
  b.gaps = gap_report_to_json(gr);
  for (const auto& row : sr.rows)
    if (!row.ok)
      b.warnings.push_back("row " + sr.parameter + "=" + fmt17(row.param) + ": " + row.error);
  b.extras["slope_threshold"] = thr;
  b.extras["gap_minima"] = gr.minima.size();
  b.extras["plateaus"] = gr.plateaus.size();
  b.extras["curve_events"] = gr.events.size();
}

Built run_star_sweep(const StarSweepCfg& c) {
  Built b;
  std::function<GraphSpec(double)> family;
  std::string param;
  if (c.beta_sweep) {
    std::vector<double> arms = c.arm_lengths;
    family = [arms](double beta) { return GraphSpec(Star{{beta}, arms}); };
    param = "beta";
  } else {
    double beta = c.beta;
    family = [beta](double l) { return GraphSpec(Star{{beta}, {l, l}}); };
    param = "arm_length";
  }
  SweepResult sr = sweep(param, family, c.grid, c.gamma, Resolution::by_spacing(c.resolution),
                         c.solver);
  finish_sweep(b, sr, c.slope_threshold);
  b.geometry = geometry_json(family(c.grid.front()));
  b.extras["geometry_at"] = c.grid.front();
  b.resolution = spacing_resolution(c.resolution);
  b.gamma = c.gamma;
  b.solver = solver_to_json(c.solver);
  return b;
}

Built run_resonance_sweep(const ResonanceSweepCfg& c) {
  Built b;
  double gap_angle = c.gap_angle ? *c.gap_angle
                                 : calibrate_gap_angle(c.radius, c.flare_angle, *c.delta);
  double radius = c.radius, flare = c.flare_angle;
  std::function<GraphSpec(double)> family = [radius, gap_angle, flare](double l) {
    return GraphSpec(NearLoop{radius, gap_angle, flare, l});
  };
  SweepResult sr = sweep("leg_length", family, c.grid, c.gamma,
                         Resolution::by_spacing(c.resolution), c.solver);
  finish_sweep(b, sr, c.slope_threshold);
  b.geometry = geometry_json(family(c.grid.front()));
  b.extras["geometry_at"] = c.grid.front();
  b.extras["gap_angle"] = gap_angle;
  b.extras["bottleneck"] = bottleneck(NearLoop{radius, gap_angle, flare, c.grid.front()});
  if (c.delta) b.extras["delta_requested"] = *c.delta;
  b.resolution = spacing_resolution(c.resolution);
  b.gamma = c.gamma;
  b.solver = solver_to_json(c.solver);
  return b;
}

Built run_zline_sweep(const ZLineSweepCfg& c) {
  Built b;
  double mid = c.mid_length, bend = c.bend_angle;
  std::function<GraphSpec(double)> family = [mid, bend](double l) {
    return GraphSpec(ZLine{mid, bend, l});
  };
  SweepResult sr = sweep("arm_length", family, c.grid, c.gamma,
                         Resolution::by_spacing(c.resolution), c.solver);
  finish_sweep(b, sr, c.slope_threshold);
  b.geometry = geometry_json(family(c.grid.front()));
  b.extras["geometry_at"] = c.grid.front();
  b.resolution = spacing_resolution(c.resolution);
  b.gamma = c.gamma;
  b.solver = solver_to_json(c.solver);
  return b;
}

Built run_eigenfunction(const EigenfunctionCfg& c) {
  Built b;
  Ring spec{c.radius, c.cut_angle};
  DiscretizedGraph g = discretize(spec, c.gamma, Resolution::by_count(c.count));
  LambdaSystem sys(g);
  Spectrum sp = solve_sys(sys, c.solver);
  collect_level_warnings(sp, b.warnings);
  if ((std::size_t)c.state >= sp.levels.size())
    throw std::runtime_error("state " + std::to_string(c.state) + " not found: only " +
                             std::to_string(sp.levels.size()) +
                             " levels in the scan window (widen solver.kappa_min/kappa_max)");
  const SpectrumLevel& level = sp.levels[(std::size_t)c.state];
  Eigen::MatrixXd nv = null_vector(sys, level.energy);
  if (nv.cols() > 1)
    b.warnings.push_back("degenerate level: rendering one vector of a " +
                         std::to_string(nv.cols()) + "-dimensional null space");
  Rect window;
  if (c.window) {
    window = *c.window;
  } else {
    const auto& pts = sys.graph.points;
    double xmin = pts.col(0).minCoeff(), xmax = pts.col(0).maxCoeff();
    double ymin = pts.col(1).minCoeff(), ymax = pts.col(1).maxCoeff();
    double pad = 0.25 * std::max({xmax - xmin, ymax - ymin, 1.0});
    window = {xmin - pad, xmax + pad, ymin - pad, ymax + pad};
  }
  EigenfunctionGrid grid = eval_eigenfunction(sys, nv.col(0), level.kappa, window, c.nx, c.ny);
  std::string csv = "x,y,value,near_site\n";
  for (std::size_t iy = 0; iy < grid.ys.size(); ++iy)
    for (std::size_t ix = 0; ix < grid.xs.size(); ++ix)
      csv += fmt17(grid.xs[ix]) + "," + fmt17(grid.ys[iy]) + "," +
             fmt17(grid.values((Eigen::Index)iy, (Eigen::Index)ix)) + "," +
             (grid.near_site((Eigen::Index)iy, (Eigen::Index)ix) ? "1" : "0") + "\n";
  b.csv = csv;
  b.geometry = geometry_json(spec);
  b.resolution = count_resolution(c.count);
  b.gamma = c.gamma;
  b.solver = solver_to_json(c.solver);
  b.extras = json{{"state", c.state},
                  {"energy", level.energy},
                  {"kappa", level.kappa},
                  {"multiplicity", level.multiplicity},
                  {"lambda_residual", level.lambda_residual},
                  {"null_dim", nv.cols()},
                  {"window", json{{"xmin", window.xmin},
                                  {"xmax", window.xmax},
                                  {"ymin", window.ymin},
                                  {"ymax", window.ymax}}}};
  return b;
}

Built run_polymer(const PolymerCfg& c) {
  Built b;
  std::string csv = "n,alpha,kappa,energy,residual\n";
  for (long n : c.ns) {
    double kappa = polymer_threshold(c.alpha, (int)n, c.l0, c.m_max, c.tol);
    double res = polymer_residual(c.alpha, (int)n, c.l0, kappa, c.m_max);
    csv += std::to_string(n) + "," + fmt17(c.alpha) + "," + fmt17(kappa) + "," +
           fmt17(-kappa * kappa) + "," + fmt17(res) + "\n";
  }
  b.csv = csv;
  b.extras = json{{"alpha", c.alpha}, {"l0", c.l0}, {"m_max", c.m_max}, {"tol", c.tol}};
  return b;
}

Built run_oracle_ring(const OracleRingCfg& c) {
  Built b;
  std::vector<RingLevel> levels = ring_exact_all(c.radius, c.gamma, c.tol);
  std::string csv = "l,energy,kappa,multiplicity\n";
  for (const auto& lv : levels) {
    if (c.lmax && lv.l > *c.lmax) continue;
    csv += std::to_string(lv.l) + "," + fmt17(lv.energy) + "," + fmt17(lv.kappa) + "," +
           std::to_string(lv.multiplicity) + "\n";
  }
  b.csv = csv;
  b.geometry = geometry_json(Ring{c.radius, 0.0});
  b.gamma = c.gamma;
  b.extras = json{{"levels", levels.size()}, {"tol", c.tol}};
  return b;
}

Built run_bs_star(const BsStarCfg& c) {
  Built b;
  StarBS bs(c.beta, c.gamma, c.arm_length, c.nodes_per_arm);
  std::optional<double> e_bs = bs.bound_state_energy();
  if (!e_bs)
    throw std::runtime_error(
        "no bound state: lambda_max stays below 1 on the bracket (beta = pi has none)");
  Star spec{{c.beta}, {c.arm_length, c.arm_length}};
  DiscretizedGraph g = discretize(spec, c.gamma, Resolution::by_spacing(c.resolution));
  SolverSettings s = c.solver;
  if (s.kappa_min <= 0.0) s.kappa_min = 0.5 * c.gamma * (1.0 + 1e-6);
  if (s.kappa_max <= 0.0) s.kappa_max = 0.8 * c.gamma;
  Spectrum sp = solve_graph(g, s);
  collect_level_warnings(sp, b.warnings);
  if (sp.levels.empty())
    throw std::runtime_error("core solver found no level in the scan window");
  double e_core = sp.levels.front().energy;
  double rel = std::abs(*e_bs - e_core) / std::abs(e_core);
  b.csv = "bs_energy,core_energy,rel_diff\n" + fmt17(*e_bs) + "," + fmt17(e_core) + "," +
          fmt17(rel) + "\n";
  b.geometry = geometry_json(spec);
  b.resolution = spacing_resolution(c.resolution);
  b.gamma = c.gamma;
  b.solver = solver_to_json(s);
  b.extras = json{{"nodes_per_arm", c.nodes_per_arm},
                  {"core_points", g.points.rows()},
                  {"bs_energy", *e_bs},
                  {"core_energy", e_core},
                  {"rel_diff", rel}};
  return b;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << content;
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string experiment_name(const json& cfg) {
  require(cfg.is_object(), "config must be a JSON object");
  require(cfg.contains("experiment"), "experiment is required");
  const json& e = cfg.at("experiment");
  require(e.is_string(), "experiment must be a string");
  return e.get<std::string>();
}

}  // namespace

std::string spectrum_to_csv(const Spectrum& sp) {
  std::string csv = "level,energy,kappa,multiplicity,lambda_residual,above_threshold\n";
  for (std::size_t i = 0; i < sp.levels.size(); ++i) {
    const SpectrumLevel& l = sp.levels[i];
    csv += std::to_string(i) + "," + fmt17(l.energy) + "," + fmt17(l.kappa) + "," +
           std::to_string(l.multiplicity) + "," + fmt17(l.lambda_residual) + "," +
           (l.above_threshold ? "1" : "0") + "\n";
  }
  return csv;
}

void validate_config(const nlohmann::json& cfg) {
  const std::string exp = experiment_name(cfg);
  if (exp == "ring")
    (void)parse_ring(cfg);
  else if (exp == "ring-convergence")
    (void)parse_ring_convergence(cfg);
  else if (exp == "star-sweep")
    (void)parse_star_sweep(cfg);
  else if (exp == "resonance-sweep")
    (void)parse_resonance_sweep(cfg);
  else if (exp == "zline-sweep")
    (void)parse_zline_sweep(cfg);
  else if (exp == "eigenfunction")
    (void)parse_eigenfunction(cfg);
  else if (exp == "polymer")
    (void)parse_polymer(cfg);
  else if (exp == "oracle-ring")
    (void)parse_oracle_ring(cfg);
  else if (exp == "bs-star")
    (void)parse_bs_star(cfg);
  else
    fail("experiment: unknown value '" + exp + "'");
}

RunOutcome run_experiment(const nlohmann::json& cfg) {
  validate_config(cfg);
  const std::string exp = experiment_name(cfg);
  const std::string prefix = req_prefix(cfg);
  auto t0 = std::chrono::steady_clock::now();
  Built b;
  if (exp == "ring")
    b = run_ring(parse_ring(cfg));
  else if (exp == "ring-convergence")
    b = run_ring_convergence(parse_ring_convergence(cfg));
  else if (exp == "star-sweep")
    b = run_star_sweep(parse_star_sweep(cfg));
  else if (exp == "resonance-sweep")
    b = run_resonance_sweep(parse_resonance_sweep(cfg));
  else if (exp == "zline-sweep")
    b = run_zline_sweep(parse_zline_sweep(cfg));
  else if (exp == "eigenfunction")
    b = run_eigenfunction(parse_eigenfunction(cfg));
  else if (exp == "polymer")
    b = run_polymer(parse_polymer(cfg));
  else if (exp == "oracle-ring")
    b = run_oracle_ring(parse_oracle_ring(cfg));
  else
    b = run_bs_star(parse_bs_star(cfg));
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<std::string> outputs{prefix + ".csv"};
  if (b.gaps) outputs.push_back(prefix + ".gaps.json");
  outputs.push_back(prefix + ".manifest.json");
  json manifest{{"schema_version", "1.0.0"}, {"experiment", exp},   {"config", cfg},
                {"geometry", b.geometry},    {"gamma", b.gamma},    {"resolution", b.resolution},
                {"solver", b.solver},        {"extras", b.extras},  {"warnings", b.warnings},
                {"outputs", outputs},        {"wall_seconds", wall}};
  write_file(prefix + ".csv", b.csv);
  if (b.gaps) write_file(prefix + ".gaps.json", *b.gaps);
  write_file(prefix + ".manifest.json", manifest.dump(2) + "\n");
  return {outputs, b.warnings};
}

nlohmann::json config_from_manifest(const nlohmann::json& manifest) {
  if (!manifest.is_object() || !manifest.contains("config") ||
      !manifest.at("config").is_object())
    throw ConfigError("manifest has no embedded config object");
  return manifest.at("config");
}

std::vector<std::string> preset_names() {
  return {"fig1",  "fig2",  "fig3",  "fig4",  "fig5",  "fig7",  "fig8", "fig9",
          "fig12", "fig13", "fig14", "fig15", "fig16", "fig17", "fig18"};
}

nlohmann::json preset_config(const std::string& name) {
  const json solver_ring_g05 = {{"kappa_min", 0.10}, {"kappa_max", 0.30}, {"scan_points", 60}};
  const json grid_nearloop = {{"from", 2.1}, {"to", 16.5}, {"step", 0.6}};
  const json solver_nearloop = {{"kappa_min", 0.13}, {"kappa_max", 0.425}, {"scan_points", 60}};
  const json solver_zline = {{"kappa_min", 1.48}, {"kappa_max", 2.52}, {"scan_points", 48}};
  const json grid_zline = {{"from", 10.0}, {"to", 22.0}, {"step", 0.6}};

  auto nearloop = [&](double delta, const std::string& prefix) {
    return json{{"experiment", "resonance-sweep"},
                {"radius", 10.0},
                {"flare_angle", 2.2},
                {"delta", delta},
                {"gamma", 1.0},
                {"resolution", 0.3},
                {"grid", grid_nearloop},
                {"slope_threshold", 1e-4},
                {"solver", solver_nearloop},
                {"output_prefix", prefix}};
  };
  auto zline = [&](double bend, const std::string& prefix) {
    return json{{"experiment", "zline-sweep"},
                {"mid_length", 10.0},
                {"bend_angle", bend},
                {"gamma", 5.0},
                {"resolution", 0.1},
                {"grid", grid_zline},
                {"solver", solver_zline},
                {"output_prefix", prefix}};
  };

  if (name == "fig1")
    return json{{"experiment", "ring"},   {"radius", 10.0},          {"gamma", 0.5},
                {"count", 1000},          {"solver", solver_ring_g05}, {"output_prefix", "fig1"}};
  if (name == "fig2")
    return json{{"experiment", "ring"},
                {"radius", 10.0},
                {"gamma", 1.0},
                {"count", 1000},
                {"solver", json{{"kappa_min", 0.22}, {"kappa_max", 0.55}, {"scan_points", 60}}},
                {"output_prefix", "fig2"}};
  if (name == "fig3")
    return json{{"experiment", "ring-convergence"},
                {"radius", 10.0},
                {"gamma", 0.5},
                {"counts", json::array({100, 200, 400, 800})},
                {"level", 0},
                {"solver", json{{"kappa_min", 0.18}, {"kappa_max", 0.28}, {"scan_points", 32}}},
                {"output_prefix", "fig3"}};
  if (name == "fig4")
    return json{{"experiment", "eigenfunction"},
                {"radius", 10.0},
                {"gamma", 5.0},
                {"count", 100},
                {"state", 3},
                {"window",
                 json{{"xmin", 6.0}, {"xmax", 11.0}, {"ymin", -2.5}, {"ymax", 2.5}}},
                {"nx", 220},
                {"ny", 110},
                {"solver", json{{"kappa_min", 0.5}, {"kappa_max", 2.8}, {"scan_points", 240}}},
                {"output_prefix", "fig4"}};
  if (name == "fig5")
    return json{{"experiment", "eigenfunction"},
                {"radius", 10.0},
                {"gamma", 5.0},
                {"count", 100},
                {"state", 3},
                {"window",
                 json{{"xmin", -12.5}, {"xmax", 12.5}, {"ymin", -12.5}, {"ymax", 12.5}}},
                {"nx", 180},
                {"ny", 180},
                {"solver", json{{"kappa_min", 0.5}, {"kappa_max", 2.8}, {"scan_points", 240}}},
                {"output_prefix", "fig5"}};
  if (name == "fig7")
    return json{{"experiment", "eigenfunction"},
                {"radius", 10.0},
                {"cut_angle", 1.0471975511965976},
                {"gamma", 1.0},
                {"count", 1000},
                {"state", 5},
                {"window",
                 json{{"xmin", -12.5}, {"xmax", 12.5}, {"ymin", -12.5}, {"ymax", 12.5}}},
                {"nx", 160},
                {"ny", 160},
                {"solver", json{{"kappa_min", 0.32}, {"kappa_max", 0.50}, {"scan_points", 48}}},
                {"output_prefix", "fig7"}};
  if (name == "fig8" || name == "fig9")
    return json{{"experiment", "star-sweep"},
                {"sweep_parameter", "beta"},
                {"arm_lengths", name == "fig8" ? json::array({300.0, 300.0})
                                               : json::array({300.0, 306.0})},
                {"gamma", 0.1},
                {"resolution", 1.5},
                {"grid",
                 json{{"from", 0.47123889803846897}, {"to", 2.8274333882308138},
                      {"points", 10}}},
                {"solver",
                 json{{"kappa_min", 0.0505}, {"kappa_max", 0.10}, {"scan_points", 40}}},
                {"output_prefix", name}};
  if (name == "fig12" || name == "fig13") return nearloop(1.9, name);
  if (name == "fig14") return nearloop(2.9, name);
  if (name == "fig15") return nearloop(5.2, name);
  if (name == "fig16")
    return json{{"experiment", "star-sweep"},
                {"sweep_parameter", "arm_length"},
                {"beta", 0.78539816339744831},
                {"gamma", 1.0},
                {"resolution", 0.1},
                {"grid", json{{"from", 2.0}, {"to", 14.0}, {"step", 0.4}}},
                {"solver", json{{"kappa_min", 0.05}, {"kappa_max", 1.2}, {"scan_points", 60}}},
                {"output_prefix", "fig16"}};
  if (name == "fig17") return zline(1.0053096491487338, "fig17");
  if (name == "fig18") return zline(3.1415926535897932, "fig18");
  fail("unknown preset '" + name + "'");
}

}  // namespace lgq
