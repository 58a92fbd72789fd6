#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lgq/experiment.hpp"
#include "lgq/threads.hpp"

namespace {

using nlohmann::json;

// Accepts "0.5", "pi", "pi/3", "2pi/3", "0.32pi"; whitespace-free.
double parse_angle(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace((unsigned char)c)) s += (char)std::tolower((unsigned char)c);
  if (s.empty()) throw lgq::ConfigError("empty angle value");
  auto to_num = [&](const std::string& part, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw lgq::ConfigError("cannot parse " + std::string(what) + " '" + text + "'");
    }
    if (used != part.size())
      throw lgq::ConfigError("cannot parse " + std::string(what) + " '" + text + "'");
    return v;
  };
  std::size_t p = s.find("pi");
  if (p == std::string::npos) return to_num(s, "number");
  std::string pre = s.substr(0, p), post = s.substr(p + 2);
  if (!pre.empty() && pre.back() == '*') pre.pop_back();
  double v = std::numbers::pi * (pre.empty() ? 1.0 : to_num(pre, "angle prefix"));
  if (!post.empty()) {
    if (post[0] == '/')
      v /= to_num(post.substr(1), "angle divisor");
    else if (post[0] == '*')
      v *= to_num(post.substr(1), "angle factor");
    else
      throw lgq::ConfigError("cannot parse angle '" + text + "'");
  }
  return v;
}

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw lgq::ConfigError("cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw lgq::ConfigError(path + ": " + e.what());
  }
  return j;
}

int execute(const json& cfg) {
  lgq::RunOutcome out = lgq::run_experiment(cfg);
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : out.outputs) std::cout << "wrote " << f << "\n";
  return 0;
}

// Flags shared by every spectrum-solving experiment.
struct SolverFlags {
  std::optional<double> kappa_min, kappa_max, tol, degeneracy_rel_tol;
  std::optional<int> scan_points, refine_cap;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kappa-min", kappa_min, "lower edge of the kappa scan window");
    cmd->add_option("--kappa-max", kappa_max, "upper edge of the kappa scan window");
    cmd->add_option("--scan-points", scan_points, "kappa scan nodes");
    cmd->add_option("--tol", tol, "eigenvalue residual tolerance at a root");
    cmd->add_option("--degeneracy-rel-tol", degeneracy_rel_tol,
                    "relative clustering width for degenerate levels");
    cmd->add_option("--refine-cap", refine_cap, "extra scan nodes for unresolved intervals");
  }
  void apply(json& cfg) const {
    json s = json::object();
    if (kappa_min) s["kappa_min"] = *kappa_min;
    if (kappa_max) s["kappa_max"] = *kappa_max;
    if (scan_points) s["scan_points"] = *scan_points;
    if (tol) s["tol"] = *tol;
    if (degeneracy_rel_tol) s["degeneracy_rel_tol"] = *degeneracy_rel_tol;
    if (refine_cap) s["refine_cap"] = *refine_cap;
    if (!s.empty()) cfg["solver"] = s;
  }
};

struct GridFlags {
  std::optional<std::string> from, to;
  std::optional<double> step;
  std::optional<int> points;
  std::vector<double> values;

  void attach(CLI::App* cmd, const char* what) {
    cmd->add_option("--grid-from", from, std::string("first ") + what);
    cmd->add_option("--grid-to", to, std::string("last ") + what);
    cmd->add_option("--grid-step", step, "grid step");
    cmd->add_option("--grid-points", points, "number of grid points");
    cmd->add_option("--grid-values", values, "explicit grid values")->expected(-1);
  }
  void apply(json& cfg) const {
    json g = json::object();
    if (!values.empty()) g["values"] = values;
    if (from) g["from"] = parse_angle(*from);
    if (to) g["to"] = parse_angle(*to);
    if (step) g["step"] = *step;
    if (points) g["points"] = *points;
    if (!g.empty()) cfg["grid"] = g;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Discrete spectra of attractive delta-interactions on planar graphs via the\n"
      "point-interaction approximation: spectral solver, exact references, sweeps."};
  app.require_subcommand(1);

  json cfg;                 // assembled by the chosen subcommand
  bool have_cfg = false;    // run an experiment after parsing
  bool validate_only = false;

  // ---- run / validate / presets -------------------------------------------
  auto* run = app.add_subcommand("run", "run an experiment from a config, preset, or manifest");
  std::string run_config, run_preset, run_manifest, run_prefix;
  auto* oc = run->add_option("--config", run_config, "JSON config file");
  auto* op = run->add_option("--preset", run_preset, "built-in preset name (see `lgq presets`)");
  auto* om = run->add_option("--from-manifest", run_manifest,
                             "re-run the config embedded in a manifest");
  oc->excludes(op)->excludes(om);
  op->excludes(om);
  run->add_option("--output-prefix", run_prefix, "override the config's output prefix");
  run->callback([&] {
    if (!run_config.empty())
      cfg = load_json_file(run_config);
    else if (!run_preset.empty())
      cfg = lgq::preset_config(run_preset);
    else if (!run_manifest.empty())
      cfg = lgq::config_from_manifest(load_json_file(run_manifest));
    else
      throw lgq::ConfigError("run needs one of --config, --preset, --from-manifest");
    if (!run_prefix.empty()) cfg["output_prefix"] = run_prefix;
    have_cfg = true;
  });

  auto* validate = app.add_subcommand("validate", "schema-check a config without computing");
  std::string val_config, val_preset;
  auto* vc = validate->add_option("--config", val_config, "JSON config file");
  auto* vp = validate->add_option("--preset", val_preset, "built-in preset name");
  vc->excludes(vp);
  validate->callback([&] {
    if (!val_config.empty())
      cfg = load_json_file(val_config);
    else if (!val_preset.empty())
      cfg = lgq::preset_config(val_preset);
    else
      throw lgq::ConfigError("validate needs --config or --preset");
    // output_prefix is supplied at run time via --output-prefix, so a config
    // without one is still schema-valid.
    if (!cfg.contains("output_prefix")) cfg["output_prefix"] = "out";
    have_cfg = true;
    validate_only = true;
  });

  auto* presets = app.add_subcommand("presets", "list built-in presets");
  std::string show;
  presets->add_option("--show", show, "print one preset's config JSON");
  presets->callback([&] {
    if (!show.empty())
      std::cout << lgq::preset_config(show).dump(2) << "\n";
    else
      for (const auto& n : lgq::preset_names()) std::cout << n << "\n";
  });

  // ---- experiment subcommands (flags mirror config keys) ------------------
  std::string prefix;

  auto* ring = app.add_subcommand("ring", "ring / open-ring spectrum at fixed point count");
  {
    static std::optional<double> radius, gamma;
    static std::optional<std::string> cut_angle;
    static std::optional<int> count;
    static SolverFlags solver;
    ring->add_option("--radius", radius, "ring radius");
    ring->add_option("--gamma", gamma, "attraction strength");
    ring->add_option("--count", count, "number of point interactions");
    ring->add_option("--cut-angle", cut_angle, "removed arc angle (0 = closed ring)");
    solver.attach(ring);
    ring->callback([&] {
      cfg = {{"experiment", "ring"}, {"output_prefix", prefix.empty() ? "ring" : prefix}};
      if (radius) cfg["radius"] = *radius;
      if (gamma) cfg["gamma"] = *gamma;
      if (count) cfg["count"] = *count;
      if (cut_angle) cfg["cut_angle"] = parse_angle(*cut_angle);
      solver.apply(cfg);
      have_cfg = true;
    });
  }

  auto* conv = app.add_subcommand("ring-convergence",
                                  "ring level error against the exact value vs point count");
  {
    static std::optional<double> radius, gamma;
    static std::optional<int> level;
    static std::vector<int> counts;
    static SolverFlags solver;
    conv->add_option("--radius", radius, "ring radius");
    conv->add_option("--gamma", gamma, "attraction strength");
    conv->add_option("--counts", counts, "point counts, strictly increasing")->expected(-1);
    conv->add_option("--level", level, "level index inside the scan window");
    solver.attach(conv);
    conv->callback([&] {
      cfg = {{"experiment", "ring-convergence"},
             {"output_prefix", prefix.empty() ? "ring-convergence" : prefix}};
      if (radius) cfg["radius"] = *radius;
      if (gamma) cfg["gamma"] = *gamma;
      if (!counts.empty()) cfg["counts"] = counts;
      if (level) cfg["level"] = *level;
      solver.apply(cfg);
      have_cfg = true;
    });
  }

  auto* star = app.add_subcommand("star-sweep",
                                  "two-arm star spectrum versus arm angle or arm length");
  {
    static std::optional<std::string> sweep_parameter, beta;
    static std::vector<double> arm_lengths;
    static std::optional<double> gamma, resolution, slope_threshold;
    static GridFlags grid;
    static SolverFlags solver;
    star->add_option("--sweep-parameter", sweep_parameter, "\"beta\" or \"arm_length\"");
    star->add_option("--beta", beta, "inter-arm angle (arm_length sweep only)");
    star->add_option("--arm-lengths", arm_lengths, "two arm lengths (beta sweep only)")
        ->expected(2);
    star->add_option("--gamma", gamma, "attraction strength");
    star->add_option("--resolution", resolution, "arc-length spacing between points");
    star->add_option("--slope-threshold", slope_threshold, "plateau slope threshold");
    grid.attach(star, "swept value");
    solver.attach(star);
    star->callback([&] {
      cfg = {{"experiment", "star-sweep"},
             {"output_prefix", prefix.empty() ? "star-sweep" : prefix}};
      if (sweep_parameter) cfg["sweep_parameter"] = *sweep_parameter;
      if (beta) cfg["beta"] = parse_angle(*beta);
      if (!arm_lengths.empty()) cfg["arm_lengths"] = arm_lengths;
      if (gamma) cfg["gamma"] = *gamma;
      if (resolution) cfg["resolution"] = *resolution;
      if (slope_threshold) cfg["slope_threshold"] = *slope_threshold;
      grid.apply(cfg);
      solver.apply(cfg);
      have_cfg = true;
    });
  }

  auto* reso = app.add_subcommand(
      "resonance-sweep", "near-loop spectrum versus leg length (tunneling resonances)");
  {
    static std::optional<double> radius, delta, gamma, resolution, slope_threshold;
    static std::optional<std::string> flare_angle, gap_angle;
    static GridFlags grid;
    static SolverFlags solver;
    reso->add_option("--radius", radius, "loop radius");
    reso->add_option("--delta", delta, "mouth width (calibrates the gap angle)");
    reso->add_option("--gap-angle", gap_angle, "gap angle (alternative to --delta)");
    reso->add_option("--flare-angle", flare_angle, "outward flare angle at each arc end");
    reso->add_option("--gamma", gamma, "attraction strength");
    reso->add_option("--resolution", resolution, "arc-length spacing between points");
    reso->add_option("--slope-threshold", slope_threshold, "plateau slope threshold");
    grid.attach(reso, "leg length");
    solver.attach(reso);
    reso->callback([&] {
      cfg = {{"experiment", "resonance-sweep"},
             {"output_prefix", prefix.empty() ? "resonance-sweep" : prefix}};
      if (radius) cfg["radius"] = *radius;
      if (delta) cfg["delta"] = *delta;
      if (gap_angle) cfg["gap_angle"] = parse_angle(*gap_angle);
      if (flare_angle) cfg["flare_angle"] = parse_angle(*flare_angle);
      if (gamma) cfg["gamma"] = *gamma;
      if (resolution) cfg["resolution"] = *resolution;
      if (slope_threshold) cfg["slope_threshold"] = *slope_threshold;
      grid.apply(cfg);
      solver.apply(cfg);
      have_cfg = true;
    });
  }

  auto* zline = app.add_subcommand(
      "zline-sweep", "Z-shaped line spectrum versus arm length (reflection resonances)");
  {
    static std::optional<double> mid_length, gamma, resolution, slope_threshold;
    static std::optional<std::string> bend_angle;
    static GridFlags grid;
    static SolverFlags solver;
    zline->add_option("--mid-length", mid_length, "central segment length");
    zline->add_option("--bend-angle", bend_angle, "angle between segments (pi = straight)");
    zline->add_option("--gamma", gamma, "attraction strength");
    zline->add_option("--resolution", resolution, "arc-length spacing between points");
    zline->add_option("--slope-threshold", slope_threshold, "plateau slope threshold");
    grid.attach(zline, "arm length");
    solver.attach(zline);
    zline->callback([&] {
      cfg = {{"experiment", "zline-sweep"},
             {"output_prefix", prefix.empty() ? "zline-sweep" : prefix}};
      if (mid_length) cfg["mid_length"] = *mid_length;
      if (bend_angle) cfg["bend_angle"] = parse_angle(*bend_angle);
      if (gamma) cfg["gamma"] = *gamma;
      if (resolution) cfg["resolution"] = *resolution;
      if (slope_threshold) cfg["slope_threshold"] = *slope_threshold;
      grid.apply(cfg);
      solver.apply(cfg);
      have_cfg = true;
    });
  }

  auto* eigf = app.add_subcommand("eigenfunction",
                                  "eigenfunction of a ring / open-ring level on a grid");
  {
    static std::optional<double> radius, gamma;
    static std::optional<std::string> geometry, theta, cut_angle;
    static std::optional<int> count, state, nx, ny;
    static std::vector<double> window;
    static SolverFlags solver;
    eigf->add_option("--preset", geometry, "geometry template: ring | open-ring");
    eigf->add_option("--theta", theta, "removed arc angle for --preset open-ring");
    eigf->add_option("--cut-angle", cut_angle, "removed arc angle (alternative to --theta)");
    eigf->add_option("--radius", radius, "ring radius");
    eigf->add_option("--gamma", gamma, "attraction strength");
    eigf->add_option("--count", count, "number of point interactions");
    eigf->add_option("--state", state, "level index inside the scan window");
    eigf->add_option("--nx", nx, "grid columns");
    eigf->add_option("--ny", ny, "grid rows");
    eigf->add_option("--window", window, "evaluation window: xmin xmax ymin ymax")->expected(4);
    solver.attach(eigf);
    eigf->callback([&] {
      cfg = {{"experiment", "eigenfunction"},
             {"output_prefix", prefix.empty() ? "eigenfunction" : prefix}};
      if (geometry) {
        if (*geometry == "open-ring") {
          if (!theta && !cut_angle)
            throw lgq::ConfigError("--preset open-ring needs --theta");
        } else if (*geometry != "ring") {
          throw lgq::ConfigError("unknown geometry preset '" + *geometry +
                                 "' (expected ring or open-ring)");
        }
      }
      if (theta && cut_angle) throw lgq::ConfigError("give --theta or --cut-angle, not both");
      if (theta) cfg["cut_angle"] = parse_angle(*theta);
      if (cut_angle) cfg["cut_angle"] = parse_angle(*cut_angle);
      if (radius) cfg["radius"] = *radius;
      if (gamma) cfg["gamma"] = *gamma;
      if (count) cfg["count"] = *count;
      if (state) cfg["state"] = *state;
      if (nx) cfg["nx"] = *nx;
      if (ny) cfg["ny"] = *ny;
      if (!window.empty())
        cfg["window"] = {{"xmin", window[0]}, {"xmax", window[1]},
                         {"ymin", window[2]}, {"ymax", window[3]}};
      solver.apply(cfg);
      have_cfg = true;
    });
  }

  auto* poly = app.add_subcommand("polymer",
                                  "spectral threshold of the equidistant polymer chain");
  {
    static std::optional<double> alpha, l0, tol;
    static std::optional<long> m_max;
    static std::vector<long> ns;
    poly->add_option("--alpha", alpha, "per-site coupling")->required();
    poly->add_option("--n", ns, "points per period (one or more values)")->expected(-1);
    poly->add_option("--l0", l0, "period length");
    poly->add_option("--m-max", m_max, "series truncation order");
    poly->add_option("--tol", tol, "residual tolerance");
    poly->callback([&] {
      cfg = {{"experiment", "polymer"},
             {"output_prefix", prefix.empty() ? "polymer" : prefix},
             {"alpha", *alpha}};
      if (!ns.empty()) cfg["n"] = ns;
      if (l0) cfg["l0"] = *l0;
      if (m_max) cfg["m_max"] = *m_max;
      if (tol) cfg["tol"] = *tol;
      have_cfg = true;
    });
  }

  auto* oring = app.add_subcommand("oracle-ring",
                                   "exact ring levels from the Bessel characteristic equation");
  {
    static std::optional<double> radius, gamma, tol;
    static std::optional<int> lmax;
    oring->add_option("--radius", radius, "ring radius");
    oring->add_option("--gamma", gamma, "attraction strength");
    oring->add_option("--lmax", lmax, "highest angular momentum sector to keep");
    oring->add_option("--tol", tol, "root bisection tolerance");
    oring->callback([&] {
      cfg = {{"experiment", "oracle-ring"},
             {"output_prefix", prefix.empty() ? "oracle-ring" : prefix}};
      if (radius) cfg["radius"] = *radius;
      if (gamma) cfg["gamma"] = *gamma;
      if (lmax) cfg["lmax"] = *lmax;
      if (tol) cfg["tol"] = *tol;
      have_cfg = true;
    });
  }

  auto* bs = app.add_subcommand(
      "bs-star", "two-arm star: integral-operator reference vs the point approximation");
  {
    static std::optional<double> gamma, arm_length, resolution;
    static std::optional<std::string> beta;
    static std::optional<int> nodes_per_arm;
    static SolverFlags solver;
    bs->add_option("--beta", beta, "inter-arm angle");
    bs->add_option("--gamma", gamma, "attraction strength");
    bs->add_option("--arm-length", arm_length, "arm length");
    bs->add_option("--nodes-per-arm", nodes_per_arm, "quadrature nodes per arm");
    bs->add_option("--resolution", resolution, "core-side arc-length spacing");
    solver.attach(bs);
    bs->callback([&] {
      cfg = {{"experiment", "bs-star"}, {"output_prefix", prefix.empty() ? "bs-star" : prefix}};
      if (beta) cfg["beta"] = parse_angle(*beta);
      if (gamma) cfg["gamma"] = *gamma;
      if (arm_length) cfg["arm_length"] = *arm_length;
      if (nodes_per_arm) cfg["nodes_per_arm"] = *nodes_per_arm;
      if (resolution) cfg["resolution"] = *resolution;
      solver.apply(cfg);
      have_cfg = true;
    });
  }

  for (auto* cmd : {ring, conv, star, reso, zline, eigf, poly, oring, bs})
    cmd->add_option("--output-prefix", prefix, "output file prefix");

  try {
    (void)lgq::worker_budget();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const lgq::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (!have_cfg) return 0;  // presets listing

  try {
    lgq::validate_config(cfg);
    if (validate_only) {
      std::cout << "ok\n";
      return 0;
    }
    return execute(cfg);
  } catch (const lgq::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
