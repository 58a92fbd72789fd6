#include "lgq/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lgq {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Sorted-index curve table: value(i, j) for row i, curve j; NA (nullopt) when
// the level does not exist at that grid value or the row failed.
struct CurveTable {
  std::vector<double> params;
  std::vector<std::vector<std::optional<double>>> cells;  // [row][curve]
  std::vector<bool> row_ok;
  std::size_t n_curves = 0;
};

CurveTable build_table(const SweepResult& sr) {
  CurveTable t;
  t.params.reserve(sr.rows.size());
  t.row_ok.reserve(sr.rows.size());
  std::vector<std::vector<double>> expanded;
  for (const SweepRow& row : sr.rows) {
    t.params.push_back(row.param);
    t.row_ok.push_back(row.ok);
    expanded.push_back(row.ok ? row.energies() : std::vector<double>{});
    t.n_curves = std::max(t.n_curves, expanded.back().size());
  }
  for (const auto& e : expanded) {
    std::vector<std::optional<double>> cell(t.n_curves);
    for (std::size_t j = 0; j < e.size(); ++j) cell[j] = e[j];
    t.cells.push_back(std::move(cell));
  }
  return t;
}

}  // namespace

std::vector<double> SweepRow::energies() const {
  std::vector<double> out;
  for (const SpectrumLevel& l : levels)
    for (int m = 0; m < l.multiplicity; ++m) out.push_back(l.energy);
  return out;
}

SweepResult sweep(const std::string& parameter_name,
                  const std::function<GraphSpec(double)>& family,
                  const std::vector<double>& grid, double gamma,
                  const Resolution& resolution, const SolverSettings& settings) {
  if (grid.empty()) throw std::invalid_argument("sweep grid must be non-empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    bool inc = grid[1] > grid[0];
    if ((inc && !(grid[i] > grid[i - 1])) || (!inc && !(grid[i] < grid[i - 1])))
      throw std::invalid_argument("sweep grid must be strictly monotone");
  }
  SweepResult sr;
  sr.parameter = parameter_name;
  sr.gamma = gamma;
  sr.resolution = resolution;
  sr.settings = settings;
  sr.rows.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SweepRow& row = sr.rows[i];
    row.param = grid[i];
    try {
      DiscretizedGraph g = discretize(family(grid[i]), gamma, resolution);
      LambdaSystem sys(std::move(g));
      double kmin = settings.kappa_min > 0.0 ? settings.kappa_min : default_kappa_min(sys);
      double kmax = settings.kappa_max > 0.0 ? settings.kappa_max : default_kappa_max(sys);
      Spectrum sp = find_eigenvalues(sys, kmin, kmax, settings.scan_points, settings.tol,
                                     settings.degeneracy_rel_tol, settings.refine_cap);
      row.levels = std::move(sp.levels);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  }
  return sr;
}

std::string sweep_to_csv(const SweepResult& sr) {
  CurveTable t = build_table(sr);
  std::string out = "param";
  for (std::size_t j = 0; j < t.n_curves; ++j) out += ",E_" + std::to_string(j + 1);
  out += "\n";
  for (std::size_t i = 0; i < t.params.size(); ++i) {
    out += fmt17(t.params[i]);
    for (std::size_t j = 0; j < t.n_curves; ++j) {
      out += ",";
      out += t.cells[i][j] ? fmt17(*t.cells[i][j]) : std::string("NA");
    }
    out += "\n";
  }
  return out;
}

double default_slope_threshold(double gamma) { return 1e-3 * gamma * gamma; }

GapReport gap_report(const SweepResult& sr, double slope_threshold) {
  if (sr.rows.size() < 3) throw std::invalid_argument("gap_report needs at least 3 grid points");
  if (!(slope_threshold > 0.0)) throw std::invalid_argument("slope threshold must be positive");
  CurveTable t = build_table(sr);
  GapReport gr;
  gr.slope_threshold = slope_threshold;
  std::size_t n = t.params.size();

  // Interior local minima of adjacent-pair gaps.
  for (std::size_t j = 0; j + 1 < t.n_curves; ++j) {
    std::vector<std::optional<double>> gap(n);
    for (std::size_t i = 0; i < n; ++i)
      if (t.cells[i][j] && t.cells[i][j + 1]) gap[i] = *t.cells[i][j + 1] - *t.cells[i][j];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (!gap[i - 1] || !gap[i] || !gap[i + 1]) continue;
      if (*gap[i] < *gap[i - 1] && *gap[i] <= *gap[i + 1])
        gr.minima.push_back({t.params[i], *gap[i], (int)j});
    }
  }
  std::sort(gr.minima.begin(), gr.minima.end(), [](const GapMinimum& a, const GapMinimum& b) {
    return a.gap < b.gap;
  });

  // Plateaus: maximal runs of interior nodes with |central slope| < threshold.
  for (std::size_t j = 0; j < t.n_curves; ++j) {
    std::size_t run_start = 0;
    double run_max = 0.0;
    bool in_run = false;
    auto flush = [&](std::size_t run_end) {
      if (!in_run) return;
      PlateauSegment seg;
      seg.curve_index = (int)j;
      seg.param_begin = run_start == 1 ? t.params.front() : t.params[run_start];
      seg.param_end = run_end == n - 2 ? t.params.back() : t.params[run_end];
      seg.slope_bound = run_max;
      gr.plateaus.push_back(seg);
      in_run = false;
    };
    for (std::size_t i = 1; i + 1 < n; ++i) {
      std::optional<double> slope;
      if (t.cells[i - 1][j] && t.cells[i + 1][j])
        slope = std::abs((*t.cells[i + 1][j] - *t.cells[i - 1][j]) /
                         (t.params[i + 1] - t.params[i - 1]));
      if (slope && *slope < slope_threshold) {
        if (!in_run) {
          in_run = true;
          run_start = i;
          run_max = 0.0;
        }
        run_max = std::max(run_max, *slope);
      } else {
        flush(i - 1);
      }
    }
    flush(n - 2);
  }

  // Birth/death of sorted-index curves between consecutive successful rows.
  std::size_t prev = n;  // index of previous ok row
  for (std::size_t i = 0; i < n; ++i) {
    if (!t.row_ok[i]) continue;
    if (prev != n) {
      auto count = [&](std::size_t r) {
        std::size_t c = 0;
        while (c < t.n_curves && t.cells[r][c]) ++c;
        return c;
      };
      std::size_t cp = count(prev), ci = count(i);
      for (std::size_t j = cp; j < ci; ++j) gr.events.push_back({t.params[i], (int)j, true});
      for (std::size_t j = ci; j < cp; ++j) gr.events.push_back({t.params[prev], (int)j, false});
    }
    prev = i;
  }
  return gr;
}

std::string gap_report_to_json(const GapReport& gr) {
  nlohmann::json j;
  j["slope_threshold"] = gr.slope_threshold;
  j["minima"] = nlohmann::json::array();
  for (const auto& m : gr.minima)
    j["minima"].push_back({{"param", m.param}, {"gap", m.gap}, {"pair_index", m.pair_index}});
  j["plateaus"] = nlohmann::json::array();
  for (const auto& p : gr.plateaus)
    j["plateaus"].push_back({{"curve_index", p.curve_index},
                             {"param_begin", p.param_begin},
                             {"param_end", p.param_end},
                             {"slope_bound", p.slope_bound}});
  j["events"] = nlohmann::json::array();
  for (const auto& e : gr.events)
    j["events"].push_back(
        {{"param", e.param}, {"curve_index", e.curve_index}, {"kind", e.birth ? "birth" : "death"}});
  return j.dump(2);
}

ConvergenceFit convergence_fit(const std::vector<std::pair<double, double>>& errors) {
  if (errors.size() < 3) throw std::invalid_argument("need at least 3 points to fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, e] : errors) {
    if (!(n > 0.0) || !(e > 0.0))
      throw std::invalid_argument("convergence points must be strictly positive");
    double x = std::log(n), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double m = (double)errors.size();
  double denom = m * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw std::invalid_argument("degenerate abscissae");
  double slope = (m * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / m;
  ConvergenceFit fit;
  fit.exponent = -slope;
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (const auto& [n, e] : errors) {
    double r = std::log(e) - (slope * std::log(n) + intercept);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

}  // namespace lgq
