#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lgq/geometry.hpp"
#include "lgq/spectral.hpp"

namespace lgq {

struct SolverSettings {
  double kappa_min = 0.0;  // <= 0: default 1e-3 * gamma
  double kappa_max = 0.0;  // <= 0: default 1.25 * max(gamma, single-site kappa)
  int scan_points = 200;
  double tol = 1e-10;
  double degeneracy_rel_tol = 1e-6;
  int refine_cap = 64;
};

// One parameter value of a sweep; a solver failure leaves a gap in the data
// (ok = false) instead of aborting the sweep.
struct SweepRow {
  double param = 0.0;
  bool ok = false;
  std::string error;
  std::vector<SpectrumLevel> levels;  // ascending, clustered

  // Energies expanded by multiplicity (what the CSV row holds).
  std::vector<double> energies() const;
};

struct SweepResult {
  std::string parameter;  // name of the swept parameter
  std::vector<SweepRow> rows;
  double gamma = 0.0;
  Resolution resolution;  // held fixed across the sweep
  SolverSettings settings;
};

// Evaluates the spectrum of family(p) at every grid value, in grid order.
// The grid must be strictly monotone. Rows are mutually independent.
SweepResult sweep(const std::string& parameter_name,
                  const std::function<GraphSpec(double)>& family,
                  const std::vector<double>& grid, double gamma,
                  const Resolution& resolution, const SolverSettings& settings);

// `param,E_1,...,E_K` with NA padding; %.17g; byte-identical for equal inputs.
std::string sweep_to_csv(const SweepResult& sr);

struct GapMinimum {
  double param = 0.0;
  double gap = 0.0;    // E_{pair+1} - E_pair at the local minimum
  int pair_index = 0;  // 0-based lower curve of the adjacent pair
};

struct PlateauSegment {
  int curve_index = 0;
  double param_begin = 0.0;
  double param_end = 0.0;
  double slope_bound = 0.0;  // max |dE/dparam| over the segment
};

// Sorted-index curve born (count grows) or dying (count shrinks) at param.
struct CurveEvent {
  double param = 0.0;
  int curve_index = 0;
  bool birth = true;
};

struct GapReport {
  double slope_threshold = 0.0;
  std::vector<GapMinimum> minima;      // interior local minima of adjacent-pair gaps
  std::vector<PlateauSegment> plateaus;  // maximal runs with |slope| < threshold
  std::vector<CurveEvent> events;
};

// Curves are matched across the grid by sorted index; count changes are
// reported as birth/death events. Central-difference slopes; a plateau is a
// maximal run of interior nodes below slope_threshold (extended to the grid
// boundary when the run touches the first or last interior node).
GapReport gap_report(const SweepResult& sr, double slope_threshold);

double default_slope_threshold(double gamma);  // 1e-3 * gamma^2 per unit parameter

std::string gap_report_to_json(const GapReport& gr);

struct ConvergenceFit {
  double exponent = 0.0;   // a in error ~ prefactor * N^(-a)
  double prefactor = 0.0;
  double residual = 0.0;   // rms residual of the log-log fit
};

// Least squares on (ln N, ln error); needs >= 3 strictly positive points.
ConvergenceFit convergence_fit(const std::vector<std::pair<double, double>>& errors);

}  // namespace lgq
