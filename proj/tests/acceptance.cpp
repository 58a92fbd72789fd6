// End-to-end acceptance gate: eleven numbered checks, one PASS/FAIL line
// each, tolerances pinned as the named constants below. Checks 2, 3, and 7
// compare the point-interaction approximation at a fixed published
// resolution against exact references; where the method's slow logarithmic
// convergence exceeds the stated bound, the line fails and says by how much.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <lgq/geometry.hpp>
#include <lgq/oracles.hpp>
#include <lgq/specfun.hpp>
#include <lgq/spectral.hpp>
#include <lgq/sweeps.hpp>

using namespace lgq;

namespace {

constexpr double kPiC = 3.14159265358979323846;

// ---- pinned tolerances ------------------------------------------------------
constexpr double kSingleCenterRel = 1e-10;   // 1: closed form, relative
constexpr double kSingleCenterSeconds = 1.0; // 1: wall-clock budget
// "three significant figures" read as relative deviation below half a percent
constexpr double kSigFig3Rel = 5e-3;         // 2, 3: agreement with references
constexpr double kRingG05NumRel = 0.03;      // 2: N=1000 vs exact
constexpr double kRingG1NumRel = 0.05;       // 3: N=1000 vs exact
constexpr double kOpenRingRel = 0.02;        // 5: sixth state of the open ring
constexpr double kStarEndSlack = 0.01;       // 6: straight-star threshold slack
constexpr double kCrossRel = 0.05;           // 7: vs two crossing lines
constexpr double kDualRouteRel = 0.01;       // 8: integral-operator vs matrix route
constexpr double kPolymerCurveRel = 1e-2;    // 9: linearity of alpha(n)
constexpr double kPolymerResidual = 1e-10;   // 9: defining-equation residual
constexpr double kPolymerInvert = 1e-7;      // 9: threshold round trip
constexpr double kEuclideanRel = 1e-10;      // 11: rigid-motion invariance
constexpr double kScalingRel = 1e-9;         // 11: scaling covariance
constexpr double kAssembleRel = 1e-13;       // 11: matrix entry formulas
constexpr double kMarginAbs = 1e-15;         // 11: one-point margin identity

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string str(const char* fmt, ...) {
  char buf[768];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

double rel_dev(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

DiscretizedGraph single_center(double alpha) {
  DiscretizedGraph g;
  g.points.resize(1, 2);
  g.points.setZero();
  g.gamma = 1.0;
  g.total_length = 1.0 / alpha;
  g.alpha = alpha;
  g.spacing = 1.0;
  g.has_cutoff_edges = false;
  return g;
}

std::vector<double> expanded_energies(const Spectrum& sp) {
  std::vector<double> out;
  for (const auto& l : sp.levels)
    for (int m = 0; m < l.multiplicity; ++m) out.push_back(l.energy);
  return out;
}

std::vector<double> linear_grid(double from, double step, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = from + step * i;
  return g;
}

// ---- 1: single attractive center, closed-form eigenvalue --------------------

Outcome criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double alpha : {0.05, 0.1, 0.5}) {
    double kappa_star = 2.0 * std::exp(-euler_gamma - 2.0 * kPiC * alpha);
    double e_exact = -kappa_star * kappa_star;
    LambdaSystem sys(single_center(alpha));
    Spectrum sp = find_eigenvalues(sys, 0.5 * kappa_star, 2.0 * kappa_star, 40, 1e-14);
    if (sp.levels.size() != 1)
      return {false, str("alpha=%g: expected 1 level, found %zu", alpha, sp.levels.size())};
    worst = std::max(worst, rel_dev(sp.levels[0].energy, e_exact));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool pass = worst <= kSingleCenterRel && secs < kSingleCenterSeconds;
  return {pass, str("max rel dev %.3g (tol %.0e), %.3f s (budget %.0f s)", worst,
                    kSingleCenterRel, secs, kSingleCenterSeconds)};
}

// ---- 2, 3: closed ring of radius 10, exact sectors vs N=1000 matrix ----------

struct RingCompare {
  std::vector<RingLevel> exact;          // ascending in energy
  std::vector<SpectrumLevel> numeric;    // distinct levels, ascending
};

const RingCompare& ring_compare(double gamma) {
  static std::map<double, RingCompare> cache;
  auto it = cache.find(gamma);
  if (it != cache.end()) return it->second;
  RingCompare rc;
  rc.exact = ring_exact_all(10.0, gamma);
  double kmin = gamma == 0.5 ? 0.10 : 0.22;
  double kmax = gamma == 0.5 ? 0.30 : 0.55;
  DiscretizedGraph g = discretize(Ring{10.0, 0.0}, gamma, Resolution::by_count(1000));
  LambdaSystem sys(g);
  Spectrum sp = find_eigenvalues(sys, kmin, kmax, 60, 1e-10);
  rc.numeric = sp.levels;
  return cache.emplace(gamma, std::move(rc)).first->second;
}

Outcome ring_criterion(double gamma, const std::vector<double>& refs, double num_tol) {
  const RingCompare& rc = ring_compare(gamma);
  std::ostringstream out;
  bool pass = true;

  if (rc.exact.size() != refs.size())
    return {false,
            str("expected %zu exact levels, got %zu", refs.size(), rc.exact.size())};
  for (std::size_t i = 0; i < rc.exact.size(); ++i) {
    int want_mult = i == 0 ? 1 : 2;
    if (rc.exact[i].l != (int)i || rc.exact[i].multiplicity != want_mult) {
      pass = false;
      out << str(" exact level %zu has wrong sector/multiplicity;", i);
    }
    double dev = rel_dev(rc.exact[i].energy, refs[i]);
    if (dev > kSigFig3Rel) {
      pass = false;
      out << str(" exact[%zu]=%.6f vs %.4f off %.2e;", i, rc.exact[i].energy, refs[i], dev);
    }
  }
  out << str("exact levels match references to %.1f%%;", 100.0 * kSigFig3Rel);

  if (rc.numeric.size() != rc.exact.size())
    return {false, str("N=1000 found %zu distinct levels, expected %zu", rc.numeric.size(),
                       rc.exact.size())};
  out << " N=1000 dev";
  bool num_ok = true;
  for (std::size_t i = 0; i < rc.exact.size(); ++i) {
    if (rc.numeric[i].multiplicity != rc.exact[i].multiplicity) pass = false;
    double dev = rel_dev(rc.numeric[i].energy, rc.exact[i].energy);
    out << str(" %.2f%%", 100.0 * dev);
    if (dev > num_tol) num_ok = false;
  }
  out << str(" (tol %.0f%%)", 100.0 * num_tol);
  if (!num_ok) {
    pass = false;
    out << " — point-approximation bias at N=1000 exceeds the bound";
  }
  return {pass, out.str()};
}

Outcome criterion2() {
  return ring_criterion(0.5, {-0.0655, -0.0524, -0.0207}, kRingG05NumRel);
}

Outcome criterion3() {
  Outcome o = ring_criterion(1.0, {-0.253, -0.243, -0.21, -0.159, -0.0881}, kRingG1NumRel);
  // stronger coupling converges more slowly: per-level absolute error at equal
  // N must exceed the gamma = 0.5 one on the three sectors both rings possess
  const RingCompare& weak = ring_compare(0.5);
  const RingCompare& strong = ring_compare(1.0);
  bool ordered = true;
  for (std::size_t i = 0; i < 3; ++i) {
    double err_w = std::abs(weak.numeric[i].energy - weak.exact[i].energy);
    double err_s = std::abs(strong.numeric[i].energy - strong.exact[i].energy);
    if (!(err_s > err_w)) {
      ordered = false;
      o.pass = false;
      o.detail += str("; |error| ordering violated at level %zu (%.2e vs %.2e)", i, err_s,
                      err_w);
    }
  }
  if (ordered) o.detail += "; per-level |error| exceeds the gamma=0.5 one at equal N";
  return o;
}

// ---- 4: convergence rate of the ground state in N ----------------------------

Outcome criterion4() {
  double e_exact = ring_exact_all(10.0, 0.5).front().energy;
  std::vector<std::pair<double, double>> errs;
  std::ostringstream out;
  out << "|error|";
  for (int n : {100, 200, 400, 800}) {
    DiscretizedGraph g = discretize(Ring{10.0, 0.0}, 0.5, Resolution::by_count(n));
    Spectrum sp = find_eigenvalues(LambdaSystem(g), 0.18, 0.28, 32, 1e-10);
    if (sp.levels.empty()) return {false, str("N=%d: no level in the scan window", n)};
    double err = std::abs(sp.levels.front().energy - e_exact);
    errs.emplace_back((double)n, err);
    out << str(" %.5g", err);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < errs.size(); ++i)
    if (!(errs[i].second < errs[i - 1].second)) decreasing = false;
  ConvergenceFit fit = convergence_fit(errs);
  out << str("; fitted exponent %.3f (needs 0 < a < 1)", fit.exponent);
  if (!decreasing) out << "; error sequence not strictly decreasing";
  bool pass = decreasing && fit.exponent > 0.0 && fit.exponent < 1.0;
  return {pass, out.str()};
}

// ---- 5: open ring (60-degree cut), sixth state --------------------------------

Outcome criterion5() {
  DiscretizedGraph g = discretize(Ring{10.0, kPiC / 3.0}, 1.0, Resolution::by_count(1000));
  Spectrum sp = find_eigenvalues(LambdaSystem(g), 0.32, 0.50, 48, 1e-10);
  std::vector<double> es = expanded_energies(sp);
  if (es.size() < 6) return {false, str("only %zu states in the scan window", es.size())};
  double e5 = es[5];
  double dev = rel_dev(e5, -0.116);
  bool pass = dev <= kOpenRingRel;
  return {pass,
          str("E_5 = %.5f vs -0.116, dev %.2f%% (tol %.0f%%); continuum-limit value "
              "-0.151 noted as non-binding",
              e5, 100.0 * dev, 100.0 * kOpenRingRel)};
}

// ---- 6: two-arm star, monotone trend in the bending angle ---------------------

Outcome criterion6() {
  const double th = line_threshold(0.1);  // -gamma^2/4
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i) grid[i] = 0.15 * kPiC + 0.75 * kPiC * i / 9.0;
  SolverSettings s;
  s.kappa_min = 0.042;
  s.kappa_max = 0.10;
  s.scan_points = 40;
  auto family = [](double beta) { return GraphSpec(Star{{beta}, {300.0, 300.0}}); };
  SweepResult sr = sweep("beta", family, grid, 0.1, Resolution::by_spacing(1.5), s);

  std::ostringstream out;
  bool pass = true;
  double prev_e0 = -std::numeric_limits<double>::infinity();
  int prev_below = std::numeric_limits<int>::max();
  std::ostringstream counts;
  for (const auto& row : sr.rows) {
    if (!row.ok || row.levels.empty())
      return {false,
              str("beta=%.4f: %s", row.param, row.ok ? "no level found" : row.error.c_str())};
    double e0 = row.levels.front().energy;
    if (!(e0 > prev_e0)) {
      pass = false;
      out << str(" ground level not increasing at beta=%.4f;", row.param);
    }
    prev_e0 = e0;
    int below = 0;
    for (double e : row.energies())
      if (e < th) ++below;
    if (below > prev_below) {
      pass = false;
      out << str(" below-threshold count grows at beta=%.4f;", row.param);
    }
    prev_below = below;
    counts << ' ' << below;
  }
  double e_first = sr.rows.front().levels.front().energy;
  double e_last = sr.rows.back().levels.front().energy;

  // fully unfolded star: nothing below the straight-line threshold (1% slack)
  DiscretizedGraph straight =
      discretize(Star{{kPiC}, {300.0, 300.0}}, 0.1, Resolution::by_spacing(1.5));
  Spectrum sp = find_eigenvalues(LambdaSystem(straight), 0.02, 0.15, 48, 1e-10);
  double floor = th * (1.0 + kStarEndSlack);
  double e_min = 0.0;
  for (double e : expanded_energies(sp)) e_min = std::min(e_min, e);
  if (e_min < floor) {
    pass = false;
    out << str(" straight star has a level %.6f below %.6f;", e_min, floor);
  }
  out << str("ground level rises %.5f -> %.5f over 10 angles; below-threshold counts%s; "
             "straight-star minimum %.6f >= %.6f",
             e_first, e_last, counts.str().c_str(), e_min, floor);
  return {pass, out.str()};
}

// ---- 7: symmetric four-arm cross vs two crossing lines ------------------------

Outcome criterion7() {
  double e_ref = cross_eigenvalue(1.0);  // -gamma^2/2
  DiscretizedGraph g = discretize(Star{{kPiC / 2, kPiC / 2, kPiC / 2}, {30.0, 30.0, 30.0, 30.0}},
                                  1.0, Resolution::by_spacing(0.1));
  Spectrum sp = find_eigenvalues(LambdaSystem(g), 0.60, 0.70, 24, 1e-10);
  if (sp.levels.empty()) return {false, "no level in the scan window"};
  const SpectrumLevel& l0 = sp.levels.front();
  if (l0.kappa < 0.605 || l0.kappa > 0.695)
    return {false, str("lowest root kappa=%.4f sits at the window edge", l0.kappa)};
  double dev = rel_dev(l0.energy, e_ref);
  bool pass = dev <= kCrossRel;
  std::string detail = str("lowest level %.6f vs %.2f, dev %.1f%% (tol %.0f%%)", l0.energy,
                           e_ref, 100.0 * dev, 100.0 * kCrossRel);
  if (!pass)
    detail += "; finite-spacing bias of the point approximation at spacing 0.1 "
              "exceeds the bound";
  return {pass, detail};
}

// ---- 8: independent integral-operator route for the star ground state ---------

Outcome criterion8() {
  auto t0 = std::chrono::steady_clock::now();
  StarBS bs(kPiC / 2, 1.0, 8.0, 600);
  std::optional<double> e_bs = bs.bound_state_energy();
  if (!e_bs) return {false, "integral-operator route found no bound state"};
  double t_bs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  t0 = std::chrono::steady_clock::now();
  DiscretizedGraph g =
      discretize(Star{{kPiC / 2}, {8.0, 8.0}}, 1.0, Resolution::by_spacing(0.003));
  LambdaSystem sys(g);
  Spectrum sp = find_eigenvalues(sys, 0.5 * (1.0 + 1e-6), 0.56, 12, 1e-10);
  double t_core = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sp.levels.size() != 1)
    return {false, str("matrix route found %zu levels in the window, expected 1",
                       sp.levels.size())};
  double e_core = sp.levels.front().energy;
  double dev = rel_dev(e_core, *e_bs);
  bool pass = dev <= kDualRouteRel;
  return {pass, str("integral route %.9f (%.1f s, 600 nodes/arm) vs matrix route %.9f "
                    "(%.1f s, %ld points), rel diff %.4f%% (tol %.0f%%)",
                    *e_bs, t_bs, e_core, t_core, (long)sys.size(), 100.0 * dev,
                    100.0 * kDualRouteRel)};
}

// ---- 9: periodic chain, coupling vs subdivision count -------------------------

Outcome criterion9() {
  const double kappa = 0.5, l0 = 1.0;
  const int ns[] = {1, 2, 4, 8};
  double alphas[4];
  std::ostringstream out;
  out << "alpha(n):";
  for (int i = 0; i < 4; ++i) {
    // the defining equation is affine in alpha; invert it through two samples
    double r0 = polymer_residual(0.0, ns[i], l0, kappa);
    double r1 = polymer_residual(1.0, ns[i], l0, kappa);
    double alpha = -r0 / (r1 - r0);
    double res = std::abs(polymer_residual(alpha, ns[i], l0, kappa));
    if (res > kPolymerResidual)
      return {false, str("n=%d: defining-equation residual %.2e", ns[i], res)};
    alphas[i] = alpha;
    out << str(" %.8f", alpha);
  }
  // least-squares line alpha ~ a*n + b; curvature = max residual / span
  double sn = 0, sa = 0, snn = 0, sna = 0;
  for (int i = 0; i < 4; ++i) {
    sn += ns[i];
    sa += alphas[i];
    snn += (double)ns[i] * ns[i];
    sna += ns[i] * alphas[i];
  }
  double slope = (4 * sna - sn * sa) / (4 * snn - sn * sn);
  double icept = (sa - slope * sn) / 4;
  double max_resid = 0.0;
  for (int i = 0; i < 4; ++i)
    max_resid = std::max(max_resid, std::abs(alphas[i] - slope * ns[i] - icept));
  double curve = max_resid / (alphas[3] - alphas[0]);
  bool pass = curve <= kPolymerCurveRel;
  out << str("; line fit slope %.4f, relative curvature %.2e (tol %.0e)", slope, curve,
             kPolymerCurveRel);

  double kappa_back = polymer_threshold(alphas[1], 2, l0);
  if (std::abs(kappa_back - kappa) > kPolymerInvert) {
    pass = false;
    out << str("; threshold round trip off by %.2e", std::abs(kappa_back - kappa));
  }
  return {pass, out.str()};
}

// ---- 10: gap trends of resonant geometries ------------------------------------

// Overlap of a nondegenerate null direction with its own y -> -y mirror image:
// near +-1 for definite-parity states, 0 when unresolved (degenerate level or
// point set not mirror-symmetric).
double mirror_parity(const LambdaSystem& sys, double energy) {
  Eigen::MatrixXd v;
  try {
    v = null_vector(sys, energy);
  } catch (...) {
    return 0.0;
  }
  if (v.cols() != 1) return 0.0;
  const auto& p = sys.graph.points;
  Eigen::Index n = p.rows();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index jb = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double dx = p(j, 0) - p(i, 0), dy = p(j, 1) + p(i, 1);
      double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        jb = j;
      }
    }
    if (best > 1e-16) return 0.0;
    s += v(jb, 0) * v(i, 0);
  }
  return s;
}

struct LoopTrend {
  int n_minima = 0, n_plateaus = 0, n_same = 0;
  double min_same_gap = std::numeric_limits<double>::infinity();
};

// Sweep the leg length of a nearly closed loop with mouth width delta, then
// split the gap minima into same-parity (avoided crossing) and opposite-parity
// (plain crossing) using the mirror symmetry of the geometry.
LoopTrend loop_trend(double delta, bool classify) {
  double phi = calibrate_gap_angle(10.0, 2.2, delta);
  auto family = [phi](double L) { return GraphSpec(NearLoop{10.0, phi, 2.2, L}); };
  std::vector<double> grid = linear_grid(2.1, 0.6, 25);
  SolverSettings s;
  s.kappa_min = 0.13;
  s.kappa_max = 0.425;
  s.scan_points = 60;
  Resolution res = Resolution::by_spacing(0.3);
  SweepResult sr = sweep("leg_length", family, grid, 1.0, res, s);
  GapReport gr = gap_report(sr, 1e-4);

  LoopTrend t;
  t.n_minima = (int)gr.minima.size();
  t.n_plateaus = (int)gr.plateaus.size();
  if (!classify) return t;

  std::map<double, LambdaSystem> systems;
  for (const auto& m : gr.minima) {  // ascending in gap
    const SweepRow* row = nullptr;
    for (const auto& r : sr.rows)
      if (r.param == m.param) row = &r;
    if (!row || !row->ok) continue;
    auto it = systems.find(m.param);
    if (it == systems.end()) {
      DiscretizedGraph g = discretize(family(m.param), 1.0, res);
      it = systems.emplace(m.param, LambdaSystem(std::move(g))).first;
    }
    std::vector<int> level_of;
    for (int li = 0; li < (int)row->levels.size(); ++li)
      for (int k = 0; k < row->levels[li].multiplicity; ++k) level_of.push_back(li);
    if (m.pair_index + 1 >= (int)level_of.size()) continue;
    int l0 = level_of[m.pair_index], l1 = level_of[m.pair_index + 1];
    if (l0 == l1) continue;  // exactly degenerate pair: a crossing, not avoided
    double s0 = mirror_parity(it->second, row->levels[l0].energy);
    double s1 = mirror_parity(it->second, row->levels[l1].energy);
    if (s0 * s1 > 0.25) {
      ++t.n_same;
      t.min_same_gap = std::min(t.min_same_gap, m.gap);
    }
  }
  return t;
}

struct ZTrend {
  int n_minima = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  double min_adjacent = std::numeric_limits<double>::infinity();
};

ZTrend z_trend(double bend) {
  auto family = [bend](double L) { return GraphSpec(ZLine{10.0, bend, L}); };
  std::vector<double> grid = linear_grid(10.0, 0.6, 21);
  SolverSettings s;
  s.kappa_min = 1.48;
  s.kappa_max = 2.52;
  s.scan_points = 48;
  SweepResult sr = sweep("arm_length", family, grid, 5.0, Resolution::by_spacing(0.1), s);
  GapReport gr = gap_report(sr, default_slope_threshold(5.0));
  ZTrend t;
  t.n_minima = (int)gr.minima.size();
  if (!gr.minima.empty()) t.min_gap = gr.minima.front().gap;
  for (const auto& row : sr.rows) {
    if (!row.ok) continue;
    std::vector<double> es = row.energies();
    for (std::size_t i = 1; i < es.size(); ++i)
      t.min_adjacent = std::min(t.min_adjacent, es[i] - es[i - 1]);
  }
  return t;
}

Outcome criterion10() {
  std::ostringstream out;
  bool pass = true;

  // (a) nearly closed loop: narrow mouths show flat stretches and avoided
  // crossings; both fade as the mouth opens, and the smallest avoided gap
  // widens with the mouth
  LoopTrend t19 = loop_trend(1.9, true);
  LoopTrend t29 = loop_trend(2.9, true);
  LoopTrend t52 = loop_trend(5.2, false);
  out << str("loop minima/plateaus/avoided: delta=1.9: %d/%d/%d, delta=2.9: %d/%d/%d, "
             "delta=5.2: %d/%d/-;",
             t19.n_minima, t19.n_plateaus, t19.n_same, t29.n_minima, t29.n_plateaus,
             t29.n_same, t52.n_minima, t52.n_plateaus);
  if (t19.n_plateaus < 1 || t19.n_same < 1 || t29.n_plateaus < 1 || t29.n_same < 1) {
    pass = false;
    out << " narrow mouths must show plateaus and avoided crossings;";
  }
  if (!(t19.min_same_gap < t29.min_same_gap)) {
    pass = false;
    out << " smallest avoided gap fails to widen with the mouth;";
  } else {
    out << str(" avoided gap widens %.3g -> %.3g;", t19.min_same_gap, t29.min_same_gap);
  }
  if (t52.n_plateaus != 0) {
    pass = false;
    out << " wide mouth still shows plateaus;";
  }

  // (b) symmetric two-arm star on a sharp angle: never two levels below the
  // straight-line threshold, so no gap minimum between two genuine bound states
  {
    auto family = [](double L) { return GraphSpec(Star{{kPiC / 4}, {L, L}}); };
    std::vector<double> grid = linear_grid(2.0, 0.4, 31);
    SolverSettings s;
    s.kappa_min = 0.05;
    s.kappa_max = 1.2;
    s.scan_points = 60;
    SweepResult sr = sweep("arm_length", family, grid, 1.0, Resolution::by_spacing(0.1), s);
    GapReport gr = gap_report(sr, 1e-3);
    double th = line_threshold(1.0);
    int deep_minima = 0;
    for (const auto& m : gr.minima) {
      for (const auto& row : sr.rows) {
        if (row.param != m.param || !row.ok) continue;
        std::vector<double> es = row.energies();
        if (m.pair_index + 1 < (int)es.size() && es[m.pair_index] < th &&
            es[m.pair_index + 1] < th)
          ++deep_minima;
      }
    }
    int worst_below = 0;
    for (const auto& row : sr.rows) {
      if (!row.ok) continue;
      int below = 0;
      for (double e : row.energies())
        if (e < th) ++below;
      worst_below = std::max(worst_below, below);
    }
    if (deep_minima != 0 || worst_below > 1) {
      pass = false;
      out << str(" sharp star shows %d double-deep minima / %d levels below threshold;",
                 deep_minima, worst_below);
    } else {
      out << str(" sharp star: at most %d level below threshold, no double-deep "
                 "minimum;",
                 worst_below);
    }
  }

  // (c) bent three-segment line: gap minima sharpen as the bend leaves the
  // straight configuration, and disappear on the straight line itself
  {
    ZTrend t032 = z_trend(0.32 * kPiC);
    ZTrend tp2 = z_trend(kPiC / 2);
    ZTrend tp = z_trend(kPiC);
    out << str(" zigzag minima %d/%d/%d, min gap %.3g vs %.3g", t032.n_minima, tp2.n_minima,
               tp.n_minima, t032.min_gap, tp2.min_gap);
    if (t032.n_minima < 1 || tp2.n_minima < 1) {
      pass = false;
      out << "; bent lines must show gap minima";
    }
    if (!(t032.min_gap < 0.5 * tp2.min_gap)) {
      pass = false;
      out << "; sharper bend fails to narrow the smallest gap";
    }
    if (tp.n_minima != 0 || !(tp.min_adjacent < 0.02)) {
      pass = false;
      out << str("; straight line: %d minima, min adjacent gap %.3g", tp.n_minima,
                 tp.min_adjacent);
    } else {
      out << str("; straight line keeps %.3g-close levels with no minimum",
                 tp.min_adjacent);
    }
  }
  return {pass, out.str()};
}

// ---- 11: structural invariances ------------------------------------------------

Outcome criterion11() {
  std::ostringstream out;
  bool pass = true;

  DiscretizedGraph g = discretize(Star{{1.1}, {4.0, 6.0}}, 1.0, Resolution::by_spacing(0.1));
  LambdaSystem sys(g);
  const Eigen::Index n = sys.size();

  // (a) matrix family: exact symmetry and the defining entry formulas
  double entry_dev = 0.0, sym_dev = 0.0;
  for (double kappa : {0.1, 0.7, 1.3}) {
    Eigen::MatrixXd m = assemble_lambda(sys, kappa);
    sym_dev = std::max(sym_dev, (m - m.transpose()).cwiseAbs().maxCoeff());
    double diag = (2.0 * kPiC * (double)n * g.alpha + std::log(kappa / 2.0) + euler_gamma) /
                  (2.0 * kPiC);
    for (Eigen::Index i = 0; i < n; ++i) {
      entry_dev = std::max(entry_dev, std::abs(m(i, i) - diag) / std::abs(diag));
      for (Eigen::Index j = i + 1; j < n; ++j) {
        double want = -bessel_k0(kappa * sys.distances(i, j)) / (2.0 * kPiC);
        entry_dev =
            std::max(entry_dev, std::abs(m(i, j) - want) / std::max(1.0, std::abs(want)));
      }
    }
  }
  if (sym_dev != 0.0 || entry_dev > kAssembleRel) {
    pass = false;
    out << str("matrix symmetry/entry check fails (%.2e / %.2e);", sym_dev, entry_dev);
  } else {
    out << str("matrix entries match the defining formulas to %.0e;", kAssembleRel);
  }

  // (b) rigid motions leave the spectrum unchanged
  Spectrum sa = find_eigenvalues(sys, 0.30, 0.90, 60, 1e-12);
  LambdaSystem sys2(transform(g, 1.234, Eigen::Vector2d(-3.0, 7.5)));
  Spectrum sb = find_eigenvalues(sys2, 0.30, 0.90, 60, 1e-12);
  if (sa.levels.empty() || sa.levels.size() != sb.levels.size()) {
    pass = false;
    out << str(" rigid motion changes the level count (%zu vs %zu);", sa.levels.size(),
               sb.levels.size());
  } else {
    double dev = 0.0;
    for (std::size_t i = 0; i < sa.levels.size(); ++i)
      dev = std::max(dev, rel_dev(sb.levels[i].energy, sa.levels[i].energy));
    if (dev > kEuclideanRel) pass = false;
    out << str(" rigid-motion dev %.2e (tol %.0e, %zu levels);", dev, kEuclideanRel,
               sa.levels.size());
  }

  // (c) scaling covariance: E(s*Y, alpha + ln(s)/(2*pi*N)) = E(Y, alpha)/s^2
  LambdaSystem ring(discretize(Ring{10.0, 0.0}, 1.0, Resolution::by_count(150)));
  for (double s : {2.0, 0.5}) {
    ScaleCheckReport rep = scaled_spectrum_check(ring, s, 0.25, 0.55, 40, 1e-10);
    if (rep.levels_compared < 3 || rep.max_rel_mismatch > kScalingRel) {
      pass = false;
      out << str(" scaling s=%.1f mismatch %.2e over %d levels;", s, rep.max_rel_mismatch,
                 rep.levels_compared);
    } else {
      out << str(" scaling s=%.1f ok to %.1e (%d levels);", s, rep.max_rel_mismatch,
                 rep.levels_compared);
    }
  }

  // (d) full ring: every level above the lowest is doubly degenerate
  Spectrum rsp = find_eigenvalues(ring, 0.22, 0.55, 60, 1e-10);
  bool degen_ok = rsp.levels.size() >= 4 && rsp.levels.front().multiplicity == 1;
  for (std::size_t i = 1; i < rsp.levels.size(); ++i)
    if (rsp.levels[i].multiplicity != 2) degen_ok = false;
  if (!degen_ok) {
    pass = false;
    out << " ring degeneracy pattern wrong;";
  } else {
    out << str(" ring degeneracies 1/2/.../2 over %zu levels;", rsp.levels.size());
  }

  // (e) one-point system: the invertibility margin equals alpha exactly
  LambdaSystem one(single_center(0.25));
  double margin = schur_margin(one, 0.7);
  if (std::abs(margin - 0.25) > kMarginAbs) {
    pass = false;
    out << str(" one-point margin %.17g != 0.25", margin);
  } else {
    out << " one-point margin identity exact";
  }
  return {pass, out.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only.push_back(std::atoi(argv[++i]));
    } else if (a.rfind("--only=", 0) == 0) {
      only.push_back(std::atoi(a.c_str() + 7));
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N]...\n");
      return 2;
    }
  }

  struct Entry {
    int id;
    const char* label;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, "single-center closed form", criterion1},
      {2, "ring spectrum, gamma=0.5", criterion2},
      {3, "ring spectrum, gamma=1", criterion3},
      {4, "ring convergence rate", criterion4},
      {5, "open ring, sixth state", criterion5},
      {6, "star vs bending angle", criterion6},
      {7, "four-arm cross limit", criterion7},
      {8, "dual-route star ground state", criterion8},
      {9, "polymer coupling linearity", criterion9},
      {10, "resonance gap trends", criterion10},
      {11, "invariance suite", criterion11},
  };

  int failures = 0, ran = 0;
  for (const auto& e : entries) {
    if (!only.empty() && std::find(only.begin(), only.end(), e.id) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("%s criterion %2d (%s): %s\n", o.pass ? "PASS" : "FAIL", e.id, e.label,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criteria matched the --only selection\n");
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
