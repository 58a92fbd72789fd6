#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <lgq/geometry.hpp>
#include <lgq/spectral.hpp>
#include <lgq/sweeps.hpp>

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

using namespace lgq;

namespace {

SweepRow make_row(double param, const std::vector<double>& energies) {
  SweepRow r;
  r.param = param;
  r.ok = true;
  for (double e : energies) {
    SpectrumLevel l;
    l.energy = e;
    l.kappa = std::sqrt(-e);
    r.levels.push_back(l);
  }
  return r;
}

SweepRow failed_row(double param, const std::string& why) {
  SweepRow r;
  r.param = param;
  r.ok = false;
  r.error = why;
  return r;
}

SweepResult make_result(const std::vector<SweepRow>& rows) {
  SweepResult sr;
  sr.parameter = "t";
  sr.rows = rows;
  sr.gamma = 1.0;
  return sr;
}

}  // namespace

TEST_CASE("row energies expand multiplicities in order") {
  SweepRow r;
  r.ok = true;
  SpectrumLevel a;
  a.energy = -2.0;
  a.multiplicity = 2;
  SpectrumLevel b;
  b.energy = -1.0;
  r.levels = {a, b};
  auto e = r.energies();
  REQUIRE(e.size() == 3);
  CHECK(e[0] == -2.0);
  CHECK(e[1] == -2.0);
  CHECK(e[2] == -1.0);
}

TEST_CASE("sweep of a two-arm family evaluates every grid value independently") {
  auto family = [](double l) { return GraphSpec(Star{{1.5707963267948966}, {l, l}}); };
  std::vector<double> grid{2.0, 3.0, 4.0};
  SolverSettings s;
  s.kappa_min = 0.05;
  s.kappa_max = 0.45;
  s.scan_points = 40;
  SweepResult sr = sweep("arm_length", family, grid, 1.0, Resolution::by_spacing(1.0), s);
  CHECK(sr.parameter == "arm_length");
  CHECK(sr.gamma == 1.0);
  REQUIRE(sr.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(sr.rows[i].param == grid[i]);
    CHECK(sr.rows[i].ok);
    CHECK(!sr.rows[i].levels.empty());
    auto e = sr.rows[i].energies();
    for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] >= e[k - 1]);
  }
  // longer arms bind more strongly: ground state decreases along the grid
  CHECK(sr.rows[1].levels.front().energy < sr.rows[0].levels.front().energy);
  CHECK(sr.rows[2].levels.front().energy < sr.rows[1].levels.front().energy);
}

TEST_CASE("a row that cannot be discretized fails alone, not the sweep") {
  auto family = [](double l) { return GraphSpec(Star{{1.5707963267948966}, {l, l}}); };
  // spacing 1.0 exceeds the first arm length: that row alone reports an error
  std::vector<double> grid{0.25, 3.0, 4.0};
  SolverSettings s;
  s.kappa_min = 0.05;
  s.kappa_max = 0.45;
  s.scan_points = 40;
  SweepResult sr = sweep("arm_length", family, grid, 1.0, Resolution::by_spacing(1.0), s);
  REQUIRE(sr.rows.size() == 3);
  CHECK(!sr.rows[0].ok);
  CHECK(!sr.rows[0].error.empty());
  CHECK(sr.rows[0].levels.empty());
  CHECK(sr.rows[1].ok);
  CHECK(sr.rows[2].ok);
}

TEST_CASE("sweep rejects empty and non-monotone grids") {
  auto family = [](double l) { return GraphSpec(Star{{1.0}, {l, l}}); };
  SolverSettings s;
  CHECK_THROWS_AS(sweep("p", family, {}, 1.0, Resolution::by_spacing(1.0), s),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep("p", family, {1.0, 2.0, 1.5}, 1.0, Resolution::by_spacing(1.0), s),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep("p", family, {1.0, 1.0}, 1.0, Resolution::by_spacing(1.0), s),
                  std::invalid_argument);
}

TEST_CASE("csv pads ragged rows with NA and failed rows entirely") {
  SweepResult sr = make_result({make_row(0.0, {-1.0, -0.5}),
                                failed_row(1.0, "boom"),
                                make_row(2.0, {-1.1})});
  std::string csv = sweep_to_csv(sr);
  CHECK(csv ==
        "param,E_1,E_2\n"
        "0,-1,-0.5\n"
        "1,NA,NA\n"
        "2,-1.1000000000000001,NA\n");
}

TEST_CASE("csv column count follows multiplicity expansion") {
  SweepRow r;
  r.param = 5.0;
  r.ok = true;
  SpectrumLevel l;
  l.energy = -0.25;
  l.multiplicity = 3;
  r.levels = {l};
  std::string csv = sweep_to_csv(make_result({r}));
  CHECK(csv ==
        "param,E_1,E_2,E_3\n"
        "5,-0.25,-0.25,-0.25\n");
}

TEST_CASE("csv serialization is deterministic") {
  SweepResult sr = make_result({make_row(0.1, {-1.0 / 3.0}), make_row(0.2, {-2.0 / 3.0})});
  std::string a = sweep_to_csv(sr);
  std::string b = sweep_to_csv(sr);
  CHECK(a == b);
  CHECK(a.find("-0.33333333333333331") != std::string::npos);  // %.17g round trip
}

TEST_CASE("gap report finds an avoided crossing at the closest approach") {
  // two hyperbola branches: gap 2*sqrt(delta^2 + (t-5)^2 * 0.04), tightest at t=5
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 10; ++i) {
    double t = (double)i;
    double h = std::sqrt(0.0001 + 0.04 * (t - 5.0) * (t - 5.0));
    rows.push_back(make_row(t, {-2.0 - h, -2.0 + h}));
  }
  GapReport gr = gap_report(make_result(rows), 1e-9);
  REQUIRE(gr.minima.size() == 1);
  CHECK(gr.minima[0].param == 5.0);
  CHECK(gr.minima[0].pair_index == 0);
  CHECK(gr.minima[0].gap == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(gr.events.empty());
}

TEST_CASE("gap minima report the adjacent pair and sort ascending by gap") {
  // three curves; pair 0 pinches at t=2 (gap 0.1), pair 1 at t=4 (gap 0.05)
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 6; ++i) {
    double t = (double)i;
    double e0 = -3.0 - 0.05 * std::abs(t - 2.0);
    double e1 = -3.0 + 0.1 + 0.05 * std::abs(t - 2.0);
    double e2 = e1 + 0.05 + 0.2 * std::abs(t - 4.0);
    rows.push_back(make_row(t, {e0, e1, e2}));
  }
  GapReport gr = gap_report(make_result(rows), 1e-9);
  REQUIRE(gr.minima.size() == 2);
  CHECK(gr.minima[0].gap == doctest::Approx(0.05));
  CHECK(gr.minima[0].pair_index == 1);
  CHECK(gr.minima[0].param == 4.0);
  CHECK(gr.minima[1].gap == doctest::Approx(0.1));
  CHECK(gr.minima[1].pair_index == 0);
  CHECK(gr.minima[1].param == 2.0);
}

TEST_CASE("boundary touches are not minima; flat ties resolve leftward") {
  // gap decreases to the first grid point: no interior minimum exists
  std::vector<SweepRow> falling;
  for (int i = 0; i <= 4; ++i) {
    double t = (double)i;
    falling.push_back(make_row(t, {-2.0, -2.0 + 0.1 + 0.05 * t}));
  }
  CHECK(gap_report(make_result(falling), 1e9).minima.empty());

  // plateau of equal gaps: strict decrease required on the left only, so the
  // first node of the flat stretch is the one reported
  std::vector<SweepRow> flat;
  flat.push_back(make_row(0.0, {-2.0, -1.5}));
  flat.push_back(make_row(1.0, {-2.0, -1.9}));
  flat.push_back(make_row(2.0, {-2.0, -1.9}));
  flat.push_back(make_row(3.0, {-2.0, -1.5}));
  GapReport gr = gap_report(make_result(flat), 1e9);
  REQUIRE(gr.minima.size() == 1);
  CHECK(gr.minima[0].param == 1.0);
}

TEST_CASE("gaps across a failed row are skipped") {
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 6; ++i) {
    double t = (double)i;
    double h = 0.01 + 0.05 * std::abs(t - 3.0);
    rows.push_back(make_row(t, {-2.0 - h, -2.0 + h}));
  }
  rows[2] = failed_row(2.0, "solver died");  // neighbor of the minimum at t=3
  GapReport gr = gap_report(make_result(rows), 1e-9);
  CHECK(gr.minima.empty());  // t=3 needs both neighbors' gaps
}

TEST_CASE("gap report validates its inputs") {
  SweepResult two = make_result({make_row(0.0, {-1.0}), make_row(1.0, {-1.0})});
  CHECK_THROWS_AS(gap_report(two, 1e-3), std::invalid_argument);
  SweepResult three =
      make_result({make_row(0.0, {-1.0}), make_row(1.0, {-1.0}), make_row(2.0, {-1.0})});
  CHECK_THROWS_AS(gap_report(three, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gap_report(three, -1.0), std::invalid_argument);
}

TEST_CASE("plateau detection uses central slopes and extends to touched boundaries") {
  // flat until t=4, then rising at slope 0.5
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 10; ++i) {
    double t = (double)i;
    rows.push_back(make_row(t, {t <= 4.0 ? -1.0 : -1.0 + 0.5 * (t - 4.0)}));
  }
  GapReport gr = gap_report(make_result(rows), 0.1);
  REQUIRE(gr.plateaus.size() == 1);
  const PlateauSegment& p = gr.plateaus[0];
  CHECK(p.curve_index == 0);
  // run covers interior nodes t=1..3 (t=4 sees the rise via its right neighbor)
  // and the first interior node extends the segment to the grid edge
  CHECK(p.param_begin == 0.0);
  CHECK(p.param_end == 3.0);
  CHECK(p.slope_bound == 0.0);
}

TEST_CASE("a whole-range plateau spans the full grid") {
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 5; ++i)
    rows.push_back(make_row((double)i, {-1.0 + 1e-6 * (double)i}));
  GapReport gr = gap_report(make_result(rows), 1e-3);
  REQUIRE(gr.plateaus.size() == 1);
  CHECK(gr.plateaus[0].param_begin == 0.0);
  CHECK(gr.plateaus[0].param_end == 5.0);
  CHECK(gr.plateaus[0].slope_bound == doctest::Approx(1e-6).epsilon(1e-9));
}

TEST_CASE("steep stretches split plateaus per curve") {
  // curve 0: flat / step / flat -> two plateaus; curve 1: uniformly steep -> none
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 12; ++i) {
    double t = (double)i;
    double e0 = t < 6.0 ? -2.0 : -1.0;
    rows.push_back(make_row(t, {e0, -0.5 + 0.3 * t}));
  }
  GapReport gr = gap_report(make_result(rows), 0.05);
  REQUIRE(gr.plateaus.size() == 2);
  CHECK(gr.plateaus[0].curve_index == 0);
  CHECK(gr.plateaus[0].param_begin == 0.0);
  CHECK(gr.plateaus[0].param_end == 4.0);
  CHECK(gr.plateaus[1].curve_index == 0);
  CHECK(gr.plateaus[1].param_begin == 7.0);
  CHECK(gr.plateaus[1].param_end == 12.0);
}

TEST_CASE("birth and death events track sorted-curve counts") {
  // counts along the grid: 1, 1, 3, 3, 2
  std::vector<SweepRow> rows;
  rows.push_back(make_row(0.0, {-2.0}));
  rows.push_back(make_row(1.0, {-2.1}));
  rows.push_back(make_row(2.0, {-2.2, -1.5, -1.0}));
  rows.push_back(make_row(3.0, {-2.3, -1.6, -1.1}));
  rows.push_back(make_row(4.0, {-2.4, -1.7}));
  GapReport gr = gap_report(make_result(rows), 1e-9);
  REQUIRE(gr.events.size() == 3);
  CHECK(gr.events[0].param == 2.0);  // curves 1 and 2 appear entering t=2
  CHECK(gr.events[0].curve_index == 1);
  CHECK(gr.events[0].birth);
  CHECK(gr.events[1].param == 2.0);
  CHECK(gr.events[1].curve_index == 2);
  CHECK(gr.events[1].birth);
  CHECK(gr.events[2].param == 3.0);  // curve 2 last exists at t=3
  CHECK(gr.events[2].curve_index == 2);
  CHECK(!gr.events[2].birth);
}

TEST_CASE("events skip failed rows instead of reporting spurious deaths") {
  std::vector<SweepRow> rows;
  rows.push_back(make_row(0.0, {-2.0, -1.0}));
  rows.push_back(failed_row(1.0, "no convergence"));
  rows.push_back(make_row(2.0, {-2.0, -1.0}));
  GapReport gr = gap_report(make_result(rows), 1e-9);
  CHECK(gr.events.empty());
}

TEST_CASE("default slope threshold scales with the coupling squared") {
  CHECK(default_slope_threshold(1.0) == doctest::Approx(1e-3));
  CHECK(default_slope_threshold(2.0) == doctest::Approx(4e-3));
  CHECK(default_slope_threshold(0.5) == doctest::Approx(2.5e-4));
}

TEST_CASE("gap report serializes to json faithfully") {
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 10; ++i) {
    double t = (double)i;
    double h = std::sqrt(0.0001 + 0.04 * (t - 5.0) * (t - 5.0));
    rows.push_back(make_row(t, {-2.0 - h, -2.0 + h}));
  }
  rows.push_back(make_row(11.0, {-2.0 - 0.6, -2.0 + 0.6, -1.0}));
  GapReport gr = gap_report(make_result(rows), 0.05);
  nlohmann::json j = nlohmann::json::parse(gap_report_to_json(gr));
  CHECK(j.at("slope_threshold").get<double>() == 0.05);
  REQUIRE(j.at("minima").size() == gr.minima.size());
  REQUIRE(gr.minima.size() >= 1);
  CHECK(j.at("minima")[0].at("param").get<double>() == gr.minima[0].param);
  CHECK(j.at("minima")[0].at("gap").get<double>() == gr.minima[0].gap);
  CHECK(j.at("minima")[0].at("pair_index").get<int>() == gr.minima[0].pair_index);
  REQUIRE(j.at("plateaus").size() == gr.plateaus.size());
  for (std::size_t i = 0; i < gr.plateaus.size(); ++i) {
    CHECK(j.at("plateaus")[i].at("curve_index").get<int>() == gr.plateaus[i].curve_index);
    CHECK(j.at("plateaus")[i].at("param_begin").get<double>() == gr.plateaus[i].param_begin);
    CHECK(j.at("plateaus")[i].at("param_end").get<double>() == gr.plateaus[i].param_end);
    CHECK(j.at("plateaus")[i].at("slope_bound").get<double>() == gr.plateaus[i].slope_bound);
  }
  REQUIRE(j.at("events").size() == 1);
  CHECK(j.at("events")[0].at("param").get<double>() == 11.0);
  CHECK(j.at("events")[0].at("curve_index").get<int>() == 2);
  CHECK(j.at("events")[0].at("kind").get<std::string>() == "birth");
}

TEST_CASE("convergence fit recovers an exact power law") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {100.0, 200.0, 400.0, 800.0}) pts.emplace_back(n, 3.7 * std::pow(n, -0.7));
  ConvergenceFit fit = convergence_fit(pts);
  CHECK(fit.exponent == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.prefactor == doctest::Approx(3.7).epsilon(1e-12));
  CHECK(fit.residual < 1e-13);
}

TEST_CASE("convergence fit reports scatter around the law") {
  std::vector<std::pair<double, double>> pts = {
      {100.0, 1.0e-2}, {200.0, 6.3e-3}, {400.0, 3.6e-3}, {800.0, 2.3e-3}};
  ConvergenceFit fit = convergence_fit(pts);
  CHECK(fit.exponent > 0.0);
  CHECK(fit.exponent < 1.0);
  CHECK(fit.residual > 0.0);
  CHECK(fit.residual < 0.1);
}

TEST_CASE("convergence fit rejects unusable inputs") {
  CHECK_THROWS_AS(convergence_fit({{100.0, 1e-2}, {200.0, 5e-3}}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_fit({{100.0, 1e-2}, {200.0, 0.0}, {400.0, 1e-3}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_fit({{100.0, 1e-2}, {-200.0, 5e-3}, {400.0, 1e-3}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_fit({{100.0, 1e-2}, {100.0, 5e-3}, {100.0, 1e-3}}),
                  std::invalid_argument);
}
