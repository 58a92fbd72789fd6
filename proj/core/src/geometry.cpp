#include "lgq/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lgq {
namespace {

using json = nlohmann::json;
constexpr double pi = std::numbers::pi;

Eigen::Vector2d rot_vec(double a, const Eigen::Vector2d& v) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

int edge_count(double len, double h) { return std::max(1, (int)std::llround(len / h)); }

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double total_length_of(const GraphSpec& spec) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ring>) {
          return s.radius * (2.0 * pi - s.cut_angle);
        } else if constexpr (std::is_same_v<T, Star>) {
          double tot = 0.0;
          for (double L : s.arm_lengths) tot += L;
          return tot;
        } else if constexpr (std::is_same_v<T, ZLine>) {
          return s.mid_length + 2.0 * s.arm_length;
        } else {
          return s.radius * (2.0 * pi - s.gap_angle) + 2.0 * s.radius * s.flare_angle +
                 2.0 * s.leg_length;
        }
      },
      spec);
}

double shortest_edge_of(const GraphSpec& spec) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ring>) {
          return s.radius * (2.0 * pi - s.cut_angle);
        } else if constexpr (std::is_same_v<T, Star>) {
          double m = s.arm_lengths.empty() ? 0.0 : s.arm_lengths[0];
          for (double L : s.arm_lengths) m = std::min(m, L);
          return m;
        } else if constexpr (std::is_same_v<T, ZLine>) {
          return std::min(s.mid_length, s.arm_length);
        } else {
          double m = std::min(s.radius * (2.0 * pi - s.gap_angle), s.leg_length);
          if (s.flare_angle > 0.0) m = std::min(m, s.radius * s.flare_angle);
          return m;
        }
      },
      spec);
}

void validate_spec(const GraphSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ring>) {
          require(s.radius > 0.0, "Ring: radius must be > 0");
          require(s.cut_angle >= 0.0 && s.cut_angle < 2.0 * pi,
                  "Ring: cut_angle must be in [0, 2*pi)");
        } else if constexpr (std::is_same_v<T, Star>) {
          require(!s.arm_lengths.empty(), "Star: needs at least one arm");
          require(s.angles.size() + 1 == s.arm_lengths.size(),
                  "Star: needs exactly N-1 angles for N arms");
          double sum = 0.0;
          for (double b : s.angles) {
            require(b > 0.0, "Star: inter-arm angles must be > 0");
            sum += b;
          }
          require(sum < 2.0 * pi, "Star: angles must leave a positive last sector");
          for (double L : s.arm_lengths) require(L > 0.0, "Star: arm lengths must be > 0");
        } else if constexpr (std::is_same_v<T, ZLine>) {
          require(s.mid_length > 0.0 && s.arm_length > 0.0, "ZLine: lengths must be > 0");
          require(s.bend_angle > 0.0 && s.bend_angle <= pi,
                  "ZLine: bend_angle must be in (0, pi]");
        } else {
          require(s.radius > 0.0 && s.leg_length > 0.0, "NearLoop: lengths must be > 0");
          require(s.gap_angle > 0.0 && s.gap_angle < 2.0 * pi,
                  "NearLoop: gap_angle must be in (0, 2*pi)");
          require(s.flare_angle >= 0.0, "NearLoop: flare_angle must be >= 0");
          require(s.gap_angle / 2.0 + s.flare_angle <= pi,
                  "NearLoop: flare wraps beyond the half turn");
          // mouth must stay open
          require(bottleneck(s) > 0.0, "NearLoop: self-intersecting geometry");
          // legs that slope toward the mirror axis must not reach it
          const double a_end = s.gap_angle / 2.0 + s.flare_angle;
          const double ty = -std::cos(a_end);
          if (ty < 0.0) {
            const double y_tip =
                s.radius * (2.0 * std::sin(s.gap_angle / 2.0) - std::sin(a_end));
            require(y_tip + s.leg_length * ty > 0.0, "NearLoop: legs intersect each other");
          }
        }
      },
      spec);
}

}  // namespace

double bottleneck(const NearLoop& spec) {
  const double a0 = spec.gap_angle / 2.0;
  // mirror-pair distance 2*y(s) along the flare, y(s) = R(2 sin a0 - sin(a0+s)),
  // minimized at s = pi/2 - a0 when the flare wraps past it, else at the tip
  const double s_star = std::clamp(pi / 2.0 - a0, 0.0, spec.flare_angle);
  const double d = 2.0 * spec.radius * (2.0 * std::sin(a0) - std::sin(a0 + s_star));
  if (!(d > 0.0)) throw std::invalid_argument("NearLoop: self-intersecting geometry");
  return d;
}

double calibrate_gap_angle(double radius, double flare_angle, double delta_target) {
  require(radius > 0.0 && delta_target > 0.0, "calibrate_gap_angle: bad arguments");
  auto raw = [&](double phi) {
    const double a0 = phi / 2.0;
    const double s_star = std::clamp(pi / 2.0 - a0, 0.0, flare_angle);
    return 2.0 * radius * (2.0 * std::sin(a0) - std::sin(a0 + s_star));
  };
  double lo = 1e-4;
  const double hi0 = pi;
  while (lo < hi0 && raw(lo) >= delta_target) lo += pi / 512.0;
  require(lo < hi0, "calibrate_gap_angle: target below reachable range");
  require(raw(hi0) > delta_target, "calibrate_gap_angle: target above reachable range");
  double a = lo, b = hi0;
  while (b - a > 1e-10) {
    const double m = 0.5 * (a + b);
    (raw(m) < delta_target ? a : b) = m;
  }
  return 0.5 * (a + b);
}

DiscretizedGraph discretize(const GraphSpec& spec, double gamma, const Resolution& res) {
  require(gamma > 0.0, "discretize: gamma must be > 0");
  validate_spec(spec);
  const double total = total_length_of(spec);
  require(total > 0.0, "discretize: zero-length support");

  double h = 0.0;
  if (res.kind == Resolution::Kind::spacing) {
    require(res.spacing > 0.0, "discretize: spacing must be > 0");
    h = res.spacing;
  } else {
    require(res.count >= 1, "discretize: count must be >= 1");
  }

  std::vector<Eigen::Vector2d> pts;
  double nominal_spacing = 0.0;

  if (const Ring* r = std::get_if<Ring>(&spec)) {
    const int N = (res.kind == Resolution::Kind::count)
                      ? res.count
                      : edge_count(total, h);
    if (res.kind == Resolution::Kind::spacing)
      require(h <= total, "discretize: spacing larger than shortest edge");
    nominal_spacing = total / N;
    if (r->cut_angle == 0.0) {
      for (int j = 0; j < N; ++j) {
        const double phi = 2.0 * pi * j / N;
        pts.emplace_back(r->radius * std::cos(phi), r->radius * std::sin(phi));
      }
    } else {
      const double span = 2.0 * pi - r->cut_angle;
      for (int j = 1; j <= N; ++j) {
        const double phi = (j - 0.5) * span / N;
        pts.emplace_back(r->radius * std::cos(phi), r->radius * std::sin(phi));
      }
    }
  } else if (const Star* st = std::get_if<Star>(&spec)) {
    if (res.kind == Resolution::Kind::spacing)
      require(h <= shortest_edge_of(spec), "discretize: spacing larger than shortest edge");
    pts.emplace_back(0.0, 0.0);  // shared vertex point
    double theta = 0.0;
    for (size_t j = 0; j < st->arm_lengths.size(); ++j) {
      if (j > 0) theta += st->angles[j - 1];
      const double L = st->arm_lengths[j];
      const int n = (res.kind == Resolution::Kind::count) ? res.count : edge_count(L, h);
      const double hj = L / n;
      if (j == 0) nominal_spacing = hj;
      const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
      for (int i = 1; i <= n; ++i) pts.emplace_back(i * hj * dir);
    }
  } else if (const ZLine* z = std::get_if<ZLine>(&spec)) {
    if (res.kind == Resolution::Kind::count) h = total / res.count;
    require(h <= shortest_edge_of(spec), "discretize: spacing larger than shortest edge");
    const double R = z->mid_length, L = z->arm_length, th = z->bend_angle;
    const int nm = edge_count(R, h), na = edge_count(L, h);
    nominal_spacing = h;
    const Eigen::Vector2d A(0.0, 0.0), B(R, 0.0);
    for (int i = 0; i <= nm; ++i) pts.emplace_back(A + (B - A) * ((double)i / nm));
    const Eigen::Vector2d d1(std::cos(th), std::sin(th));
    for (int i = 1; i <= na; ++i) pts.emplace_back(A + (i * L / na) * d1);
    for (int i = 1; i <= na; ++i) pts.emplace_back(B - (i * L / na) * d1);
  } else {
    const NearLoop& nl = std::get<NearLoop>(spec);
    if (res.kind == Resolution::Kind::count) h = total / res.count;
    require(h <= shortest_edge_of(spec), "discretize: spacing larger than shortest edge");
    nominal_spacing = h;
    const double R = nl.radius, a0 = nl.gap_angle / 2.0, psi = nl.flare_angle;
    const double arc_len = R * (2.0 * pi - nl.gap_angle);
    const int n_arc = edge_count(arc_len, h);
    // main arc, gap centered on the +x axis; includes both flare junctions
    for (int i = 0; i <= n_arc; ++i) {
      const double phi = a0 + (2.0 * pi - nl.gap_angle) * i / n_arc;
      pts.emplace_back(R * std::cos(phi), R * std::sin(phi));
    }
    const Eigen::Vector2d B1(R * std::cos(a0), R * std::sin(a0));
    const Eigen::Vector2d B2(B1.x(), -B1.y());
    const Eigen::Vector2d C1 = 2.0 * B1, C2 = 2.0 * B2;
    Eigen::Vector2d end1 = B1, end2 = B2;
    if (psi > 0.0) {
      const int n_fl = edge_count(R * psi, h);
      for (int i = 1; i <= n_fl; ++i)
        pts.emplace_back(C1 + rot_vec(+i * psi / n_fl, B1 - C1));
      for (int i = 1; i <= n_fl; ++i)
        pts.emplace_back(C2 + rot_vec(-i * psi / n_fl, B2 - C2));
      end1 = C1 + rot_vec(+psi, B1 - C1);
      end2 = C2 + rot_vec(-psi, B2 - C2);
    }
    // tangent continuation at the flare tips (or arc ends when psi = 0)
    const double a_end = a0 + psi;
    const Eigen::Vector2d t1(std::sin(a_end), -std::cos(a_end));
    const Eigen::Vector2d t2(t1.x(), -t1.y());
    const int n_leg = edge_count(nl.leg_length, h);
    for (int i = 1; i <= n_leg; ++i) pts.emplace_back(end1 + (i * nl.leg_length / n_leg) * t1);
    for (int i = 1; i <= n_leg; ++i) pts.emplace_back(end2 + (i * nl.leg_length / n_leg) * t2);
  }

  DiscretizedGraph g;
  g.points.resize((Eigen::Index)pts.size(), 2);
  for (size_t i = 0; i < pts.size(); ++i) g.points.row((Eigen::Index)i) = pts[i].transpose();
  g.total_length = total;
  g.gamma = gamma;
  g.alpha = 1.0 / (gamma * total);
  g.spacing = nominal_spacing;
  g.has_cutoff_edges = !std::holds_alternative<Ring>(spec);
  return g;
}

DiscretizedGraph transform(const DiscretizedGraph& g, double rotation,
                           const Eigen::Vector2d& translation) {
  DiscretizedGraph out = g;
  const double c = std::cos(rotation), s = std::sin(rotation);
  for (Eigen::Index i = 0; i < g.points.rows(); ++i) {
    const double x = g.points(i, 0), y = g.points(i, 1);
    out.points(i, 0) = c * x - s * y + translation.x();
    out.points(i, 1) = s * x + c * y + translation.y();
  }
  return out;
}

std::string graph_spec_to_json(const GraphSpec& spec) {
  json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ring>) {
          j = {{"type", "ring"}, {"radius", s.radius}, {"cut_angle", s.cut_angle}};
        } else if constexpr (std::is_same_v<T, Star>) {
          j = {{"type", "star"}, {"angles", s.angles}, {"arm_lengths", s.arm_lengths}};
        } else if constexpr (std::is_same_v<T, ZLine>) {
          j = {{"type", "zline"},
               {"mid_length", s.mid_length},
               {"bend_angle", s.bend_angle},
               {"arm_length", s.arm_length}};
        } else {
          j = {{"type", "nearloop"},
               {"radius", s.radius},
               {"gap_angle", s.gap_angle},
               {"flare_angle", s.flare_angle},
               {"leg_length", s.leg_length}};
        }
      },
      spec);
  return j.dump();
}

GraphSpec graph_spec_from_json(const std::string& text) {
  const json j = json::parse(text);
  const std::string type = j.at("type").get<std::string>();
  if (type == "ring") return Ring{j.at("radius"), j.value("cut_angle", 0.0)};
  if (type == "star")
    return Star{j.at("angles").get<std::vector<double>>(),
                j.at("arm_lengths").get<std::vector<double>>()};
  if (type == "zline") return ZLine{j.at("mid_length"), j.at("bend_angle"), j.at("arm_length")};
  if (type == "nearloop")
    return NearLoop{j.at("radius"), j.at("gap_angle"), j.value("flare_angle", 0.0),
                    j.at("leg_length")};
  throw std::invalid_argument("graph_spec_from_json: unknown type '" + type + "'");
}

std::string points_to_csv(const DiscretizedGraph& g) {
  std::string out = "x,y\n";
  char buf[64];
  for (Eigen::Index i = 0; i < g.points.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", g.points(i, 0), g.points(i, 1));
    out += buf;
  }
  return out;
}

}  // namespace lgq
