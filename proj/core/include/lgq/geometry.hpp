#pragma once

#include <Eigen/Core>
#include <string>
#include <variant>
#include <vector>

namespace lgq {

// Circle of radius R with an arc of angle cut_angle removed (cut_angle = 0:
// full ring; cut_angle > 0: open arc of length R*(2*pi - cut_angle)).
struct Ring {
  double radius = 1.0;
  double cut_angle = 0.0;  // radians in [0, 2*pi)
};

// N straight arms from a common vertex; angles[j] is the angle between arm j
// and arm j+1 (N-1 values); the last sector 2*pi - sum(angles) must be > 0.
struct Star {
  std::vector<double> angles;       // N-1 inter-arm angles, each > 0
  std::vector<double> arm_lengths;  // N arm lengths
};

// Three segments: middle of length mid_length, two arms of length arm_length
// attached at its ends at bend_angle to the middle (point-symmetric, so the
// arms are parallel). bend_angle = pi degenerates to a straight line.
struct ZLine {
  double mid_length = 1.0;
  double bend_angle = 1.5707963267948966;
  double arm_length = 1.0;
};

// Nearly closed loop: main circular arc of radius R spanning 2*pi - gap_angle,
// an outward circular flare of the same radius and angle flare_angle at each
// end, then straight tangent legs of length leg_length. The mouth width is
// computed by bottleneck(), not prescribed.
struct NearLoop {
  double radius = 1.0;
  double gap_angle = 1.0;    // radians in (0, 2*pi)
  double flare_angle = 0.0;  // radians >= 0
  double leg_length = 1.0;
};

using GraphSpec = std::variant<Ring, Star, ZLine, NearLoop>;

// Discretization request: either a point count (total for Ring, per arm for
// Star, total target for ZLine/NearLoop) or a target arc-length spacing.
struct Resolution {
  enum class Kind { count, spacing } kind = Kind::spacing;
  int count = 0;
  double spacing = 0.0;
  static Resolution by_count(int n) { return {Kind::count, n, 0.0}; }
  static Resolution by_spacing(double h) { return {Kind::spacing, 0, h}; }
};

struct DiscretizedGraph {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;  // one row per point of Y
  double total_length = 0.0;
  double alpha = 0.0;  // 1/(gamma * total_length)
  double gamma = 0.0;
  double spacing = 0.0;  // nominal arc-length gap between neighbors
  // true when the graph approximates a system with infinite (cut-off) edges,
  // so levels above -gamma^2/4 are continuum artifacts rather than bound states
  bool has_cutoff_edges = false;
};

// Place points along the graph with equal arc-length gaps per edge, one point
// at each junction (Star: single shared vertex point; Ring cut_angle > 0:
// midpoint placement on the support arc). alpha = 1/(gamma * total_length).
// Throws std::invalid_argument on invalid specs, zero-length support, spacing
// larger than the shortest edge, or self-intersecting NearLoop parameters.
DiscretizedGraph discretize(const GraphSpec& spec, double gamma, const Resolution& res);

// Mouth width: minimum distance between the two open ends of the loop region
// (the flare curves; with flare_angle = 0 this is the chord between the arc
// ends). Strictly increasing in gap_angle.
double bottleneck(const NearLoop& spec);

// Find gap_angle such that bottleneck == delta_target at fixed radius and
// flare_angle, by bisection to 1e-10.
double calibrate_gap_angle(double radius, double flare_angle, double delta_target);

// Rigid motion of the point set; coupling and spacing metadata unchanged.
DiscretizedGraph transform(const DiscretizedGraph& g, double rotation,
                           const Eigen::Vector2d& translation);

// JSON round-trip for GraphSpec ({"type": ..., numeric fields}) and CSV export
// of the point set (rows "x,y").
std::string graph_spec_to_json(const GraphSpec& spec);
GraphSpec graph_spec_from_json(const std::string& text);
std::string points_to_csv(const DiscretizedGraph& g);

}  // namespace lgq
