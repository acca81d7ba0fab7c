#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace fieldnav {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Wraps an angle into (-pi, pi].
double wrap_to_pi(double angle);

// Wraps an angle into [0, 2*pi).
double wrap_to_2pi(double angle);

// A planar pose (x, y, heading). Heading is kept normalized in (-pi, pi].
struct Configuration {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Configuration() = default;
  Configuration(double x_, double y_, double theta_);

  double distance_to(const Configuration& other) const;
};

enum class DubinsWord { LSL, RSR, LSR, RSL, RLR, LRL };

const char* to_string(DubinsWord word);

// A shortest bounded-curvature curve between two oriented poses: three
// segments (arc/straight/arc or arc/arc/arc) identified by `word`, with
// per-segment lengths in meters.
struct DubinsPath {
  DubinsWord word = DubinsWord::LSL;
  std::array<double, 3> seg_lengths{0.0, 0.0, 0.0};
  double rho = 1.0;
  Configuration start;
  Configuration end;

  double length() const { return seg_lengths[0] + seg_lengths[1] + seg_lengths[2]; }

  // Pose after traveling `arclength` meters along the path from `start`.
  Configuration point_at(double arclength) const;
};

// A densely sampled path segment, parameterized by normalized arc length
// s in [0, 1]. Samples sit at fixed arc-length spacing along the source
// curve; the final sample is the exact segment endpoint.
struct ReferencePath {
  std::vector<Configuration> samples;
  std::vector<double> cumulative_arclength;
  double total_length = 0.0;

  // Pose at normalized position s via linear interpolation of (x, y) and
  // shortest-arc interpolation of theta. Throws OutOfDomain for s outside [0,1].
  Configuration at(double s) const;

  // Same as at(), plus d(x,y,theta)/ds of the active interval (one-sided at
  // sample knots).
  void at_with_derivative(double s, Configuration& pose, std::array<double, 3>& dds) const;
};

// Minimum-length Dubins curve from q_from to q_to with turning radius rho.
// Ties between equal-length words resolve to the first word in the order
// LSL, RSR, LSR, RSL, RLR, LRL. Identical poses yield a zero-length path.
DubinsPath dubins_shortest(const Configuration& q_from, const Configuration& q_to, double rho);

// Samples `path` at arc-length increments of `step` (meters), always
// including the exact endpoint as the final sample.
ReferencePath dubins_sample(const DubinsPath& path, double step);

// Samples one straight line segment between two positions; heading along the
// segment. Used for curvature-free (Euclidean) reference paths.
ReferencePath straight_sample(double x0, double y0, double x1, double y1, double step);

// One ReferencePath per tour leg. Consecutive paths must share endpoint
// configurations within 1e-6 (position and wrapped heading), else
// DiscontinuousTour is thrown.
std::vector<ReferencePath> concatenate(const std::vector<DubinsPath>& paths, double step);

}  // namespace fieldnav
