#pragma once

#include <array>

#include "fieldnav/geometry.hpp"

namespace fieldnav {

struct ControlInput {
  double v = 0.0;      // linear velocity, m/s
  double omega = 0.0;  // angular velocity, rad/s
};

// Actuator and mission limits shared by the controller and the simulator.
// Defaults follow the reference robot: forward-only drive, 0.5 m/s,
// 1.9 rad/s, 0.5 m minimum turning radius, input rate bounds u_max/n.
struct RobotLimits {
  double v_min = 0.0;
  double v_max = 0.5;
  double omega_max = 1.9;
  double dv_max = 0.1;      // per-step rate bound on v
  double domega_max = 0.38;  // per-step rate bound on omega
  double r_min = 0.5;
  double goal_pos_tol = 0.05;
  double goal_heading_tol = 0.2;
  double footprint_radius = 0.1;

  void validate() const;

  static RobotLimits with_rate_divisor(double v_max, double omega_max, double divisor);
};

// Differential-drive kinematics: returns (dx, dy, dtheta).
std::array<double, 3> dynamics(const Configuration& state, const ControlInput& u);

// Classic RK4 step of the kinematics under a zero-order-hold input.
// The resulting heading is normalized into (-pi, pi].
Configuration rk4_step(const Configuration& state, const ControlInput& u, double dt);

}  // namespace fieldnav
