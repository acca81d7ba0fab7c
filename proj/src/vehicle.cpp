#include "fieldnav/vehicle.hpp"

#include <cmath>

#include "fieldnav/errors.hpp"

namespace fieldnav {

void RobotLimits::validate() const {
  if (!(v_max > 0.0) || !(omega_max > 0.0) || !(r_min > 0.0) || !(dv_max > 0.0) ||
      !(domega_max > 0.0) || !(goal_pos_tol > 0.0) || v_min < 0.0 || footprint_radius < 0.0) {
    throw SolverConfigError("robot limits must be positive (v_max, omega_max, r_min, rate "
                            "bounds, goal tolerance)");
  }
}

RobotLimits RobotLimits::with_rate_divisor(double v_max, double omega_max, double divisor) {
  if (!(divisor >= 1.0)) throw SolverConfigError("rate divisor must be >= 1");
  RobotLimits lim;
  lim.v_max = v_max;
  lim.omega_max = omega_max;
  lim.dv_max = v_max / divisor;
  lim.domega_max = omega_max / divisor;
  return lim;
}

std::array<double, 3> dynamics(const Configuration& state, const ControlInput& u) {
  return {u.v * std::cos(state.theta), u.v * std::sin(state.theta), u.omega};
}

Configuration rk4_step(const Configuration& state, const ControlInput& u, double dt) {
  // theta' = omega is state-independent, so the k-stages only differ in the
  // heading at which v is projected.
  auto f = [&u](double x, double y, double theta) {
    (void)x;
    (void)y;
    return std::array<double, 3>{u.v * std::cos(theta), u.v * std::sin(theta), u.omega};
  };
  const auto k1 = f(state.x, state.y, state.theta);
  const auto k2 = f(state.x + 0.5 * dt * k1[0], state.y + 0.5 * dt * k1[1],
                    state.theta + 0.5 * dt * k1[2]);
  const auto k3 = f(state.x + 0.5 * dt * k2[0], state.y + 0.5 * dt * k2[1],
                    state.theta + 0.5 * dt * k2[2]);
  const auto k4 = f(state.x + dt * k3[0], state.y + dt * k3[1], state.theta + dt * k3[2]);
  return {state.x + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
          state.y + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
          state.theta + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])};
}

}  // namespace fieldnav
