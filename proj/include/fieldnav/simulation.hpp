#pragma once

#include <vector>

#include "fieldnav/geometry.hpp"
#include "fieldnav/nmpc.hpp"
#include "fieldnav/routing.hpp"
#include "fieldnav/vehicle.hpp"

namespace fieldnav {

// A mission counts as stopped at a waypoint only below this speed.
constexpr double kStopSpeed = 0.02;  // m/s

struct StepRecord {
  double t = 0.0;
  Configuration state;
  ControlInput u;
  double s_bar = 0.0;
  NlpStatus status = NlpStatus::Converged;
  int iterations = 0;
  double solve_ms = 0.0;
};

// One record per segment end, in traversal order.
struct WaypointRecord {
  int index = 0;
  double arrival_time = 0.0;
  double position_error = 0.0;
  double heading_error = 0.0;
};

enum class MissionFailure { None, StepCap, Infeasible };

struct MissionLog {
  std::vector<StepRecord> steps;
  std::vector<WaypointRecord> waypoints;
  double closed_loop_length = 0.0;
  double reference_length = 0.0;
  int min_turn_violations = 0;
  int infeasible_solves = 0;
  int max_iteration_solves = 0;
  long total_solver_iterations = 0;
  bool success = false;
  MissionFailure failure = MissionFailure::None;
  int failed_segment = -1;
};

// True iff the robot is inside the goal tolerance and effectively stopped.
bool check_arrival(const Configuration& state, const Configuration& target, double applied_v,
                   const RobotLimits& limits);

// Rate-feasible deceleration toward (0, 0) that keeps the minimum-turn
// constraint satisfied. Used when the OCP solve fails.
ControlInput fallback_policy(NlpStatus last_status, const ControlInput& prev_u,
                             const RobotLimits& limits);

// Closed-loop mission over the tour's reference segments: measure the exact
// simulated state, solve the OCP, apply the first input via RK4, advance to
// the next segment on arrival. The robot starts at the first segment's start
// pose with zero previous input. max_steps == 0 derives a cap from the
// per-segment limits.
MissionLog run_mission(const Tour& tour, const std::vector<ReferencePath>& segments,
                       const OcpParams& params, double sim_dt, long max_steps = 0);

}  // namespace fieldnav
