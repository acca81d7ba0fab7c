#include "fieldnav/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fieldnav/errors.hpp"

namespace fieldnav {

bool check_arrival(const Configuration& state, const Configuration& target, double applied_v,
                   const RobotLimits& limits) {
  return state.distance_to(target) <= limits.goal_pos_tol && std::fabs(applied_v) <= kStopSpeed;
}

ControlInput fallback_policy(NlpStatus /*last_status*/, const ControlInput& prev_u,
                             const RobotLimits& limits) {
  double w = prev_u.omega;
  if (w > 0.0) {
    w = std::max(0.0, w - limits.domega_max);
  } else {
    w = std::min(0.0, w + limits.domega_max);
  }
  // Never brake v below what the minimum-turn constraint allows for w.
  double v = std::max(prev_u.v - limits.dv_max, limits.r_min * std::fabs(w));
  v = std::max(v, 0.0);
  return {v, w};
}

MissionLog run_mission(const Tour& tour, const std::vector<ReferencePath>& segments,
                       const OcpParams& params, double sim_dt, long max_steps) {
  params.validate();
  if (std::fabs(sim_dt - params.dt) > 1e-12) {
    throw ValidationError("simulation step must equal the controller step");
  }
  const std::size_t expected = tour.closed ? tour.configurations.size()
                                           : (tour.configurations.empty()
                                                  ? 0
                                                  : tour.configurations.size() - 1);
  if (segments.empty() || (!tour.configurations.empty() && segments.size() != expected)) {
    throw ValidationError("segments do not match the tour");
  }

  const RobotLimits& lim = params.limits;
  MissionLog log;
  for (const auto& seg : segments) log.reference_length += seg.total_length;

  Configuration state = segments.front().samples.front();
  ControlInput prev_u{0.0, 0.0};
  double t = 0.0;
  long total_steps = 0;

  long derived_cap = 0;
  for (const auto& seg : segments) {
    derived_cap += std::max<long>(
        500, static_cast<long>(std::ceil(20.0 * seg.total_length / (lim.v_max * params.dt))));
  }
  if (max_steps <= 0) max_steps = derived_cap;

  for (std::size_t si = 0; si < segments.size(); ++si) {
    const ReferencePath& segment = segments[si];
    const Configuration target = segment.samples.back();
    const long seg_cap = std::max<long>(
        500, static_cast<long>(std::ceil(20.0 * segment.total_length / (lim.v_max * params.dt))));

    OcpSolution warm;
    bool have_warm = false;
    int fail_streak = 0;
    long seg_steps = 0;
    bool arrived = false;

    while (true) {
      if (check_arrival(state, target, prev_u.v, lim)) {
        log.waypoints.push_back({static_cast<int>(si), t, state.distance_to(target),
                                 std::fabs(wrap_to_pi(state.theta - target.theta))});
        arrived = true;
        break;
      }
      if (seg_steps >= seg_cap || total_steps >= max_steps) {
        log.failure = MissionFailure::StepCap;
        log.failed_segment = static_cast<int>(si);
        break;
      }

      const auto t0 = std::chrono::steady_clock::now();
      auto [u, sol] = control_step(state, segment, prev_u, params,
                                   have_warm ? &warm : nullptr);
      const std::chrono::duration<double, std::milli> elapsed =
          std::chrono::steady_clock::now() - t0;

      log.total_solver_iterations += sol.iterations;
      if (sol.status != NlpStatus::Converged) {
        if (sol.status == NlpStatus::Infeasible) {
          ++log.infeasible_solves;
        } else {
          ++log.max_iteration_solves;
        }
        ++fail_streak;
        if (fail_streak >= 3) {
          log.failure = MissionFailure::Infeasible;
          log.failed_segment = static_cast<int>(si);
          break;
        }
        u = fallback_policy(sol.status, prev_u, lim);
        have_warm = false;
      } else {
        fail_streak = 0;
        warm = sol;
        have_warm = true;
      }

      const Configuration next = rk4_step(state, u, params.dt);
      log.closed_loop_length += state.distance_to(next);
      state = next;
      t += params.dt;
      ++seg_steps;
      ++total_steps;
      if (u.v + 1e-6 < lim.r_min * std::fabs(u.omega)) ++log.min_turn_violations;
      log.steps.push_back({t, state, u, sol.s_bar, sol.status, sol.iterations, elapsed.count()});
      prev_u = u;
    }

    if (!arrived) return log;
  }

  log.success = true;
  return log;
}

}  // namespace fieldnav
