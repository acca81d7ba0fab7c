#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fieldnav/geometry.hpp"
#include "fieldnav/nlp_solver.hpp"
#include "fieldnav/vehicle.hpp"

namespace fieldnav {

struct DiscObstacle {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
};

struct OcpParams {
  int horizon = 20;  // prediction steps
  double dt = 0.1;
  Eigen::Matrix3d Q = Eigen::Vector3d(0.1, 0.1, 0.01).asDiagonal();
  Eigen::Matrix2d R = Eigen::Vector2d(0.1, 1.0).asDiagonal();
  double q_s = 1e4;
  RobotLimits limits;
  std::vector<DiscObstacle> obstacles;
  int max_iterations = 200;

  void validate() const;
};

struct OcpSolution {
  std::vector<Configuration> states;  // horizon+1 entries, states[0] = measured state
  std::vector<ControlInput> inputs;   // horizon entries
  double s_bar = 1.0;                 // artificial-reference parameter
  double cost = 0.0;
  NlpStatus status = NlpStatus::MaxIterations;
  double kkt_residual = 0.0;
  int iterations = 0;
};

// Quartic tracking cost (e'Qe)^2 + (u'Ru)^2 with the heading error wrapped.
double stage_cost(const Configuration& x, const ControlInput& u, const Configuration& ref,
                  const Eigen::Matrix3d& Q, const Eigen::Matrix2d& R);

// q_s * (1 - s_bar)^2, driving the artificial reference to the segment end.
double offset_cost(double s_bar, double q_s);

// Direct multiple-shooting transcription over one reference segment.
//
// Decision vector: shooting states x(1..H), inputs u(0..H-1), and the path
// parameter s_bar. Equalities: RK4 shooting defects and the terminal
// constraint x(H) = p(s_bar). Inequalities: input boxes, input rate bounds
// (the k=0 rate is taken against the previously applied input), the
// minimum-turn-radius constraint v^2 >= r_min^2 omega^2, s_bar in [0,1], and
// one clearance constraint per disc obstacle and step.
class OcpNlp : public NlpProblem {
 public:
  OcpNlp(const Configuration& x0, ReferencePath segment, ControlInput prev_applied_u,
         OcpParams params);

  int num_vars() const override;
  int num_eq() const override;
  int num_ineq() const override;
  double objective(const Eigen::VectorXd& z) const override;
  void objective_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const override;
  void eq_constraints(const Eigen::VectorXd& z, Eigen::VectorXd& h) const override;
  void eq_jacobian(const Eigen::VectorXd& z, Eigen::MatrixXd& jac) const override;
  void ineq_constraints(const Eigen::VectorXd& z, Eigen::VectorXd& g) const override;
  void ineq_jacobian(const Eigen::VectorXd& z, Eigen::MatrixXd& jac) const override;
  void lagrangian_hessian(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
                          const Eigen::VectorXd& nu, Eigen::MatrixXd& hess) const override;

  Eigen::VectorXd cold_start() const;
  Eigen::VectorXd warm_start(const OcpSolution& previous) const;
  OcpSolution extract(const IpResult& result) const;

  const OcpParams& params() const { return params_; }
  const Configuration& initial_state() const { return x0_; }
  const ReferencePath& segment() const { return segment_; }

  int idx_state(int k) const { return 3 * (k - 1); }              // k in [1, H]
  int idx_input(int k) const { return 3 * params_.horizon + 2 * k; }  // k in [0, H-1]
  int idx_sbar() const { return 5 * params_.horizon; }

 private:
  Configuration x0_;
  ReferencePath segment_;
  ControlInput prev_u_;
  OcpParams params_;
};

OcpNlp build_nlp(const Configuration& x0, const ReferencePath& segment,
                 const ControlInput& prev_applied_u, const OcpParams& params);

OcpSolution solve_ocp(const OcpNlp& nlp, const OcpSolution* warm = nullptr);

// One NMPC step: solve the OCP and return the first optimal input together
// with the full solution for logging and warm starting.
std::pair<ControlInput, OcpSolution> control_step(const Configuration& x_measured,
                                                  const ReferencePath& segment,
                                                  const ControlInput& prev_applied_u,
                                                  const OcpParams& params,
                                                  const OcpSolution* warm = nullptr);

}  // namespace fieldnav
