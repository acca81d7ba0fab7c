#pragma once

#include <Eigen/Dense>

namespace fieldnav {

// Dense nonlinear program:
//   minimize f(z)   s.t.   h(z) = 0,   g(z) >= 0.
//
// Implementations provide analytic first derivatives and the Hessian of the
// Lagrangian  L = f + lambda' h - nu' g.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_vars() const = 0;
  virtual int num_eq() const = 0;
  virtual int num_ineq() const = 0;

  virtual double objective(const Eigen::VectorXd& z) const = 0;
  virtual void objective_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const = 0;
  virtual void eq_constraints(const Eigen::VectorXd& z, Eigen::VectorXd& h) const = 0;
  virtual void eq_jacobian(const Eigen::VectorXd& z, Eigen::MatrixXd& jac) const = 0;
  virtual void ineq_constraints(const Eigen::VectorXd& z, Eigen::VectorXd& g) const = 0;
  virtual void ineq_jacobian(const Eigen::VectorXd& z, Eigen::MatrixXd& jac) const = 0;
  virtual void lagrangian_hessian(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
                                  const Eigen::VectorXd& nu, Eigen::MatrixXd& hess) const = 0;
};

enum class NlpStatus { Converged, MaxIterations, Infeasible };

const char* to_string(NlpStatus status);

struct IpOptions {
  int max_iterations = 200;
  double tol = 1e-6;             // stationarity and constraint violation target
  double mu_init = 1e-1;
  double mu_min = 1e-11;
  double bound_relax = 1e-8;     // inequalities are enforced as g >= -bound_relax
  double restoration_fail_viol = 1e-3;
  bool verbose = false;
};

struct IpResult {
  Eigen::VectorXd z;
  Eigen::VectorXd lambda;  // equality multipliers
  Eigen::VectorXd nu;      // inequality multipliers (nonnegative)
  NlpStatus status = NlpStatus::MaxIterations;
  int iterations = 0;
  double kkt_residual = 0.0;         // max of stationarity / violation / complementarity
  double constraint_violation = 0.0; // unrelaxed
  double objective = 0.0;
};

// Primal-dual interior point method with slack variables for the
// inequalities, an l1-penalty line search, adaptive Hessian regularization,
// and a Gauss-Newton restoration phase for infeasible iterates.
class IpSolver {
 public:
  explicit IpSolver(IpOptions options = {}) : opts_(options) {}

  // mu_init < 0 uses the configured default; warm starts pass a smaller value.
  IpResult solve(const NlpProblem& problem, const Eigen::VectorXd& z0,
                 double mu_init = -1.0) const;

  const IpOptions& options() const { return opts_; }

 private:
  IpOptions opts_;
};

}  // namespace fieldnav
