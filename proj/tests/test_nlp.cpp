#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fieldnav/nlp_solver.hpp"

using namespace fieldnav;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// min 0.5|z|^2  s.t.  z0 + z1 = 1  ->  z* = (0.5, 0.5)
struct EqualityQp : NlpProblem {
  int num_vars() const override { return 2; }
  int num_eq() const override { return 1; }
  int num_ineq() const override { return 0; }
  double objective(const VectorXd& z) const override { return 0.5 * z.squaredNorm(); }
  void objective_gradient(const VectorXd& z, VectorXd& g) const override { g = z; }
  void eq_constraints(const VectorXd& z, VectorXd& h) const override {
    h.resize(1);
    h[0] = z[0] + z[1] - 1.0;
  }
  void eq_jacobian(const VectorXd&, MatrixXd& j) const override {
    j.resize(1, 2);
    j << 1.0, 1.0;
  }
  void ineq_constraints(const VectorXd&, VectorXd& g) const override { g.resize(0); }
  void ineq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, 2); }
  void lagrangian_hessian(const VectorXd&, const VectorXd&, const VectorXd&,
                          MatrixXd& h) const override {
    h = MatrixXd::Identity(2, 2);
  }
};

// min (z - c)^2  s.t.  1 - z >= 0
struct BoundedScalar : NlpProblem {
  explicit BoundedScalar(double c) : c_(c) {}
  double c_;
  int num_vars() const override { return 1; }
  int num_eq() const override { return 0; }
  int num_ineq() const override { return 1; }
  double objective(const VectorXd& z) const override { return (z[0] - c_) * (z[0] - c_); }
  void objective_gradient(const VectorXd& z, VectorXd& g) const override {
    g.resize(1);
    g[0] = 2.0 * (z[0] - c_);
  }
  void eq_constraints(const VectorXd&, VectorXd& h) const override { h.resize(0); }
  void eq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, 1); }
  void ineq_constraints(const VectorXd& z, VectorXd& g) const override {
    g.resize(1);
    g[0] = 1.0 - z[0];
  }
  void ineq_jacobian(const VectorXd&, MatrixXd& j) const override {
    j.resize(1, 1);
    j(0, 0) = -1.0;
  }
  void lagrangian_hessian(const VectorXd&, const VectorXd&, const VectorXd&,
                          MatrixXd& h) const override {
    h.resize(1, 1);
    h(0, 0) = 2.0;
  }
};

// min z  s.t.  z >= 0: flat objective pushing into the boundary.
struct LinearAtBound : NlpProblem {
  int num_vars() const override { return 1; }
  int num_eq() const override { return 0; }
  int num_ineq() const override { return 1; }
  double objective(const VectorXd& z) const override { return z[0]; }
  void objective_gradient(const VectorXd&, VectorXd& g) const override {
    g.resize(1);
    g[0] = 1.0;
  }
  void eq_constraints(const VectorXd&, VectorXd& h) const override { h.resize(0); }
  void eq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, 1); }
  void ineq_constraints(const VectorXd& z, VectorXd& g) const override {
    g.resize(1);
    g[0] = z[0];
  }
  void ineq_jacobian(const VectorXd&, MatrixXd& j) const override {
    j.resize(1, 1);
    j(0, 0) = 1.0;
  }
  void lagrangian_hessian(const VectorXd&, const VectorXd&, const VectorXd&,
                          MatrixXd& h) const override {
    h.setZero(1, 1);
  }
};

// Rosenbrock restricted to the unit disc: x^2 + y^2 <= 1.
struct RosenbrockDisc : NlpProblem {
  int num_vars() const override { return 2; }
  int num_eq() const override { return 0; }
  int num_ineq() const override { return 1; }
  double objective(const VectorXd& z) const override {
    const double a = 1.0 - z[0];
    const double b = z[1] - z[0] * z[0];
    return a * a + 100.0 * b * b;
  }
  void objective_gradient(const VectorXd& z, VectorXd& g) const override {
    const double b = z[1] - z[0] * z[0];
    g.resize(2);
    g[0] = -2.0 * (1.0 - z[0]) - 400.0 * z[0] * b;
    g[1] = 200.0 * b;
  }
  void eq_constraints(const VectorXd&, VectorXd& h) const override { h.resize(0); }
  void eq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, 2); }
  void ineq_constraints(const VectorXd& z, VectorXd& g) const override {
    g.resize(1);
    g[0] = 1.0 - z.squaredNorm();
  }
  void ineq_jacobian(const VectorXd& z, MatrixXd& j) const override {
    j.resize(1, 2);
    j(0, 0) = -2.0 * z[0];
    j(0, 1) = -2.0 * z[1];
  }
  void lagrangian_hessian(const VectorXd& z, const VectorXd&, const VectorXd& nu,
                          MatrixXd& h) const override {
    h.resize(2, 2);
    const double b = z[1] - z[0] * z[0];
    h(0, 0) = 2.0 - 400.0 * b + 800.0 * z[0] * z[0];
    h(0, 1) = h(1, 0) = -400.0 * z[0];
    h(1, 1) = 200.0;
    h(0, 0) += 2.0 * nu[0];
    h(1, 1) += 2.0 * nu[0];
  }
};

// Contradictory equalities: z = 1 and z = -1.
struct Contradiction : NlpProblem {
  int num_vars() const override { return 1; }
  int num_eq() const override { return 2; }
  int num_ineq() const override { return 0; }
  double objective(const VectorXd& z) const override { return z[0] * z[0]; }
  void objective_gradient(const VectorXd& z, VectorXd& g) const override { g = 2.0 * z; }
  void eq_constraints(const VectorXd& z, VectorXd& h) const override {
    h.resize(2);
    h[0] = z[0] - 1.0;
    h[1] = z[0] + 1.0;
  }
  void eq_jacobian(const VectorXd&, MatrixXd& j) const override {
    j.resize(2, 1);
    j << 1.0, 1.0;
  }
  void ineq_constraints(const VectorXd&, VectorXd& g) const override { g.resize(0); }
  void ineq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, 1); }
  void lagrangian_hessian(const VectorXd&, const VectorXd&, const VectorXd&,
                          MatrixXd& h) const override {
    h.resize(1, 1);
    h(0, 0) = 2.0;
  }
};

}  // namespace

TEST_CASE("equality-constrained quadratic") {
  EqualityQp prob;
  IpSolver solver;
  const IpResult res = solver.solve(prob, Eigen::Vector2d(5.0, -3.0));
  CHECK(res.status == NlpStatus::Converged);
  CHECK(res.z[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.z[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.kkt_residual <= 1e-6);
}

TEST_CASE("active and inactive scalar bound") {
  IpSolver solver;
  {
    BoundedScalar prob(2.0);  // unconstrained optimum outside the bound
    const IpResult res = solver.solve(prob, VectorXd::Zero(1));
    CHECK(res.status == NlpStatus::Converged);
    CHECK(res.z[0] == doctest::Approx(1.0).epsilon(1e-6));
  }
  {
    BoundedScalar prob(0.3);  // interior optimum
    const IpResult res = solver.solve(prob, VectorXd::Zero(1));
    CHECK(res.status == NlpStatus::Converged);
    CHECK(res.z[0] == doctest::Approx(0.3).epsilon(1e-6));
  }
}

TEST_CASE("linear objective pinned at the boundary") {
  LinearAtBound prob;
  IpSolver solver;
  const IpResult res = solver.solve(prob, VectorXd::Constant(1, 2.0));
  CHECK(res.status == NlpStatus::Converged);
  CHECK(std::fabs(res.z[0]) <= 1e-6);
}

TEST_CASE("nonconvex objective inside a disc") {
  RosenbrockDisc prob;
  IpSolver solver;
  const IpResult res = solver.solve(prob, Eigen::Vector2d(0.0, 0.0));
  CHECK(res.status == NlpStatus::Converged);
  CHECK(res.kkt_residual <= 1e-6);
  CHECK(res.z.squaredNorm() <= 1.0 + 1e-6);
  // Known constrained optimum of Rosenbrock on the unit disc.
  CHECK(res.z[0] == doctest::Approx(0.7864).epsilon(1e-3));
  CHECK(res.z[1] == doctest::Approx(0.6177).epsilon(1e-3));
}

TEST_CASE("contradictory equalities are reported infeasible") {
  Contradiction prob;
  IpSolver solver;
  const IpResult res = solver.solve(prob, VectorXd::Zero(1));
  CHECK(res.status == NlpStatus::Infeasible);
}
