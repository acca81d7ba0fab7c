#include "fieldnav/nmpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldnav/errors.hpp"

namespace fieldnav {

void OcpParams::validate() const {
  if (horizon < 2) throw SolverConfigError("prediction horizon must be >= 2");
  if (!(dt > 0.0)) throw SolverConfigError("sampling time must be positive");
  if (!(q_s > 0.0)) throw SolverConfigError("offset weight q_s must be positive");
  if (max_iterations < 1) throw SolverConfigError("solver iteration cap must be >= 1");
  if (!Q.isApprox(Q.transpose(), 1e-12) || Eigen::LLT<Eigen::Matrix3d>(Q).info() != Eigen::Success) {
    throw SolverConfigError("Q must be symmetric positive definite");
  }
  if (!R.isApprox(R.transpose(), 1e-12) || Eigen::LLT<Eigen::Matrix2d>(R).info() != Eigen::Success) {
    throw SolverConfigError("R must be symmetric positive definite");
  }
  limits.validate();
  for (const auto& o : obstacles) {
    if (!(o.radius >= 0.0) || !std::isfinite(o.x) || !std::isfinite(o.y)) {
      throw SolverConfigError("obstacles need finite centers and nonnegative radii");
    }
  }
}

double stage_cost(const Configuration& x, const ControlInput& u, const Configuration& ref,
                  const Eigen::Matrix3d& Q, const Eigen::Matrix2d& R) {
  const Eigen::Vector3d e(x.x - ref.x, x.y - ref.y, wrap_to_pi(x.theta - ref.theta));
  const Eigen::Vector2d uu(u.v, u.omega);
  const double we = e.dot(Q * e);
  const double wu = uu.dot(R * uu);
  return we * we + wu * wu;
}

double offset_cost(double s_bar, double q_s) {
  const double d = 1.0 - s_bar;
  return q_s * d * d;
}

namespace {

// RK4 of the unicycle collapses to a Simpson rule over the swept heading,
// which makes the Jacobian and Hessian of one step short closed forms.
struct StepDerivs {
  double delta_x, delta_y, delta_th;  // state increments over one step
  double dx_dth, dx_dv, dx_dw;
  double dy_dth, dy_dv, dy_dw;
  // Second derivatives of the x and y updates over (theta, v, omega),
  // packed as [thth, thv, thw, vw, ww] (vv is zero).
  std::array<double, 5> d2x, d2y;
};

StepDerivs step_derivs(double th, double v, double w, double dt) {
  const double thm = th + 0.5 * w * dt;
  const double the = th + w * dt;
  const double c0 = std::cos(th), s0 = std::sin(th);
  const double cm = std::cos(thm), sm = std::sin(thm);
  const double ce = std::cos(the), se = std::sin(the);
  const double C = c0 + 4.0 * cm + ce;
  const double S = s0 + 4.0 * sm + se;
  const double Cw = 2.0 * cm + ce;  // d(C)/dw = -dt*Sw, d(S)/dw = dt*Cw
  const double Sw = 2.0 * sm + se;
  const double k = dt / 6.0;

  StepDerivs d;
  d.delta_x = v * k * C;
  d.delta_y = v * k * S;
  d.delta_th = w * dt;
  d.dx_dth = -v * k * S;
  d.dx_dv = k * C;
  d.dx_dw = -v * k * dt * Sw;
  d.dy_dth = v * k * C;
  d.dy_dv = k * S;
  d.dy_dw = v * k * dt * Cw;
  d.d2x = {-v * k * C, -k * S, -v * k * dt * Cw, -k * dt * Sw,
           -v * k * dt * dt * (cm + ce)};
  d.d2y = {-v * k * S, k * C, -v * k * dt * Sw, k * dt * Cw,
           -v * k * dt * dt * (sm + se)};
  return d;
}

// Pose and slope of the reference at s, linearly extended beyond [0,1] so the
// solver sees a consistent function while the barrier pulls s back inside.
void eval_path(const ReferencePath& seg, double s, Eigen::Vector3d& p, Eigen::Vector3d& dp) {
  const double sc = std::clamp(s, 0.0, 1.0);
  Configuration pose;
  std::array<double, 3> d;
  seg.at_with_derivative(sc, pose, d);
  dp = Eigen::Vector3d(d[0], d[1], d[2]);
  p = Eigen::Vector3d(pose.x, pose.y, pose.theta) + (s - sc) * dp;
}

}  // namespace

OcpNlp::OcpNlp(const Configuration& x0, ReferencePath segment, ControlInput prev_applied_u,
               OcpParams params)
    : x0_(x0), segment_(std::move(segment)), prev_u_(prev_applied_u), params_(std::move(params)) {
  params_.validate();
  if (segment_.samples.empty()) throw EmptySegment("reference segment has no samples");
}

int OcpNlp::num_vars() const { return 5 * params_.horizon + 1; }
int OcpNlp::num_eq() const { return 3 * params_.horizon + 3; }
int OcpNlp::num_ineq() const {
  const int h = params_.horizon;
  return 9 * h + 2 + h * static_cast<int>(params_.obstacles.size());
}

double OcpNlp::objective(const Eigen::VectorXd& z) const {
  const int h = params_.horizon;
  const double s = z[idx_sbar()];
  Eigen::Vector3d p, dp;
  eval_path(segment_, s, p, dp);
  double f = offset_cost(s, params_.q_s);
  for (int k = 0; k < h; ++k) {
    Eigen::Vector3d xk = k == 0 ? Eigen::Vector3d(x0_.x, x0_.y, x0_.theta)
                                : Eigen::Vector3d(z.segment<3>(idx_state(k)));
    Eigen::Vector3d e(xk[0] - p[0], xk[1] - p[1], wrap_to_pi(xk[2] - p[2]));
    const double we = e.dot(params_.Q * e);
    const Eigen::Vector2d u = z.segment<2>(idx_input(k));
    const double wu = u.dot(params_.R * u);
    f += we * we + wu * wu;
  }
  return f;
}

void OcpNlp::objective_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const {
  const int h = params_.horizon;
  grad.setZero(num_vars());
  const double s = z[idx_sbar()];
  Eigen::Vector3d p, dp;
  eval_path(segment_, s, p, dp);
  grad[idx_sbar()] = -2.0 * params_.q_s * (1.0 - s);
  for (int k = 0; k < h; ++k) {
    Eigen::Vector3d xk = k == 0 ? Eigen::Vector3d(x0_.x, x0_.y, x0_.theta)
                                : Eigen::Vector3d(z.segment<3>(idx_state(k)));
    Eigen::Vector3d e(xk[0] - p[0], xk[1] - p[1], wrap_to_pi(xk[2] - p[2]));
    const Eigen::Vector3d qe = params_.Q * e;
    const double we = e.dot(qe);
    if (k >= 1) grad.segment<3>(idx_state(k)) += 4.0 * we * qe;
    grad[idx_sbar()] -= 4.0 * we * qe.dot(dp);
    const Eigen::Vector2d u = z.segment<2>(idx_input(k));
    const Eigen::Vector2d ru = params_.R * u;
    grad.segment<2>(idx_input(k)) += 4.0 * u.dot(ru) * ru;
  }
}

void OcpNlp::eq_constraints(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
  const int h = params_.horizon;
  out.resize(num_eq());
  for (int k = 0; k < h; ++k) {
    const Eigen::Vector3d xk = k == 0 ? Eigen::Vector3d(x0_.x, x0_.y, x0_.theta)
                                      : Eigen::Vector3d(z.segment<3>(idx_state(k)));
    const Eigen::Vector2d u = z.segment<2>(idx_input(k));
    const StepDerivs d = step_derivs(xk[2], u[0], u[1], params_.dt);
    const Eigen::Vector3d xn = z.segment<3>(idx_state(k + 1));
    out[3 * k + 0] = xn[0] - (xk[0] + d.delta_x);
    out[3 * k + 1] = xn[1] - (xk[1] + d.delta_y);
    out[3 * k + 2] = xn[2] - (xk[2] + d.delta_th);
  }
  const double s = z[idx_sbar()];
  Eigen::Vector3d p, dp;
  eval_path(segment_, s, p, dp);
  const Eigen::Vector3d xh = z.segment<3>(idx_state(h));
  out[3 * h + 0] = xh[0] - p[0];
  out[3 * h + 1] = xh[1] - p[1];
  out[3 * h + 2] = wrap_to_pi(xh[2] - p[2]);
}

void OcpNlp::eq_jacobian(const Eigen::VectorXd& z, Eigen::MatrixXd& jac) const {
  const int h = params_.horizon;
  jac.setZero(num_eq(), num_vars());
  for (int k = 0; k < h; ++k) {
    const Eigen::Vector3d xk = k == 0 ? Eigen::Vector3d(x0_.x, x0_.y, x0_.theta)
                                      : Eigen::Vector3d(z.segment<3>(idx_state(k)));
    const Eigen::Vector2d u = z.segment<2>(idx_input(k));
    const StepDerivs d = step_derivs(xk[2], u[0], u[1], params_.dt);
    const int r = 3 * k;
    jac.block<3, 3>(r, idx_state(k + 1)).setIdentity();
    if (k >= 1) {
      const int c = idx_state(k);
      jac(r + 0, c + 0) = -1.0;
      jac(r + 0, c + 2) = -d.dx_dth;
      jac(r + 1, c + 1) = -1.0;
      jac(r + 1, c + 2) = -d.dy_dth;
      jac(r + 2, c + 2) = -1.0;
    }
    const int cu = idx_input(k);
    jac(r + 0, cu + 0) = -d.dx_dv;
    jac(r + 0, cu + 1) = -d.dx_dw;
    jac(r + 1, cu + 0) = -d.dy_dv;
    jac(r + 1, cu + 1) = -d.dy_dw;
    jac(r + 2, cu + 1) = -params_.dt;
  }
  const double s = z[idx_sbar()];
  Eigen::Vector3d p, dp;
  eval_path(segment_, s, p, dp);
  const int r = 3 * h;
  jac.block<3, 3>(r, idx_state(h)).setIdentity();
  jac(r + 0, idx_sbar()) = -dp[0];
  jac(r + 1, idx_sbar()) = -dp[1];
  jac(r + 2, idx_sbar()) = -dp[2];
}

void OcpNlp::ineq_constraints(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
  const int h = params_.horizon;
  const RobotLimits& lim = params_.limits;
  out.resize(num_ineq());
  for (int k = 0; k < h; ++k) {
    const Eigen::Vector2d u = z.segment<2>(idx_input(k));
    const double vp = k == 0 ? prev_u_.v : z[idx_input(k - 1) + 0];
    const double wp = k == 0 ? prev_u_.omega : z[idx_input(k - 1) + 1];
    double* g = out.data() + 9 * k;
    g[0] = u[0] - lim.v_min;
    g[1] = lim.v_max - u[0];
    g[2] = u[1] + lim.omega_max;
    g[3] = lim.omega_max - u[1];
    g[4] = lim.dv_max - (u[0] - vp);
    g[5] = lim.dv_max + (u[0] - vp);
    g[6] = lim.domega_max - (u[1] - wp);
    g[7] = lim.domega_max + (u[1] - wp);
    g[8] = u[0] * u[0] - lim.r_min * lim.r_min * u[1] * u[1];
  }
  const double s = z[idx_sbar()];
  out[9 * h + 0] = s;
  out[9 * h + 1] = 1.0 - s;
  int row = 9 * h + 2;
  for (const auto& obs : params_.obstacles) {
    const double clearance = obs.radius + lim.footprint_radius;
    for (int k = 1; k <= h; ++k) {
      const double dx = z[idx_state(k) + 0] - obs.x;
      const double dy = z[idx_state(k) + 1] - obs.y;
      out[row++] = dx * dx + dy * dy - clearance * clearance;
    }
  }
}

void OcpNlp::ineq_jacobian(const Eigen::VectorXd& z, Eigen::MatrixXd& jac) const {
  const int h = params_.horizon;
  const RobotLimits& lim = params_.limits;
  jac.setZero(num_ineq(), num_vars());
  for (int k = 0; k < h; ++k) {
    const int cu = idx_input(k);
    const int cp = k == 0 ? -1 : idx_input(k - 1);
    const int r = 9 * k;
    jac(r + 0, cu + 0) = 1.0;
    jac(r + 1, cu + 0) = -1.0;
    jac(r + 2, cu + 1) = 1.0;
    jac(r + 3, cu + 1) = -1.0;
    jac(r + 4, cu + 0) = -1.0;
    jac(r + 5, cu + 0) = 1.0;
    jac(r + 6, cu + 1) = -1.0;
    jac(r + 7, cu + 1) = 1.0;
    if (cp >= 0) {
      jac(r + 4, cp + 0) = 1.0;
      jac(r + 5, cp + 0) = -1.0;
      jac(r + 6, cp + 1) = 1.0;
      jac(r + 7, cp + 1) = -1.0;
    }
    jac(r + 8, cu + 0) = 2.0 * z[cu + 0];
    jac(r + 8, cu + 1) = -2.0 * lim.r_min * lim.r_min * z[cu + 1];
  }
  jac(9 * h + 0, idx_sbar()) = 1.0;
  jac(9 * h + 1, idx_sbar()) = -1.0;
  int row = 9 * h + 2;
  for (const auto& obs : params_.obstacles) {
    for (int k = 1; k <= h; ++k) {
      jac(row, idx_state(k) + 0) = 2.0 * (z[idx_state(k) + 0] - obs.x);
      jac(row, idx_state(k) + 1) = 2.0 * (z[idx_state(k) + 1] - obs.y);
      ++row;
    }
  }
}

void OcpNlp::lagrangian_hessian(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
                                const Eigen::VectorXd& nu, Eigen::MatrixXd& hess) const {
  const int h = params_.horizon;
  const int n = num_vars();
  const int isb = idx_sbar();
  hess.setZero(n, n);

  const double s = z[isb];
  Eigen::Vector3d p, dp;
  eval_path(segment_, s, p, dp);

  // Objective curvature.
  hess(isb, isb) += 2.0 * params_.q_s;
  for (int k = 0; k < h; ++k) {
    const Eigen::Vector3d xk = k == 0 ? Eigen::Vector3d(x0_.x, x0_.y, x0_.theta)
                                      : Eigen::Vector3d(z.segment<3>(idx_state(k)));
    Eigen::Vector3d e(xk[0] - p[0], xk[1] - p[1], wrap_to_pi(xk[2] - p[2]));
    const Eigen::Vector3d qe = params_.Q * e;
    const double we = e.dot(qe);
    const Eigen::Matrix3d he = 8.0 * qe * qe.transpose() + 4.0 * we * params_.Q;
    if (k >= 1) {
      const int c = idx_state(k);
      hess.block<3, 3>(c, c) += he;
      const Eigen::Vector3d cross = he * (-dp);
      hess.block<3, 1>(c, isb) += cross;
      hess.block<1, 3>(isb, c) += cross.transpose();
    }
    hess(isb, isb) += dp.dot(he * dp);

    const Eigen::Vector2d u = z.segment<2>(idx_input(k));
    const Eigen::Vector2d ru = params_.R * u;
    const Eigen::Matrix2d hu = 8.0 * ru * ru.transpose() + 4.0 * u.dot(ru) * params_.R;
    hess.block<2, 2>(idx_input(k), idx_input(k)) += hu;
  }

  // Shooting-defect curvature (lambda' * -d2(step)).
  for (int k = 0; k < h; ++k) {
    const Eigen::Vector3d xk = k == 0 ? Eigen::Vector3d(x0_.x, x0_.y, x0_.theta)
                                      : Eigen::Vector3d(z.segment<3>(idx_state(k)));
    const Eigen::Vector2d u = z.segment<2>(idx_input(k));
    const StepDerivs d = step_derivs(xk[2], u[0], u[1], params_.dt);
    const double lx = lambda[3 * k + 0];
    const double ly = lambda[3 * k + 1];
    // Packed [thth, thv, thw, vw, ww] of -(lx*d2x + ly*d2y).
    const std::array<double, 5> m = {
        -(lx * d.d2x[0] + ly * d.d2y[0]), -(lx * d.d2x[1] + ly * d.d2y[1]),
        -(lx * d.d2x[2] + ly * d.d2y[2]), -(lx * d.d2x[3] + ly * d.d2y[3]),
        -(lx * d.d2x[4] + ly * d.d2y[4])};
    const int cv = idx_input(k) + 0;
    const int cw = idx_input(k) + 1;
    if (k >= 1) {
      const int ct = idx_state(k) + 2;
      hess(ct, ct) += m[0];
      hess(ct, cv) += m[1];
      hess(cv, ct) += m[1];
      hess(ct, cw) += m[2];
      hess(cw, ct) += m[2];
    }
    hess(cv, cw) += m[3];
    hess(cw, cv) += m[3];
    hess(cw, cw) += m[4];
  }

  // Inequality curvature: minimum-turn rows and obstacle rows.
  const double r2 = params_.limits.r_min * params_.limits.r_min;
  for (int k = 0; k < h; ++k) {
    const double nk = nu[9 * k + 8];
    hess(idx_input(k) + 0, idx_input(k) + 0) -= 2.0 * nk;
    hess(idx_input(k) + 1, idx_input(k) + 1) += 2.0 * nk * r2;
  }
  int row = 9 * h + 2;
  for (std::size_t i = 0; i < params_.obstacles.size(); ++i) {
    for (int k = 1; k <= h; ++k) {
      const double nk = nu[row++];
      hess(idx_state(k) + 0, idx_state(k) + 0) -= 2.0 * nk;
      hess(idx_state(k) + 1, idx_state(k) + 1) -= 2.0 * nk;
    }
  }
}

Eigen::VectorXd OcpNlp::cold_start() const {
  const int h = params_.horizon;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(num_vars());
  for (int k = 1; k <= h; ++k) {
    z.segment<3>(idx_state(k)) = Eigen::Vector3d(x0_.x, x0_.y, x0_.theta);
  }
  // s_bar starts at the sample nearest to the measured state.
  double best_d = std::numeric_limits<double>::infinity();
  double best_s = 1.0;
  for (std::size_t i = 0; i < segment_.samples.size(); ++i) {
    const double d = segment_.samples[i].distance_to(x0_);
    if (d < best_d) {
      best_d = d;
      best_s = segment_.total_length > 0.0
                   ? segment_.cumulative_arclength[i] / segment_.total_length
                   : 1.0;
    }
  }
  z[idx_sbar()] = std::clamp(best_s, 1e-6, 1.0 - 1e-6);
  return z;
}

Eigen::VectorXd OcpNlp::warm_start(const OcpSolution& previous) const {
  const int h = params_.horizon;
  if (static_cast<int>(previous.states.size()) != h + 1 ||
      static_cast<int>(previous.inputs.size()) != h) {
    return cold_start();
  }
  Eigen::VectorXd z(num_vars());
  // Shift by one step, repeat the last input, extend the final state.
  std::vector<Eigen::Vector3d> xs(h + 1);
  for (int k = 0; k <= h; ++k) {
    const Configuration& c = previous.states[k];
    xs[k] = Eigen::Vector3d(c.x, c.y, c.theta);
  }
  // Re-unwrap headings so shooting defects stay free of 2*pi jumps.
  for (int k = 1; k <= h; ++k) {
    xs[k][2] = xs[k - 1][2] + wrap_to_pi(xs[k][2] - xs[k - 1][2]);
  }
  const ControlInput last = previous.inputs.back();
  const Configuration ext = rk4_step(
      Configuration(xs[h][0], xs[h][1], wrap_to_pi(xs[h][2])), last, params_.dt);
  const double ext_th = xs[h][2] + wrap_to_pi(ext.theta - wrap_to_pi(xs[h][2]));

  for (int k = 1; k <= h; ++k) {
    if (k < h) {
      z.segment<3>(idx_state(k)) = xs[k + 1];
    } else {
      z.segment<3>(idx_state(k)) = Eigen::Vector3d(ext.x, ext.y, ext_th);
    }
  }
  for (int k = 0; k < h; ++k) {
    const ControlInput& u = k + 1 < h ? previous.inputs[k + 1] : last;
    z[idx_input(k) + 0] = u.v;
    z[idx_input(k) + 1] = u.omega;
  }
  z[idx_sbar()] = std::clamp(previous.s_bar, 1e-6, 1.0 - 1e-6);
  return z;
}

OcpSolution OcpNlp::extract(const IpResult& result) const {
  const int h = params_.horizon;
  OcpSolution sol;
  sol.states.reserve(h + 1);
  sol.states.push_back(x0_);
  for (int k = 1; k <= h; ++k) {
    const auto x = result.z.segment<3>(idx_state(k));
    sol.states.emplace_back(x[0], x[1], wrap_to_pi(x[2]));
  }
  sol.inputs.reserve(h);
  for (int k = 0; k < h; ++k) {
    sol.inputs.push_back({result.z[idx_input(k) + 0], result.z[idx_input(k) + 1]});
  }
  sol.s_bar = std::clamp(result.z[idx_sbar()], 0.0, 1.0);
  sol.cost = result.objective;
  sol.status = result.status;
  sol.kkt_residual = result.kkt_residual;
  sol.iterations = result.iterations;
  return sol;
}

OcpNlp build_nlp(const Configuration& x0, const ReferencePath& segment,
                 const ControlInput& prev_applied_u, const OcpParams& params) {
  return OcpNlp(x0, segment, prev_applied_u, params);
}

OcpSolution solve_ocp(const OcpNlp& nlp, const OcpSolution* warm) {
  IpOptions opts;
  opts.max_iterations = nlp.params().max_iterations;
  IpSolver solver(opts);
  const Eigen::VectorXd z0 = warm ? nlp.warm_start(*warm) : nlp.cold_start();
  const double mu0 = warm ? 1e-3 : opts.mu_init;
  return nlp.extract(solver.solve(nlp, z0, mu0));
}

std::pair<ControlInput, OcpSolution> control_step(const Configuration& x_measured,
                                                  const ReferencePath& segment,
                                                  const ControlInput& prev_applied_u,
                                                  const OcpParams& params,
                                                  const OcpSolution* warm) {
  const OcpNlp nlp(x_measured, segment, prev_applied_u, params);
  OcpSolution sol = solve_ocp(nlp, warm);
  return {sol.inputs.front(), sol};
}

}  // namespace fieldnav
