#include "fieldnav/nlp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace fieldnav {

const char* to_string(NlpStatus status) {
  switch (status) {
    case NlpStatus::Converged: return "converged";
    case NlpStatus::MaxIterations: return "max_iterations";
    case NlpStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

struct Eval {
  double f = 0.0;
  Eigen::VectorXd grad, h, g;
  Eigen::MatrixXd jh, jg;

  void compute(const NlpProblem& p, const Eigen::VectorXd& z) {
    f = p.objective(z);
    p.objective_gradient(z, grad);
    p.eq_constraints(z, h);
    p.eq_jacobian(z, jh);
    p.ineq_constraints(z, g);
    p.ineq_jacobian(z, jg);
  }
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Unrelaxed violation: equalities plus the negative part of g.
double true_violation(const Eigen::VectorXd& h, const Eigen::VectorXd& g) {
  double v = inf_norm(h);
  for (int i = 0; i < g.size(); ++i) v = std::max(v, -g[i]);
  return std::max(v, 0.0);
}

// Least-squares multiplier polish. A feasible point is a KKT point iff some
// multipliers (lambda free, nu >= 0 supported on active inequalities) cancel
// the objective gradient; merit-function stalls near active nonlinear
// constraints leave the primal converged while the iterated multipliers lag,
// and this certificate closes exactly that gap.
bool certify_kkt(const Eval& ev, int me, int mi, double tol, IpResult& res) {
  if (true_violation(ev.h, ev.g) > tol) return false;
  std::vector<int> active;
  for (int i = 0; i < mi; ++i) {
    if (ev.g[i] <= 1e-5) active.push_back(i);
  }
  const int n = static_cast<int>(ev.grad.size());
  for (int round = 0; round < 5; ++round) {
    const int ma = static_cast<int>(active.size());
    if (me + ma == 0) {
      if (inf_norm(ev.grad) > tol) return false;
      res.lambda.setZero();
      res.nu.setZero();
      res.kkt_residual = inf_norm(ev.grad);
      return true;
    }
    Eigen::MatrixXd m(n, me + ma);
    if (me) m.leftCols(me) = ev.jh.transpose();
    for (int j = 0; j < ma; ++j) m.col(me + j) = -ev.jg.row(active[j]).transpose();
    const Eigen::VectorXd y = m.colPivHouseholderQr().solve(-ev.grad);

    std::vector<int> kept;
    for (int j = 0; j < ma; ++j) {
      if (y[me + j] >= -1e-9) kept.push_back(active[j]);
    }
    if (static_cast<int>(kept.size()) != ma) {
      active = std::move(kept);
      continue;
    }
    const double resid = inf_norm(ev.grad + m * y);
    if (resid > tol) return false;
    double comp = 0.0;
    for (int j = 0; j < ma; ++j) {
      comp = std::max(comp, std::fabs(ev.g[active[j]] * y[me + j]));
    }
    if (comp > tol) return false;
    res.lambda = y.head(me);
    res.nu.setZero();
    for (int j = 0; j < ma; ++j) res.nu[active[j]] = std::max(0.0, y[me + j]);
    res.kkt_residual = std::max({resid, true_violation(ev.h, ev.g), comp});
    return true;
  }
  return false;
}

// Gauss-Newton descent on 0.5*(|h|^2 + |min(g + relax, 0)|^2). Returns the
// final violation measure.
double restore_feasibility(const NlpProblem& p, Eigen::VectorXd& z, double relax, int max_iter) {
  const int n = p.num_vars();
  Eigen::VectorXd h, g, grad_psi;
  Eigen::MatrixXd jh, jg;
  for (int it = 0; it < max_iter; ++it) {
    p.eq_constraints(z, h);
    p.ineq_constraints(z, g);
    Eigen::VectorXd act = (g.array() + relax).min(0.0);
    const double psi = 0.5 * (h.squaredNorm() + act.squaredNorm());
    const double viol = true_violation(h, g);
    if (viol <= 1e-9) return viol;

    p.eq_jacobian(z, jh);
    p.ineq_jacobian(z, jg);
    Eigen::MatrixXd jtj = jh.transpose() * jh;
    grad_psi = jh.transpose() * h;
    for (int i = 0; i < g.size(); ++i) {
      if (act[i] < 0.0) {
        jtj.noalias() += jg.row(i).transpose() * jg.row(i);
        grad_psi.noalias() += act[i] * jg.row(i).transpose();
      }
    }
    double delta = 1e-8;
    Eigen::VectorXd step;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd reg = jtj + delta * Eigen::MatrixXd::Identity(n, n);
      Eigen::LLT<Eigen::MatrixXd> llt(reg);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(-grad_psi);
        break;
      }
      delta *= 10.0;
    }
    if (step.size() == 0) return viol;

    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      Eigen::VectorXd zt = z + alpha * step;
      p.eq_constraints(zt, h);
      p.ineq_constraints(zt, g);
      Eigen::VectorXd act_t = (g.array() + relax).min(0.0);
      const double psi_t = 0.5 * (h.squaredNorm() + act_t.squaredNorm());
      if (psi_t < psi - 1e-14) {
        z = zt;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }
  p.eq_constraints(z, h);
  p.ineq_constraints(z, g);
  return true_violation(h, g);
}

}  // namespace

IpResult IpSolver::solve(const NlpProblem& problem, const Eigen::VectorXd& z0,
                         double mu_init) const {
  const int n = problem.num_vars();
  const int me = problem.num_eq();
  const int mi = problem.num_ineq();
  const double tau = opts_.bound_relax;

  IpResult res;
  res.z = z0;
  res.lambda = Eigen::VectorXd::Zero(me);
  res.nu = Eigen::VectorXd::Zero(mi);

  double mu = mu_init > 0.0 ? mu_init : opts_.mu_init;

  Eval ev;
  ev.compute(problem, res.z);
  Eigen::VectorXd s = (ev.g.array() + tau).max(std::max(1e-6, 0.1 * mu)).matrix();
  for (int i = 0; i < mi; ++i) res.nu[i] = std::clamp(mu / s[i], 1e-8, 1e6);

  double rho = 10.0;         // l1 penalty weight, monotone nondecreasing
  double delta_carry = 0.0;  // Hessian regularization carried across stalls
  int restorations = 0;
  int dual_restarts = 0;
  const int kkt_dim = n + me;
  Eigen::MatrixXd kkt(kkt_dim, kkt_dim);
  Eigen::VectorXd rhs(kkt_dim), sol(kkt_dim);

  int iter = 0;
  while (iter < opts_.max_iterations) {
    Eigen::VectorXd r_d = ev.grad;
    if (me) r_d.noalias() += ev.jh.transpose() * res.lambda;
    if (mi) r_d.noalias() -= ev.jg.transpose() * res.nu;
    Eigen::VectorXd r_g = ev.g + Eigen::VectorXd::Constant(mi, tau) - s;
    Eigen::VectorXd comp = s.cwiseProduct(res.nu);

    const double stat = inf_norm(r_d);
    const double viol = true_violation(ev.h, ev.g);
    const double comp_norm = inf_norm(comp);
    res.kkt_residual = std::max({stat, viol, comp_norm});
    res.constraint_violation = viol;

    if (opts_.verbose) {
      std::printf("it=%3d f=%12.5e stat=%9.2e viol=%9.2e comp=%9.2e mu=%8.1e\n", iter, ev.f,
                  stat, viol, comp_norm, mu);
    }
    if (stat <= opts_.tol && viol <= opts_.tol && comp_norm <= opts_.tol && mu <= 1e-8) {
      res.status = NlpStatus::Converged;
      break;
    }
    // Late phase: accept a certified KKT point even if the merit line search
    // would keep crawling.
    if (mu <= 1e-6 && viol <= opts_.tol && stat <= 1e-1 &&
        certify_kkt(ev, me, mi, opts_.tol, res)) {
      res.status = NlpStatus::Converged;
      res.constraint_violation = viol;
      if (opts_.verbose) std::printf("  certified KKT point (polished multipliers)\n");
      break;
    }

    // Barrier subproblem solved to proportional accuracy: tighten mu.
    const double kkt_mu = std::max(
        {stat, inf_norm(ev.h), inf_norm(r_g), mi ? (comp.array() - mu).abs().maxCoeff() : 0.0});
    if (kkt_mu <= 10.0 * mu && mu > opts_.mu_min) {
      mu = std::max(opts_.mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
      continue;
    }

    ++iter;

    Eigen::MatrixXd hess;
    problem.lagrangian_hessian(res.z, res.lambda, res.nu, hess);
    Eigen::VectorXd sigma = mi ? res.nu.cwiseQuotient(s) : Eigen::VectorXd();

    // rhs of the condensed system in (dz, dlambda).
    Eigen::VectorXd top = -r_d;
    if (mi) {
      Eigen::VectorXd t = (mu * s.cwiseInverse() - res.nu) - sigma.cwiseProduct(r_g);
      top.noalias() += ev.jg.transpose() * t;
    }

    bool stepped = false;
    double delta = delta_carry;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      kkt.setZero();
      kkt.topLeftCorner(n, n) = hess;
      if (mi) {
        kkt.topLeftCorner(n, n).noalias() += ev.jg.transpose() * sigma.asDiagonal() * ev.jg;
      }
      kkt.topLeftCorner(n, n).diagonal().array() += delta;
      if (me) {
        kkt.topRightCorner(n, me) = ev.jh.transpose();
        kkt.bottomLeftCorner(me, n) = ev.jh;
        kkt.bottomRightCorner(me, me).diagonal().array() -= 1e-8;
      }
      rhs.head(n) = top;
      rhs.tail(me) = -ev.h;

      Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
      sol = lu.solve(rhs);
      const double solve_err = (kkt * sol - rhs).cwiseAbs().maxCoeff();
      if (!sol.allFinite() || solve_err > 1e-6 * std::max(1.0, inf_norm(rhs))) {
        delta = delta == 0.0 ? 1e-8 : delta * 100.0;
        continue;
      }

      Eigen::VectorXd dz = sol.head(n);
      Eigen::VectorXd dlambda = sol.tail(me);
      Eigen::VectorXd ds = mi ? Eigen::VectorXd(ev.jg * dz + r_g) : Eigen::VectorXd();
      Eigen::VectorXd dnu =
          mi ? Eigen::VectorXd(mu * s.cwiseInverse() - res.nu - sigma.cwiseProduct(ds))
             : Eigen::VectorXd();

      // Fraction-to-boundary limits.
      double alpha_max = 1.0, alpha_dual = 1.0;
      for (int i = 0; i < mi; ++i) {
        if (ds[i] < 0.0) alpha_max = std::min(alpha_max, -0.995 * s[i] / ds[i]);
        if (dnu[i] < 0.0) alpha_dual = std::min(alpha_dual, -0.995 * res.nu[i] / dnu[i]);
      }

      rho = std::max(rho, 1.5 * std::max(inf_norm(res.lambda + dlambda),
                                         mi ? inf_norm(res.nu + dnu) : 0.0) +
                              1.0);
      const double theta0 = ev.h.lpNorm<1>() + (mi ? r_g.lpNorm<1>() : 0.0);
      double barrier0 = 0.0;
      for (int i = 0; i < mi; ++i) barrier0 -= mu * std::log(s[i]);
      const double phi0 = ev.f + barrier0 + rho * theta0;
      double dphi = ev.grad.dot(dz) - rho * theta0;
      for (int i = 0; i < mi; ++i) dphi -= mu * ds[i] / s[i];
      if (dphi >= -1e-14 && theta0 <= 1e-12) {
        delta = delta == 0.0 ? 1e-8 : delta * 100.0;
        continue;
      }

      Eigen::VectorXd zt, ht, gt, st;
      auto merit_at = [&](const Eigen::VectorXd& z_trial, const Eigen::VectorXd& s_trial,
                          Eigen::VectorXd& h_out, Eigen::VectorXd& g_out) {
        problem.eq_constraints(z_trial, h_out);
        problem.ineq_constraints(z_trial, g_out);
        double barrier_t = 0.0;
        for (int i = 0; i < mi; ++i) barrier_t -= mu * std::log(s_trial[i]);
        const double theta_t =
            h_out.lpNorm<1>() +
            (mi ? (g_out + Eigen::VectorXd::Constant(mi, tau) - s_trial).lpNorm<1>() : 0.0);
        return problem.objective(z_trial) + barrier_t + rho * theta_t;
      };

      // Armijo backtracking on the l1 merit function, with one second-order
      // correction after the first rejection (counters the Maratos effect at
      // active nonlinear constraints).
      double alpha = alpha_max;
      bool accepted = false;
      bool tried_soc = false;
      for (int ls = 0; ls < 40; ++ls) {
        zt = res.z + alpha * dz;
        st = s + alpha * ds;
        if (merit_at(zt, st, ht, gt) <= phi0 + 1e-4 * alpha * dphi) {
          accepted = true;
          break;
        }
        if (!tried_soc && me > 0 && alpha == alpha_max) {
          tried_soc = true;
          // Re-solve with the constraint residuals observed at the trial
          // point; same KKT factorization.
          Eigen::VectorXd r_g_soc =
              mi ? Eigen::VectorXd(alpha * r_g +
                                   (gt + Eigen::VectorXd::Constant(mi, tau) - st))
                 : Eigen::VectorXd();
          Eigen::VectorXd top_soc = -r_d;
          if (mi) {
            Eigen::VectorXd t2 = (mu * s.cwiseInverse() - res.nu) - sigma.cwiseProduct(r_g_soc);
            top_soc.noalias() += ev.jg.transpose() * t2;
          }
          rhs.head(n) = top_soc;
          rhs.tail(me) = -(alpha * ev.h + ht);
          const Eigen::VectorXd sol_soc = lu.solve(rhs);
          if (sol_soc.allFinite()) {
            const Eigen::VectorXd dz_c = sol_soc.head(n);
            const Eigen::VectorXd dlambda_c = sol_soc.tail(me);
            Eigen::VectorXd ds_c =
                mi ? Eigen::VectorXd(ev.jg * dz_c + r_g_soc) : Eigen::VectorXd();
            Eigen::VectorXd dnu_c =
                mi ? Eigen::VectorXd(mu * s.cwiseInverse() - res.nu - sigma.cwiseProduct(ds_c))
                   : Eigen::VectorXd();
            double a_c = 1.0, a_cd = 1.0;
            for (int i = 0; i < mi; ++i) {
              if (ds_c[i] < 0.0) a_c = std::min(a_c, -0.995 * s[i] / ds_c[i]);
              if (dnu_c[i] < 0.0) a_cd = std::min(a_cd, -0.995 * res.nu[i] / dnu_c[i]);
            }
            const Eigen::VectorXd z_c = res.z + a_c * dz_c;
            const Eigen::VectorXd s_c = s + a_c * ds_c;
            Eigen::VectorXd h_c, g_c;
            if (merit_at(z_c, s_c, h_c, g_c) <= phi0 + 1e-4 * a_c * dphi) {
              zt = z_c;
              st = s_c;
              dz = dz_c;
              ds = ds_c;
              dlambda = dlambda_c;
              dnu = dnu_c;
              alpha = a_c;
              alpha_dual = a_cd;
              accepted = true;
              if (opts_.verbose) std::printf("    soc accepted (alpha=%.3e)\n", a_c);
              break;
            }
          }
        }
        alpha *= 0.5;
        if (alpha < 1e-12) break;
      }
      if (!accepted) {
        if (opts_.verbose) {
          std::printf("  line search failed: delta=%g dphi=%g amax=%g |dz|=%g theta0=%g\n",
                      delta, dphi, alpha_max, dz.cwiseAbs().maxCoeff(), theta0);
        }
        delta = delta == 0.0 ? 1e-8 : delta * 100.0;
        if (delta > 1e8) break;
        continue;
      }

      res.z = zt;
      s = st.cwiseMax(1e-14);
      res.lambda += alpha * dlambda;
      if (mi) {
        res.nu = (res.nu + alpha_dual * dnu).cwiseMax(1e-14);
        // Keep multipliers within a large factor of mu/s (sigma safeguard).
        constexpr double kSigmaCap = 1e10;
        for (int i = 0; i < mi; ++i) {
          const double center = mu / s[i];
          res.nu[i] = std::clamp(res.nu[i], center / kSigmaCap, center * kSigmaCap);
        }
      }
      ev.compute(problem, res.z);
      if (opts_.verbose) {
        std::printf("    step: alpha=%.3e amax=%.3e adual=%.3e delta=%.1e |dz|=%.2e rho=%.1e\n",
                    alpha, alpha_max, alpha_dual, delta, dz.cwiseAbs().maxCoeff(), rho);
      }
      // Severely truncated steps signal a poor local model; regularize the
      // next iteration and relax again after healthy steps.
      if (alpha < 1e-3 * alpha_max) {
        delta_carry = std::clamp(delta == 0.0 ? 1e-6 : 10.0 * delta, delta_carry, 1e2);
      } else if (alpha > 0.5 * alpha_max) {
        delta_carry = delta_carry > 1e-10 ? delta_carry / 5.0 : 0.0;
      }
      stepped = true;
    }

    if (!stepped) {
      const double viol_now = true_violation(ev.h, ev.g);
      if (viol_now <= opts_.tol) {
        // Feasible but stuck. Try the certificate, then restart the duals.
        if (certify_kkt(ev, me, mi, opts_.tol, res)) {
          res.status = NlpStatus::Converged;
          res.constraint_violation = viol_now;
          if (opts_.verbose) std::printf("  certified KKT point after stall\n");
          break;
        }
        if (dual_restarts >= 2) break;  // give up as MaxIterations
        ++dual_restarts;
        if (opts_.verbose) std::printf("  dual restart (#%d)\n", dual_restarts);
        mu = std::max(mu, 1e-4);
        s = (ev.g.array() + tau).max(std::max(1e-6, 0.1 * mu)).matrix();
        for (int i = 0; i < mi; ++i) res.nu[i] = std::clamp(mu / s[i], 1e-8, 1e6);
        res.lambda.setZero();
        delta_carry = 0.0;
        continue;
      }
      if (opts_.verbose) std::printf("  entering restoration (#%d)\n", restorations + 1);
      if (restorations >= 3) {
        res.status = NlpStatus::Infeasible;
        break;
      }
      ++restorations;
      const double viol_after = restore_feasibility(problem, res.z, tau, 40);
      ev.compute(problem, res.z);
      if (viol_after > opts_.restoration_fail_viol) {
        res.status = NlpStatus::Infeasible;
        break;
      }
      s = (ev.g.array() + tau).max(std::max(1e-6, 0.1 * mu)).matrix();
      for (int i = 0; i < mi; ++i) res.nu[i] = std::clamp(mu / s[i], 1e-8, 1e6);
      res.lambda.setZero();
    }
  }

  res.iterations = iter;
  res.objective = ev.f;
  if (res.status != NlpStatus::Converged) {
    Eigen::VectorXd r_d = ev.grad;
    if (me) r_d.noalias() += ev.jh.transpose() * res.lambda;
    if (mi) r_d.noalias() -= ev.jg.transpose() * res.nu;
    res.constraint_violation = true_violation(ev.h, ev.g);
    const double comp_norm = mi ? inf_norm(s.cwiseProduct(res.nu)) : 0.0;
    res.kkt_residual = std::max({inf_norm(r_d), res.constraint_violation, comp_norm});
    if (res.status == NlpStatus::MaxIterations && inf_norm(r_d) <= opts_.tol &&
        res.constraint_violation <= opts_.tol && comp_norm <= opts_.tol && mu <= 1e-8) {
      res.status = NlpStatus::Converged;
    }
  }
  return res;
}

}  // namespace fieldnav
