#include "dcal/or_calibration.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dcal/errors.hpp"

namespace dcal {

double trim_index(double eta, double m_gamma) {
  if (eta > m_gamma) return m_gamma;
  if (eta < -m_gamma) return -m_gamma;
  return eta;
}

TrimmedPs estimate_pi_hat(const Eigen::MatrixXd& X, const Eigen::VectorXd& gamma_hat,
                          const Link& phi, double m_gamma) {
  if (X.cols() != gamma_hat.size())
    throw invalid_config_error("estimate_pi_hat: dimension mismatch");
  if (!(m_gamma > 0.0)) throw invalid_config_error("estimate_pi_hat: M_gamma must be positive");
  const Eigen::VectorXd eta = X * gamma_hat;
  if (!eta.allFinite()) throw numeric_error("estimate_pi_hat: non-finite index");
  TrimmedPs out;
  out.m_gamma_used = m_gamma;
  out.pi_hat.resize(eta.size());
  out.index_trimmed.resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    out.index_trimmed[i] = std::abs(eta[i]) > m_gamma;
    out.pi_hat[i] = phi.value(trim_index(eta[i], m_gamma));
  }
  return out;
}

namespace {

QpInputs build_inputs_impl(const Dataset& main, const Dataset& aux,
                           const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                           const Link& psi, const Link& phi, double m_gamma, bool plm,
                           double tau_hat) {
  QpInputs qp;
  qp.n = main.n();
  qp.ps_main = estimate_pi_hat(main.X, gamma_hat, phi, m_gamma);
  qp.ps_aux = estimate_pi_hat(aux.X, gamma_hat, phi, m_gamma);

  const Eigen::VectorXd idx_main = main.X * gamma_hat;
  const Eigen::VectorXd idx_aux = aux.X * gamma_hat;

  qp.pi_diag.resize(main.n());
  for (int i = 0; i < main.n(); ++i) {
    const double dphi = phi.deriv(idx_main[i]);
    qp.pi_diag[i] = plm ? dphi : dphi / qp.ps_main.pi_hat[i];
  }
  qp.pi_diag_aux.resize(aux.n());
  for (int i = 0; i < aux.n(); ++i) {
    const double dphi = phi.deriv(idx_aux[i]);
    qp.pi_diag_aux[i] = plm ? dphi : dphi / qp.ps_aux.pi_hat[i];
  }

  qp.r_hat = eval_link_vector(psi, main.X * beta_hat);
  const Eigen::VectorXd r_hat_aux = eval_link_vector(psi, aux.X * beta_hat);

  qp.r_tilde_aux.resize(aux.n());
  for (int i = 0; i < aux.n(); ++i) {
    if (plm) {
      qp.r_tilde_aux[i] = aux.Y[i] - aux.T[i] * tau_hat - r_hat_aux[i];
    } else {
      qp.r_tilde_aux[i] =
          (aux.T[i] == 0.0) ? 0.0 : aux.T[i] / qp.ps_aux.pi_hat[i] * (aux.Y[i] - r_hat_aux[i]);
    }
  }

  qp.weighted_x = qp.pi_diag.asDiagonal() * main.X;
  qp.target = aux.X.transpose() * qp.pi_diag_aux.cwiseProduct(qp.r_tilde_aux) / double(aux.n());
  return qp;
}

struct AdmmResult {
  Eigen::VectorXd mu;
  double slab_residual;
  double fixed_point_residual;
  int iters;
};

// Splitting: z tracks A mu in the moment slab, s tracks mu in the box.
AdmmResult admm_solve(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, double eta, double m_r,
                      const Eigen::MatrixXd& gram) {
  const int n = static_cast<int>(W.rows());
  const int p = static_cast<int>(W.cols());
  const double nd = static_cast<double>(n);

  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-8;

  auto apply_a = [&](const Eigen::VectorXd& mu) -> Eigen::VectorXd {
    return W.transpose() * mu / nd;
  };
  auto apply_at = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return W * v / nd; };

  double rho = 1.0;
  Eigen::MatrixXd M = rho * gram;
  M.diagonal().array() += 2.0 / nd + rho;
  Eigen::LLT<Eigen::MatrixXd> llt(M);

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = b;  // feasible center of the slab
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd uz = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd us = Eigen::VectorXd::Zero(n);

  double pri = 0.0, dua = 0.0;
  int it = 0;
  int refactors = 0;
  double best_slab = std::numeric_limits<double>::infinity();
  int best_slab_iter = 0;

  for (it = 1; it <= kMaxIter; ++it) {
    const Eigen::VectorXd rhs = rho * (apply_at(z - uz) + (s - us));
    mu = llt.solve(rhs);
    const Eigen::VectorXd amu = apply_a(mu);

    const Eigen::VectorXd z_prev = z;
    const Eigen::VectorXd s_prev = s;
    z = ((amu + uz).array().max(b.array() - eta).min(b.array() + eta)).matrix();
    s = (mu + us).cwiseMax(-m_r).cwiseMin(m_r);
    uz += amu - z;
    us += mu - s;

    if (it % 25 == 0 || it == kMaxIter) {
      pri = std::max((amu - z).lpNorm<Eigen::Infinity>(), (mu - s).lpNorm<Eigen::Infinity>());
      dua = rho * (apply_at(z_prev - z) + (s_prev - s)).lpNorm<Eigen::Infinity>();
      const double scale =
          1.0 + std::max({amu.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>(),
                          mu.lpNorm<Eigen::Infinity>(), s.lpNorm<Eigen::Infinity>()});
      if (pri <= kEps * scale && dua <= kEps * scale) break;

      const double slab_res = (apply_a(s) - b).lpNorm<Eigen::Infinity>();
      if (slab_res < best_slab - 1e-12) {
        best_slab = slab_res;
        best_slab_iter = it;
      } else if (slab_res > eta && it - best_slab_iter > 4000) {
        break;  // stalled outside the slab: treat as infeasible at this eta
      }

      if (it % 100 == 0 && refactors < 20 && dua > 0.0 && pri > 0.0) {
        const double ratio = std::sqrt(pri / dua);
        if (ratio > 5.0 || ratio < 0.2) {
          rho = std::clamp(rho * ratio, 1e-6, 1e6);
          M = rho * gram;
          M.diagonal().array() += 2.0 / nd + rho;
          llt.compute(M);
          ++refactors;
        }
      }
    }
  }

  AdmmResult res;
  res.mu = s.cwiseMax(-m_r).cwiseMin(m_r);  // box holds exactly
  res.slab_residual = (apply_a(res.mu) - b).lpNorm<Eigen::Infinity>();
  res.fixed_point_residual = std::max(pri, dua);
  res.iters = std::min(it, kMaxIter);

  // Active-set polish: fix box-active coordinates, pin slab-active rows to
  // their boundary, and solve the resulting equality-constrained min-norm
  // problem. Accepted only when it stays feasible and does not increase the
  // objective.
  const Eigen::VectorXd amu = apply_a(res.mu);
  std::vector<int> act_slab, act_box, free_idx;
  const double tol_a = 1e-6 * (1.0 + eta);
  const double tol_b = 1e-6 * (1.0 + m_r);
  for (int j = 0; j < p; ++j)
    if (std::abs(std::abs(amu[j] - b[j]) - eta) <= tol_a) act_slab.push_back(j);
  for (int i = 0; i < n; ++i)
    if (std::abs(std::abs(res.mu[i]) - m_r) <= tol_b)
      act_box.push_back(i);
    else
      free_idx.push_back(i);

  if (!act_slab.empty() || !act_box.empty()) {
    Eigen::VectorXd mu_pol = Eigen::VectorXd::Zero(n);
    for (int i : act_box) mu_pol[i] = (res.mu[i] > 0 ? m_r : -m_r);
    if (!act_slab.empty() && !free_idx.empty()) {
      Eigen::MatrixXd C(act_slab.size(), free_idx.size());
      Eigen::VectorXd d(act_slab.size());
      for (std::size_t r = 0; r < act_slab.size(); ++r) {
        const int j = act_slab[r];
        for (std::size_t c = 0; c < free_idx.size(); ++c) C(r, c) = W(free_idx[c], j) / nd;
        double fixed_part = 0.0;
        for (int i : act_box) fixed_part += W(i, j) / nd * mu_pol[i];
        d[r] = b[j] + (amu[j] - b[j] > 0 ? eta : -eta) - fixed_part;
      }
      const Eigen::VectorXd mu_free =
          C.completeOrthogonalDecomposition().solve(d);  // minimum-norm solution
      for (std::size_t c = 0; c < free_idx.size(); ++c) mu_pol[free_idx[c]] = mu_free[c];
    }
    const double slab_pol = (apply_a(mu_pol) - b).lpNorm<Eigen::Infinity>();
    const bool box_ok = mu_pol.lpNorm<Eigen::Infinity>() <= m_r + 1e-10 * (1.0 + m_r);
    if (box_ok && slab_pol <= std::max(eta + 1e-10 * (1.0 + eta), res.slab_residual) &&
        mu_pol.squaredNorm() <= res.mu.squaredNorm() + 1e-12) {
      res.mu = mu_pol.cwiseMax(-m_r).cwiseMin(m_r);
      res.slab_residual = (apply_a(res.mu) - b).lpNorm<Eigen::Infinity>();
    }
  }
  return res;
}

}  // namespace

QpInputs build_qp_inputs(const Dataset& main, const Dataset& aux, const Eigen::VectorXd& beta_hat,
                         const Eigen::VectorXd& gamma_hat, const Link& psi, const Link& phi,
                         double m_gamma) {
  return build_inputs_impl(main, aux, beta_hat, gamma_hat, psi, phi, m_gamma, false, 0.0);
}

QpInputs build_qp_inputs_plm(const Dataset& main, const Dataset& aux,
                             const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                             double tau_hat, const Link& psi, const Link& phi, double m_gamma) {
  return build_inputs_impl(main, aux, beta_hat, gamma_hat, psi, phi, m_gamma, true, tau_hat);
}

OrCalibration solve_or_qp(const Eigen::MatrixXd& weighted_x, const Eigen::VectorXd& target,
                          double eta_r, double m_r) {
  if (!(eta_r > 0.0) || !(m_r > 0.0))
    throw invalid_config_error("calibrate_or: eta_r and M_r must be positive");
  const int n = static_cast<int>(weighted_x.rows());

  OrCalibration out;
  out.eta_r_used = eta_r;

  // mu = 0 is optimal whenever it is feasible (minimum-norm objective).
  if (target.lpNorm<Eigen::Infinity>() <= eta_r) {
    out.mu = Eigen::VectorXd::Zero(n);
    out.constraint_residual_inf = target.lpNorm<Eigen::Infinity>();
    out.feasible = true;
    return out;
  }

  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd gram = weighted_x * weighted_x.transpose() / (nd * nd);

  constexpr int kMaxEscalations = 10;
  constexpr double kFeasTol = 1e-7;
  double eta = eta_r;
  for (int esc = 0; esc <= kMaxEscalations; ++esc) {
    const AdmmResult res = admm_solve(weighted_x, target, eta, m_r, gram);
    if (res.slab_residual <= eta + kFeasTol) {
      out.mu = res.mu;
      out.constraint_residual_inf = res.slab_residual;
      out.eta_r_used = eta;
      out.feasible = true;
      out.objective = res.mu.squaredNorm() / nd;
      out.escalations = esc;
      out.fixed_point_residual = res.fixed_point_residual;
      out.n_iter = res.iters;
      return out;
    }
    if (esc == kMaxEscalations) {
      out.mu = Eigen::VectorXd::Zero(n);
      out.constraint_residual_inf = target.lpNorm<Eigen::Infinity>();
      out.eta_r_used = eta;
      out.feasible = false;
      out.objective = 0.0;
      out.escalations = esc;
      out.fixed_point_residual = res.fixed_point_residual;
      out.n_iter = res.iters;
      return out;
    }
    eta *= 1.5;
  }
  return out;  // unreachable
}

OrCalibration calibrate_or(const QpInputs& qp, const ResolvedTuning& tuning) {
  return solve_or_qp(qp.weighted_x, qp.target, tuning.eta_r, tuning.m_r);
}

Eigen::VectorXd oracle_mu(const Eigen::VectorXd& pi_star, const Eigen::VectorXd& r_star,
                          const Eigen::VectorXd& r_hat, const Eigen::VectorXd& pi_hat) {
  if (pi_star.size() != r_star.size() || r_star.size() != r_hat.size() ||
      r_hat.size() != pi_hat.size())
    throw invalid_config_error("oracle_mu: length mismatch");
  Eigen::VectorXd mu(pi_star.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (!(pi_star[i] > 0.0) || !(pi_hat[i] > 0.0))
      throw numeric_error("oracle_mu: propensity scores must be positive");
    mu[i] = pi_star[i] * (r_star[i] - r_hat[i]) / pi_hat[i];
  }
  return mu;
}

}  // namespace dcal
