#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dcal/dataset.hpp"
#include "dcal/glm_lasso.hpp"
#include "dcal/link.hpp"
#include "dcal/tuning.hpp"

namespace dcal {

// Clip an index to [-m_gamma, m_gamma].
double trim_index(double eta, double m_gamma);

// Propensity scores from the trimmed index: pi_i = phi(trim(x_i' gamma)).
struct TrimmedPs {
  Eigen::VectorXd pi_hat;
  std::vector<bool> index_trimmed;
  double m_gamma_used = 0.0;

  int trimmed_count() const {
    int c = 0;
    for (bool b : index_trimmed) c += b;
    return c;
  }
};

TrimmedPs estimate_pi_hat(const Eigen::MatrixXd& X, const Eigen::VectorXd& gamma_hat,
                          const Link& phi, double m_gamma);

// Everything the OR-calibration QP needs, assembled once per estimate:
// row weights Pi on main/aux, the plug-in r_hat on main, the aux residual
// vector, and the moment target b = (1/n_aux) X_aux' Pi_aux R_aux.
struct QpInputs {
  Eigen::MatrixXd weighted_x;   // diag(Pi) * X on main, n x p
  Eigen::VectorXd pi_diag;      // Pi_ii on main
  Eigen::VectorXd pi_diag_aux;
  Eigen::VectorXd r_hat;        // psi(X beta_hat) on main
  Eigen::VectorXd r_tilde_aux;  // residual vector on aux
  Eigen::VectorXd target;       // b, length p
  TrimmedPs ps_main;
  TrimmedPs ps_aux;
  int n = 0;
};

// ATE version: Pi_ii = phi'(x_i' gamma_hat) / pi_hat_i and
// R_aux_i = T_i / pi_hat_i * (Y_i - r_hat_i).
QpInputs build_qp_inputs(const Dataset& main, const Dataset& aux,
                         const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                         const Link& psi, const Link& phi, double m_gamma);

// PLM version: Pi_ii = phi'(x_i' gamma_hat) and R_aux_i = Y_i - T_i tau - r_hat_i.
QpInputs build_qp_inputs_plm(const Dataset& main, const Dataset& aux,
                             const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                             double tau_hat, const Link& psi, const Link& phi, double m_gamma);

struct OrCalibration {
  Eigen::VectorXd mu;                 // length n
  double constraint_residual_inf = 0.0;
  double eta_r_used = 0.0;
  bool feasible = false;
  double objective = 0.0;             // (1/n) ||mu||_2^2
  int escalations = 0;
  double fixed_point_residual = 0.0;  // final ADMM primal/dual residual
  int n_iter = 0;
};

// Solves  min (1/n)||mu||^2  s.t.  ||b - (1/n) X' Pi mu||_inf <= eta_r,
// ||mu||_inf <= M_r  by operator-splitting ADMM (proximal step on the
// quadratic, alternating projections onto the moment slab and the box) with
// an active-set polish. When the slab is infeasible at eta_r the tolerance is
// escalated by 1.5x up to 10 times; if still infeasible, mu = 0 is returned
// with feasible = false.
OrCalibration calibrate_or(const QpInputs& qp, const ResolvedTuning& tuning);

// Same solver on raw pieces (used by tests and the oracle comparisons).
OrCalibration solve_or_qp(const Eigen::MatrixXd& weighted_x, const Eigen::VectorXd& target,
                          double eta_r, double m_r);

// Lemma-5 style oracle calibrator, test-harness use: pi*_i (r*_i - rhat_i) / pihat_i.
Eigen::VectorXd oracle_mu(const Eigen::VectorXd& pi_star, const Eigen::VectorXd& r_star,
                          const Eigen::VectorXd& r_hat, const Eigen::VectorXd& pi_hat);

}  // namespace dcal
