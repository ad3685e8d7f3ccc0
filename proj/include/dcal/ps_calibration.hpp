#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>

#include "dcal/dataset.hpp"
#include "dcal/link.hpp"
#include "dcal/tuning.hpp"

namespace dcal {

// Covariate augmentation: when p < n, append n-p synthetic Uniform[-1,1]
// columns so the true PS is exactly representable as phi(x_tilde' gamma).
// Regeneration with the same seed is bit-identical.
struct AugmentedDesign {
  Eigen::MatrixXd x_tilde;  // n x max(n, p); first p columns equal X
  std::uint64_t synth_seed = 0;
  int n_synth = 0;
};

AugmentedDesign augment_covariates(const Eigen::MatrixXd& X, std::uint64_t seed);

// Signed violations (residual minus tolerance, <= 0 means satisfied) per
// constraint family. Families absent from the active program stay at -inf.
struct PsConstraintReport {
  static constexpr double kAbsent = -std::numeric_limits<double>::infinity();
  double glm_direction = kAbsent;   // weighted-covariate moments, all j <= p
  double mu_direction = kAbsent;    // mu_hat direction (dropped when mu == 0)
  double augmented = kAbsent;       // augmented-covariate moments, all j <= max(n,p)
  double weight_bound = kAbsent;    // max_i T_i/pi_i - M_pi (PLM: max_i |pi_i| - M_pi)
  double variance_floor = kAbsent;  // PLM only: 1/M_pi - mean (T-pi)^2
  double ps_moment = kAbsent;       // PLM only: |mean (T-pi) pi| - eta_pi1 ||pi||_2 / sqrt(n)

  double max_violation() const;
  bool feasible(double tol) const { return max_violation() <= tol; }
};

struct PsCalibration {
  Eigen::VectorXd gamma_tilde;  // length max(n, p)
  bool feasible = false;
  bool fell_back = false;
  PsConstraintReport constraint_report;
  double objective = 0.0;  // ||gamma_tilde - gamma_hat_padded||_1
  int start_index = -1;
  int n_iter = 0;
};

// L1-minimal shift of gamma_hat subject to the treatment-balance constraints,
// with pi_i = phi(x_tilde_i' gamma). Solved by penalty continuation on squared
// hinge violations with proximal subgradient steps, multi-started from
// {gamma_hat padded, 0, gamma_hat + small seeded perturbation}; the best
// feasibility-certified point wins (ties broken by start index). Falls back to
// gamma_hat padded when no certified point is found.
PsCalibration calibrate_ps(const Dataset& main, const AugmentedDesign& aug,
                           const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                           const Eigen::VectorXd& mu_hat, const Link& phi, const Link& psi,
                           const ResolvedTuning& tuning);

// Partially-linear-model variant: T_i - pi_i replaces T_i/pi_i - 1 and the
// weight bound splits into max|pi| <= M_pi, a variance floor (enforced by
// rejection) and a pi-direction moment.
PsCalibration calibrate_ps_plm(const Dataset& main, const AugmentedDesign& aug,
                               const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& gamma_hat,
                               const Eigen::VectorXd& mu_hat, const Link& phi, const Link& psi,
                               const ResolvedTuning& tuning);

// Exact constraint residuals at an arbitrary gamma (length max(n,p)).
PsConstraintReport feasibility_report(const Eigen::VectorXd& gamma, const Dataset& main,
                                      const AugmentedDesign& aug, const Eigen::VectorXd& beta_hat,
                                      const Eigen::VectorXd& mu_hat, const Link& phi,
                                      const Link& psi, const ResolvedTuning& tuning,
                                      bool plm = false);

// Prebuilt program for repeated residual evaluations (diagnostics, grid
// scans); one construction amortizes the moment-column assembly.
class PsFeasibilityChecker {
 public:
  PsFeasibilityChecker(const Dataset& main, const AugmentedDesign& aug,
                       const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& mu_hat,
                       const Link& phi, const Link& psi, const ResolvedTuning& tuning, bool plm);
  ~PsFeasibilityChecker();
  PsFeasibilityChecker(PsFeasibilityChecker&&) noexcept;
  PsFeasibilityChecker& operator=(PsFeasibilityChecker&&) noexcept;

  PsConstraintReport report(const Eigen::VectorXd& gamma) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Pads a length-p vector with zeros up to max(n,p).
Eigen::VectorXd pad_gamma(const Eigen::VectorXd& gamma_hat, int d);

// Certification slack for "feasible" claims made by the solver.
constexpr double kPsCertTol = 1e-9;

}  // namespace dcal
