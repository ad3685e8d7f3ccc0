#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "dcal/dataset.hpp"
#include "dcal/glm_lasso.hpp"
#include "dcal/or_calibration.hpp"
#include "dcal/ps_calibration.hpp"
#include "dcal/tuning.hpp"

namespace dcal {

enum class EstimatorKind { dml, scal_r, dcal, dcal_plm, oracle };

const char* estimator_name(EstimatorKind k);
EstimatorKind estimator_from_name(const std::string& name);

struct Diagnostics {
  double mu_norm2 = 0.0;        // ||mu_hat||_2
  double gamma_shift_l1 = 0.0;  // ||gamma_tilde - gamma_hat padded||_1
  bool fell_back = false;
  bool or_feasible = true;
  int escalations = 0;
  int trimmed_count = 0;
  double sigma_e_tilde2 = std::numeric_limits<double>::quiet_NaN();  // PLM only
  bool degenerate_variance = false;                                  // PLM only
};

struct EstimateReport {
  EstimatorKind estimator_kind = EstimatorKind::dml;
  double tau_hat = 0.0;
  double se = 0.0;
  std::pair<double, double> ci{0.0, 0.0};
  int n_used = 0;
  Diagnostics diagnostics;
};

// AIPW influence-function core H = T/pi (Y - r) + r. Valid for pi in (0, 1];
// untreated rows contribute r alone.
double aipw_score(double t, double y, double pi, double r);

// Normal-quantile interval tau_hat -+ z_{1-(1-level)/2} * se.
std::pair<double, double> confidence_interval(double tau_hat, double se, double level);

// Nuisance fits from the training split (plus the initial tau for the PLM).
struct NuisanceEstimates {
  NuisanceFit or_fit;  // beta_hat with OR link psi
  NuisanceFit ps_fit;  // gamma_hat with PS link phi
  double tau_init = std::numeric_limits<double>::quiet_NaN();
};

// Plug-in AIPW average with the trimmed PS (tau_hat = mean H_i, SE = sd/sqrt n).
EstimateReport estimate_dml(const Dataset& main, const NuisanceEstimates& fits,
                            const ResolvedTuning& tuning);

// OR-calibrated estimator: r_tilde = r_hat + mu_hat from the calibration QP.
EstimateReport estimate_scal_r(const SplitData& split, const NuisanceEstimates& fits,
                               const ResolvedTuning& tuning);

// Doubly calibrated: r_tilde as above, pi_tilde = phi(x_tilde' gamma_tilde).
EstimateReport estimate_dcal(const SplitData& split, const NuisanceEstimates& fits,
                             const ResolvedTuning& tuning, std::uint64_t synth_seed);

// Regression-coefficient estimator in the partially linear model.
EstimateReport estimate_dcal_plm(const SplitData& split, const NuisanceEstimates& fits,
                                 const ResolvedTuning& tuning, std::uint64_t synth_seed);

// AIPW with known truth (test harness / oracle studies).
EstimateReport estimate_oracle(const Dataset& main, const Eigen::VectorXd& pi_star,
                               const Eigen::VectorXd& r_star, double level);

// Full intermediate state of one DCal run, for diagnostics and tests.
struct DcalDetail {
  EstimateReport report;
  QpInputs qp;
  OrCalibration or_cal;
  AugmentedDesign aug;
  PsCalibration ps_cal;
  Eigen::VectorXd pi_tilde;
  Eigen::VectorXd r_tilde;
};

DcalDetail estimate_dcal_detailed(const SplitData& split, const NuisanceEstimates& fits,
                                  const ResolvedTuning& tuning, std::uint64_t synth_seed);

DcalDetail estimate_dcal_plm_detailed(const SplitData& split, const NuisanceEstimates& fits,
                                      const ResolvedTuning& tuning, std::uint64_t synth_seed);

// Plug-ins of the three asymptotic-variance displays (test harness use).
struct OracleVariances {
  double sigma_bar_r2;
  double sigma_bar_pi2;
  double sigma_mu2;
};

OracleVariances oracle_variances(const Eigen::VectorXd& t, const Eigen::VectorXd& pi_star,
                                 const Eigen::VectorXd& pi_tilde, const Eigen::VectorXd& r_star,
                                 const Eigen::VectorXd& r_tilde, double eps_var);

}  // namespace dcal
