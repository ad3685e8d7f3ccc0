#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

#include "dcal/dataset.hpp"

namespace dcal {

// Seeded data-generating processes covering every regime the theory
// distinguishes. At least one nuisance is a true GLM per regime; the other
// side is a fixed, documented dense nonlinearity so runs are reproducible and
// tau_bar_star is computable exactly per replication.
enum class Regime {
  sparse_or_dense_ps,
  sparse_ps_dense_or,
  both_sparse,
  approx_sparse_or,
  approx_sparse_ps,
  plm_sparse_or,
  plm_sparse_ps,
};

const char* regime_name(Regime r);
Regime regime_from_name(const std::string& name);
bool regime_is_plm(Regime r);

struct DgpConfig {
  Regime regime = Regime::sparse_or_dense_ps;
  int n = 400;
  int n_aux = 400;
  int n_tr = 400;
  int p = 500;
  int s_r = 3;
  int s_pi = 3;
  double xi_r = 1.0;   // approx-sparse decay exponents
  double xi_pi = 1.0;
  double c_pi = 0.1;   // overlap bound, enforced by clipping the logit index
  double noise_sd = 1.0;
  double tau_star = 1.0;       // PLM regression coefficient
  double covariate_rho = 0.3;  // AR(1) correlation of the covariates

  void validate() const;
};

struct DgpTruth {
  Eigen::VectorXd r_star;   // over the main split
  Eigen::VectorXd pi_star;  // over the main split
  double tau_bar_star = 0.0;
  Eigen::VectorXd beta_star;   // empty unless the OR is GLM-true
  Eigen::VectorXd gamma_star;  // empty unless the PS is GLM-true
  double eps_var = 0.0;        // variance of the clipped outcome noise
};

// Generates disjoint main/aux/train splits of sizes (n, n_aux, n_tr).
// Identical (config, seed) pairs produce bit-identical data.
std::pair<SplitData, DgpTruth> generate(const DgpConfig& config, std::uint64_t seed);

struct PopulationTau {
  double mean;
  double mc_se;
};

// Monte Carlo average of tau_bar_star across fresh replications.
PopulationTau population_tau(const DgpConfig& config, std::uint64_t seed_stream, int reps);

// The e-noise scale of the PLM designs (T = pi* + e, e clipped at 3 sd).
constexpr double kPlmTreatmentNoiseSd = 0.5;

}  // namespace dcal
