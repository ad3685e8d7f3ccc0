#pragma once

#include <Eigen/Dense>
#include <optional>

#include "dcal/dataset.hpp"
#include "dcal/link.hpp"

namespace dcal {

// Calibration tuning constants. Unset fields are resolved from the data by
// resolve_tuning(); every field can be pinned explicitly instead.
struct TuningParams {
  std::optional<double> eta_r;
  std::optional<double> eta_pi1;
  std::optional<double> eta_pi2;
  std::optional<double> m_r;
  std::optional<double> m_pi;
  std::optional<double> m_gamma;
  double level = 0.95;

  void check() const;  // throws invalid_config_error on non-positive values
};

// Fully resolved constants used by the calibration programs.
struct ResolvedTuning {
  double eta_r;
  double eta_pi1;
  double eta_pi2;
  double m_r;
  double m_pi;
  double m_gamma;
  double level;
};

// Scale-aware defaults:
//   eta_r   = c_r  * sqrt(log p / n)
//   eta_pi1 = c_pi1 * sqrt(log p / n)
//   eta_pi2 = c_pi2 * sqrt(log(max(p, n)) / n)
//   m_r     = 2 * max |Y| over train+aux
//   m_gamma = 1.1 * max_train |x' gamma_hat|, clamped to [2, 10]
//   m_pi    = 2 / min_main pi_hat (trimmed)
// The c_* constants live in tuning.cpp next to their calibration notes.
ResolvedTuning resolve_tuning(const TuningParams& params, const SplitData& split,
                              const Eigen::VectorXd& gamma_hat, const Link& phi);

extern const double kDefaultEtaRScale;    // c_r
extern const double kDefaultEtaPi1Scale;  // c_pi1
extern const double kDefaultEtaPi2Scale;  // c_pi2

}  // namespace dcal
