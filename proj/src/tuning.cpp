#include "dcal/tuning.hpp"

#include <algorithm>
#include <cmath>

#include "dcal/errors.hpp"
#include "dcal/or_calibration.hpp"

namespace dcal {

// Scale constants for the eta defaults. The theory only asks for
// eta ~ sqrt(log p / n) with "sufficiently large" constants; these values were
// calibrated on the seeded feasibility studies in the acceptance suite (the
// truth-feasibility rate of the PS program and the oracle-feasibility rate of
// the OR program both need union-bound sized constants at n in the hundreds).
const double kDefaultEtaRScale = 3.0;
const double kDefaultEtaPi1Scale = 3.0;
const double kDefaultEtaPi2Scale = 3.0;

void TuningParams::check() const {
  auto pos = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0))
      throw invalid_config_error(std::string("tuning: ") + name + " must be positive");
  };
  pos(eta_r, "eta_r");
  pos(eta_pi1, "eta_pi1");
  pos(eta_pi2, "eta_pi2");
  pos(m_r, "M_r");
  pos(m_pi, "M_pi");
  pos(m_gamma, "M_gamma");
  if (!(level > 0.0 && level < 1.0))
    throw invalid_config_error("tuning: level must lie in (0,1)");
}

ResolvedTuning resolve_tuning(const TuningParams& params, const SplitData& split,
                              const Eigen::VectorXd& gamma_hat, const Link& phi) {
  params.check();
  const double n = static_cast<double>(split.main.n());
  const double p = static_cast<double>(split.main.p());

  ResolvedTuning t;
  t.level = params.level;
  t.eta_r = params.eta_r.value_or(kDefaultEtaRScale * std::sqrt(std::log(p) / n));
  t.eta_pi1 = params.eta_pi1.value_or(kDefaultEtaPi1Scale * std::sqrt(std::log(p) / n));
  t.eta_pi2 =
      params.eta_pi2.value_or(kDefaultEtaPi2Scale * std::sqrt(std::log(std::max(p, n)) / n));

  if (params.m_r) {
    t.m_r = *params.m_r;
  } else {
    const double y_max =
        std::max(split.train.Y.cwiseAbs().maxCoeff(), split.aux.Y.cwiseAbs().maxCoeff());
    t.m_r = 2.0 * std::max(y_max, 1e-8);
  }

  if (params.m_gamma) {
    t.m_gamma = *params.m_gamma;
  } else {
    const double idx_max = (split.train.X * gamma_hat).cwiseAbs().maxCoeff();
    t.m_gamma = std::clamp(1.1 * idx_max, 2.0, 10.0);
  }

  if (params.m_pi) {
    t.m_pi = *params.m_pi;
  } else {
    const TrimmedPs ps = estimate_pi_hat(split.main.X, gamma_hat, phi, t.m_gamma);
    t.m_pi = 2.0 / ps.pi_hat.minCoeff();
  }
  return t;
}

}  // namespace dcal
