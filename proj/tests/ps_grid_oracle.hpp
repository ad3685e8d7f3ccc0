#pragma once

// Dense grid-search oracle for the PS-calibration program on tiny instances:
// enumerates gamma over a lattice in [-3,3]^d, keeps points that satisfy the
// constraints exactly (via feasibility_report), and returns the minimal
// ||gamma - gamma_hat_padded||_1 among them. Independent of the production
// solver path by construction. d <= 4 only.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dcal/ps_calibration.hpp"

namespace dcal_test {

struct PsGridResult {
  Eigen::VectorXd gamma;
  double objective;
  int feasible_points;
};

inline std::optional<PsGridResult> ps_grid_oracle(
    const dcal::Dataset& main, const dcal::AugmentedDesign& aug, const Eigen::VectorXd& beta_hat,
    const Eigen::VectorXd& gamma_hat, const Eigen::VectorXd& mu_hat, const dcal::Link& phi,
    const dcal::Link& psi, const dcal::ResolvedTuning& tuning, bool plm = false,
    double step = 0.1) {
  const int d = static_cast<int>(aug.x_tilde.cols());
  if (d > 4) return std::nullopt;
  const Eigen::VectorXd anchor = dcal::pad_gamma(gamma_hat, d);

  std::vector<double> axis;
  for (double v = -3.0; v <= 3.0 + 1e-12; v += step) axis.push_back(v);
  const int m = static_cast<int>(axis.size());

  const dcal::PsFeasibilityChecker checker(main, aug, beta_hat, mu_hat, phi, psi, tuning, plm);
  std::optional<PsGridResult> best;
  int feas_count = 0;
  Eigen::VectorXd gamma(d);
  std::vector<int> idx(d, 0);
  while (true) {
    for (int k = 0; k < d; ++k) gamma[k] = axis[idx[k]];
    const dcal::PsConstraintReport rep = checker.report(gamma);
    if (rep.feasible(0.0)) {
      ++feas_count;
      const double obj = (gamma - anchor).lpNorm<1>();
      if (!best || obj < best->objective) best = PsGridResult{gamma, obj, 0};
    }
    int k = 0;
    while (k < d && ++idx[k] == m) idx[k++] = 0;
    if (k == d) break;
  }
  if (best) best->feasible_points = feas_count;
  return best;
}

}  // namespace dcal_test
