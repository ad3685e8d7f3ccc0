#include "dcal/pipeline.hpp"

#include <cmath>
#include <vector>

#include "dcal/errors.hpp"
#include "dcal/rng.hpp"

namespace dcal {

namespace {

// K-fold CV on an explicit design with per-coordinate penalty factors; used
// for the joint PLM fit where select_lambda's response enum does not apply.
double select_lambda_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Link& link,
                            const Eigen::VectorXd& pf, int folds, std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  if (n < 2 * folds) throw invalid_config_error("cv: need n >= 2K observations");
  if ((y.array() == y[0]).all()) throw data_error("cv: constant response");
  const double lam_max = lasso_detail::lambda_max(X, y, pf);
  if (lam_max <= 0.0) throw data_error("cv: response uncorrelated with all columns");

  constexpr int kGrid = 50;
  std::vector<double> grid(kGrid);
  const double ratio = std::pow(1e-3, 1.0 / (kGrid - 1));
  grid[0] = lam_max;
  for (int g = 1; g < kGrid; ++g) grid[g] = grid[g - 1] * ratio;

  CounterRng rng(seed, /*stream=*/0x43564b46ULL);
  const std::vector<int> perm = rng.permutation(n);
  std::vector<int> fold_of(n);
  for (int i = 0; i < n; ++i) fold_of[perm[i]] = i % folds;

  std::vector<double> cv(kGrid, 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> in, held;
    for (int i = 0; i < n; ++i) (fold_of[i] == f ? held : in).push_back(i);
    Eigen::MatrixXd Xin(in.size(), X.cols()), Xout(held.size(), X.cols());
    Eigen::VectorXd yin(in.size()), yout(held.size());
    for (std::size_t k = 0; k < in.size(); ++k) {
      Xin.row(static_cast<int>(k)) = X.row(in[k]);
      yin[static_cast<int>(k)] = y[in[k]];
    }
    for (std::size_t k = 0; k < held.size(); ++k) {
      Xout.row(static_cast<int>(k)) = X.row(held[k]);
      yout[static_cast<int>(k)] = y[held[k]];
    }
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
    for (int g = 0; g < kGrid; ++g) {
      const NuisanceFit fit = lasso_detail::fit(Xin, yin, link, grid[g], pf, &warm);
      warm = fit.coef;
      cv[g] += lasso_detail::deviance(Xout, yout, link, fit.coef);
    }
  }
  int best = 0;
  for (int g = 1; g < kGrid; ++g)
    if (cv[g] < cv[best] - 1e-15) best = g;
  return grid[best];
}

}  // namespace

NuisanceEstimates fit_nuisances(const Dataset& train, const FitOptions& opts,
                                std::uint64_t seed) {
  NuisanceEstimates out;
  const double lam_or =
      opts.lambda_or ? *opts.lambda_or
                     : select_lambda(train, Response::outcome_on_treated, *opts.psi,
                                     opts.cv_folds, CounterRng::derive(seed, 1));
  out.or_fit = fit_lasso_glm(train, Response::outcome_on_treated, *opts.psi, lam_or);

  const double lam_ps =
      opts.lambda_ps ? *opts.lambda_ps
                     : select_lambda(train, Response::treatment, *opts.phi, opts.cv_folds,
                                     CounterRng::derive(seed, 2));
  out.ps_fit = fit_lasso_glm(train, Response::treatment, *opts.phi, lam_ps);
  return out;
}

NuisanceEstimates fit_nuisances_plm(const Dataset& train, const FitOptions& opts,
                                    std::uint64_t seed) {
  const int n = train.n();
  const int p = train.p();

  // Joint design [X, T]; intercept and treatment unpenalized.
  Eigen::MatrixXd Xj(n, p + 1);
  Xj.leftCols(p) = train.X;
  Xj.col(p) = train.T;
  Eigen::VectorXd pf = Eigen::VectorXd::Ones(p + 1);
  pf[0] = 0.0;
  pf[p] = 0.0;

  const double lam_or =
      opts.lambda_or ? *opts.lambda_or
                     : select_lambda_design(Xj, train.Y, *opts.psi, pf, opts.cv_folds,
                                            CounterRng::derive(seed, 1));
  const NuisanceFit joint = lasso_detail::fit(Xj, train.Y, *opts.psi, lam_or, pf, nullptr);

  NuisanceEstimates out;
  out.or_fit.coef = joint.coef.head(p);
  out.or_fit.link = *opts.psi;
  out.or_fit.lambda = joint.lambda;
  out.or_fit.n_iter = joint.n_iter;
  out.or_fit.converged = joint.converged;
  out.or_fit.kkt_max_violation = joint.kkt_max_violation;
  out.tau_init = joint.coef[p];

  const double lam_ps =
      opts.lambda_ps ? *opts.lambda_ps
                     : select_lambda(train, Response::treatment, *opts.phi, opts.cv_folds,
                                     CounterRng::derive(seed, 2));
  out.ps_fit = fit_lasso_glm(train, Response::treatment, *opts.phi, lam_ps);
  return out;
}

}  // namespace dcal
