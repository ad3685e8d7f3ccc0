#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "dcal/dataset.hpp"
#include "dcal/link.hpp"

namespace dcal {

enum class Response { outcome_on_treated, treatment, outcome_all };

struct NuisanceFit {
  Eigen::VectorXd coef;  // length p, original scale
  Link link;
  double lambda = 0.0;
  int n_iter = 0;        // coordinate-descent sweeps
  bool converged = false;
  double kkt_max_violation = 0.0;
};

// L1-penalized GLM fit. The objective is
//   (1/n) sum_i loss(eta_i; y_i) + lambda * ||coef[1:]||_1
// with loss = (y-eta)^2/2 for the identity link, the canonical negative
// log-likelihood for logistic, and (y-value(eta))^2/2 for probit (penalized
// nonlinear least squares on the mean function). The intercept is never
// penalized. KKT stationarity of the returned point is certified in
// kkt_max_violation on the original coefficient scale.
NuisanceFit fit_lasso_glm(const Dataset& train, Response response, const Link& link,
                          double lambda);

// K-fold cross-validated deviance minimizer over a geometric grid of 50
// values from lambda_max down to 1e-3*lambda_max. Deterministic given seed.
double select_lambda(const Dataset& train, Response response, const Link& link, int folds,
                     std::uint64_t seed);

namespace lasso_detail {

// Core solver on an explicit design. penalty_factor[j] = 0 marks unpenalized
// coordinates (intercept; the treatment column of the joint PLM fit).
NuisanceFit fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Link& link,
                double lambda, const Eigen::VectorXd& penalty_factor,
                const Eigen::VectorXd* warm_start);

double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& penalty_factor);

double objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Link& link,
                 double lambda, const Eigen::VectorXd& penalty_factor,
                 const Eigen::VectorXd& coef);

// Gradient of the smooth (unpenalized) part at coef, original scale.
Eigen::VectorXd smooth_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Link& link, const Eigen::VectorXd& coef);

double deviance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Link& link,
                const Eigen::VectorXd& coef);

}  // namespace lasso_detail

}  // namespace dcal
