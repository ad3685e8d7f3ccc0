#include "dcal/glm_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dcal/errors.hpp"
#include "dcal/math_util.hpp"
#include "dcal/rng.hpp"

namespace dcal {
namespace lasso_detail {

namespace {

constexpr int kMaxSweeps = 10000;
constexpr int kMaxOuter = 200;
constexpr double kCoefTol = 1e-9;  // max scaled coefficient change
constexpr double kWeightFloor = 1e-5;

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Cyclic coordinate descent for (1/(2n)) ||ys - Xs b||^2 + lambda sum pf_j |b_j|.
// Weighted problems are passed in with rows pre-scaled by sqrt(w). Columns are
// standardized implicitly through the second-moment denominators; coefficients
// and the penalty stay on the original scale.
double cd_sweep(const Eigen::MatrixXd& Xs, Eigen::VectorXd& resid, Eigen::VectorXd& beta,
                const Eigen::VectorXd& denom, double lambda, const Eigen::VectorXd& pf,
                const Eigen::VectorXd& conv_scale, const std::vector<int>& coords) {
  const double n = static_cast<double>(Xs.rows());
  double max_change = 0.0;
  for (int j : coords) {
    if (denom[j] <= 0.0) continue;  // constant-zero column
    const double rho = Xs.col(j).dot(resid) / n + denom[j] * beta[j];
    const double bj =
        (pf[j] > 0.0) ? soft_threshold(rho, lambda * pf[j]) / denom[j] : rho / denom[j];
    const double delta = bj - beta[j];
    if (delta != 0.0) {
      resid -= delta * Xs.col(j);
      beta[j] = bj;
      max_change = std::max(max_change, std::abs(delta) * conv_scale[j]);
    }
  }
  return max_change;
}

int cd_solve(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& ys, Eigen::VectorXd& beta,
             double lambda, const Eigen::VectorXd& pf, const Eigen::VectorXd& conv_scale,
             int sweep_budget) {
  const int p = static_cast<int>(Xs.cols());
  Eigen::VectorXd denom = Xs.colwise().squaredNorm() / double(Xs.rows());
  Eigen::VectorXd resid = ys - Xs * beta;

  std::vector<int> all(p);
  for (int j = 0; j < p; ++j) all[j] = j;

  int sweeps = 0;
  while (sweeps < sweep_budget) {
    double change = cd_sweep(Xs, resid, beta, denom, lambda, pf, conv_scale, all);
    ++sweeps;
    if (change < kCoefTol) break;
    std::vector<int> active;
    for (int j = 0; j < p; ++j)
      if (beta[j] != 0.0 || pf[j] == 0.0) active.push_back(j);
    while (sweeps < sweep_budget) {
      change = cd_sweep(Xs, resid, beta, denom, lambda, pf, conv_scale, active);
      ++sweeps;
      if (change < kCoefTol) break;
    }
  }
  return sweeps;
}

}  // namespace

double objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Link& link,
                 double lambda, const Eigen::VectorXd& pf, const Eigen::VectorXd& coef) {
  const int n = static_cast<int>(X.rows());
  const Eigen::VectorXd eta = X * coef;
  double loss = 0.0;
  switch (link.kind) {
    case Link::Kind::identity:
      loss = 0.5 * (y - eta).squaredNorm() / double(n);
      break;
    case Link::Kind::logistic: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += log1pexp(eta[i]) - y[i] * eta[i];
      loss = s / double(n);
      break;
    }
    default: {  // probit and custom: penalized NLS on the mean function
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = y[i] - link.value(eta[i]);
        s += 0.5 * r * r;
      }
      loss = s / double(n);
      break;
    }
  }
  double pen = 0.0;
  for (int j = 0; j < coef.size(); ++j) pen += pf[j] * std::abs(coef[j]);
  return loss + lambda * pen;
}

Eigen::VectorXd smooth_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Link& link, const Eigen::VectorXd& coef) {
  const int n = static_cast<int>(X.rows());
  const Eigen::VectorXd eta = X * coef;
  Eigen::VectorXd score(n);
  switch (link.kind) {
    case Link::Kind::identity:
      score = eta - y;
      break;
    case Link::Kind::logistic:
      for (int i = 0; i < n; ++i) score[i] = expit(eta[i]) - y[i];
      break;
    default:
      for (int i = 0; i < n; ++i) score[i] = -(y[i] - link.value(eta[i])) * link.deriv(eta[i]);
      break;
  }
  return X.transpose() * score / double(n);
}

double deviance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Link& link,
                const Eigen::VectorXd& coef) {
  const int n = static_cast<int>(X.rows());
  const Eigen::VectorXd eta = X * coef;
  double s = 0.0;
  switch (link.kind) {
    case Link::Kind::logistic:
      for (int i = 0; i < n; ++i) s += log1pexp(eta[i]) - y[i] * eta[i];
      break;
    default:
      for (int i = 0; i < n; ++i) {
        const double r = y[i] - link.value(eta[i]);
        s += 0.5 * r * r;
      }
      break;
  }
  return s / double(n);
}

NuisanceFit fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Link& link,
                double lambda, const Eigen::VectorXd& pf, const Eigen::VectorXd* warm_start) {
  if (lambda < 0.0) throw invalid_config_error("lasso: lambda must be nonnegative");
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n < 1 || p < 1) throw data_error("lasso: empty design");

  const Eigen::VectorXd conv_scale =
      (X.colwise().squaredNorm() / double(n)).cwiseSqrt().cwiseMax(1e-12);
  Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);

  NuisanceFit out;
  out.link = link;
  out.lambda = lambda;

  int sweeps = 0;
  bool coef_converged = false;

  if (link.kind == Link::Kind::identity) {
    sweeps = cd_solve(X, y, beta, lambda, pf, conv_scale, kMaxSweeps);
    coef_converged = sweeps < kMaxSweeps;
  } else {
    // Damped IRLS (logistic) / Gauss-Newton on the mean function (probit,
    // custom): weighted penalized LS inner solves on sqrt(w)-scaled rows.
    double obj = objective(X, y, link, lambda, pf, beta);
    Eigen::MatrixXd Xs(n, p);
    Eigen::VectorXd ys(n);
    for (int outer = 0; outer < kMaxOuter && sweeps < kMaxSweeps; ++outer) {
      const Eigen::VectorXd eta = X * beta;
      for (int i = 0; i < n; ++i) {
        double wi, zi;
        if (link.kind == Link::Kind::logistic) {
          const double m = expit(eta[i]);
          wi = std::max(m * (1.0 - m), kWeightFloor);
          zi = eta[i] + (y[i] - m) / wi;
        } else {
          double d = link.deriv(eta[i]);
          if (std::abs(d) < kWeightFloor) d = (d < 0.0) ? -kWeightFloor : kWeightFloor;
          wi = d * d;
          zi = eta[i] + (y[i] - link.value(eta[i])) / d;
        }
        const double sw = std::sqrt(wi);
        Xs.row(i) = sw * X.row(i);
        ys[i] = sw * zi;
      }
      Eigen::VectorXd beta_new = beta;
      sweeps += cd_solve(Xs, ys, beta_new, lambda, pf, conv_scale,
                         std::min(kMaxSweeps - sweeps, 1000));
      // Halve the step until the true penalized objective does not increase.
      double obj_new = objective(X, y, link, lambda, pf, beta_new);
      for (int h = 0; h < 30 && obj_new > obj + 1e-14 * (1.0 + std::abs(obj)); ++h) {
        beta_new = 0.5 * (beta_new + beta);
        obj_new = objective(X, y, link, lambda, pf, beta_new);
      }
      double max_change = 0.0;
      for (int j = 0; j < p; ++j)
        max_change =
            std::max(max_change, std::abs(beta_new[j] - beta[j]) * conv_scale[j]);
      beta = beta_new;
      obj = obj_new;
      if (max_change < kCoefTol) {
        coef_converged = true;
        break;
      }
    }
  }

  out.coef = beta;
  out.n_iter = sweeps;

  // KKT certificate on the stated objective, original coefficient scale.
  const Eigen::VectorXd g = smooth_gradient(X, y, link, beta);
  double viol = 0.0;
  for (int j = 0; j < p; ++j) {
    if (pf[j] == 0.0) {
      viol = std::max(viol, std::abs(g[j]));
    } else if (beta[j] == 0.0) {
      viol = std::max(viol, std::abs(g[j]) - lambda * pf[j]);
    } else {
      viol = std::max(viol, std::abs(g[j] + lambda * pf[j] * (beta[j] > 0 ? 1.0 : -1.0)));
    }
  }
  out.kkt_max_violation = std::max(viol, 0.0);
  const double kkt_tol = 1e-6 * (1.0 + lambda);
  out.converged = coef_converged && out.kkt_max_violation <= kkt_tol;
  return out;
}

double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& pf) {
  const int n = static_cast<int>(X.rows());
  const Eigen::VectorXd yc = y.array() - y.mean();
  double lam = 0.0;
  for (int j = 0; j < X.cols(); ++j) {
    if (pf[j] == 0.0) continue;
    lam = std::max(lam, std::abs(X.col(j).dot(yc)) / double(n));
  }
  return lam;
}

}  // namespace lasso_detail

namespace {

void response_view(const Dataset& train, Response response, Eigen::MatrixXd& X,
                   Eigen::VectorXd& y) {
  switch (response) {
    case Response::treatment:
      X = train.X;
      y = train.T;
      return;
    case Response::outcome_all:
      X = train.X;
      y = train.Y;
      return;
    case Response::outcome_on_treated: {
      std::vector<int> idx;
      for (int i = 0; i < train.n(); ++i)
        if (train.T[i] == 1.0) idx.push_back(i);
      if (static_cast<int>(idx.size()) < 10)
        throw data_error("outcome_on_treated requires at least 10 treated rows, found " +
                         std::to_string(idx.size()));
      X.resize(static_cast<int>(idx.size()), train.p());
      y.resize(static_cast<int>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) {
        X.row(static_cast<int>(k)) = train.X.row(idx[k]);
        y[static_cast<int>(k)] = train.Y[idx[k]];
      }
      return;
    }
  }
  throw invalid_config_error("unknown response");
}

Eigen::VectorXd default_penalty_factor(int p) {
  Eigen::VectorXd pf = Eigen::VectorXd::Ones(p);
  pf[0] = 0.0;  // intercept unpenalized
  return pf;
}

}  // namespace

NuisanceFit fit_lasso_glm(const Dataset& train, Response response, const Link& link,
                          double lambda) {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  response_view(train, response, X, y);
  return lasso_detail::fit(X, y, link, lambda, default_penalty_factor(train.p()), nullptr);
}

double select_lambda(const Dataset& train, Response response, const Link& link, int folds,
                     std::uint64_t seed) {
  if (folds < 2) throw invalid_config_error("select_lambda: K must be >= 2");
  if (train.n() < 2 * folds) throw invalid_config_error("select_lambda: need n >= 2K observations");

  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  response_view(train, response, X, y);
  const int n = static_cast<int>(X.rows());
  if ((y.array() == y[0]).all()) throw data_error("select_lambda: constant response");

  const Eigen::VectorXd pf = default_penalty_factor(static_cast<int>(X.cols()));
  const double lam_max = lasso_detail::lambda_max(X, y, pf);
  if (lam_max <= 0.0) throw data_error("select_lambda: response uncorrelated with all columns");

  constexpr int kGrid = 50;
  std::vector<double> grid(kGrid);
  const double ratio = std::pow(1e-3, 1.0 / (kGrid - 1));
  grid[0] = lam_max;
  for (int g = 1; g < kGrid; ++g) grid[g] = grid[g - 1] * ratio;

  // Deterministic fold assignment: permuted indices dealt round-robin.
  CounterRng rng(seed, /*stream=*/0x43564b46ULL);  // "CVKF"
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
    // Warm-started path from the largest lambda down.
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
    for (int g = 0; g < kGrid; ++g) {
      const NuisanceFit path_fit = lasso_detail::fit(Xin, yin, link, grid[g], pf, &warm);
      warm = path_fit.coef;
      cv[g] += lasso_detail::deviance(Xout, yout, link, path_fit.coef);
    }
  }

  int best = 0;
  for (int g = 1; g < kGrid; ++g)
    if (cv[g] < cv[best] - 1e-15) best = g;  // ties go to the larger lambda
  return grid[best];
}

}  // namespace dcal
