#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dcal/errors.hpp"
#include "dcal/glm_lasso.hpp"
#include "dcal/math_util.hpp"
#include "dcal/rng.hpp"

using namespace dcal;

namespace {

double soft_threshold_ref(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Design with exactly orthonormal columns in the (1/n) X'X = I sense:
// scaled Haar-like construction via QR of a random matrix.
Eigen::MatrixXd orthonormal_design(int n, int p, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd raw(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) raw(i, j) = rng.normal();
  // force the first column toward the intercept direction before QR
  raw.col(0).setOnes();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  Q *= std::sqrt(static_cast<double>(n));  // unit second moment per column
  // rescale col 0 to be exactly the intercept: Q's first col is +-1/sqrt(n)*sqrt(n)
  if (Q(0, 0) < 0) Q.col(0) *= -1.0;
  return Q;
}

Dataset gaussian_toy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Dataset d;
  d.X = X;
  d.Y = y;
  d.T = Eigen::VectorXd::Ones(X.rows());
  return d;
}

}  // namespace

TEST_CASE("lambda above max correlation kills all non-intercept coefficients") {
  CounterRng rng(11);
  const int n = 40, p = 6;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) X(i, j) = rng.uniform(-2.0, 2.0);
    y[i] = rng.normal();
  }
  y.array() -= y.mean();  // centered response
  double lam_max = 0.0;
  for (int j = 1; j < p; ++j) lam_max = std::max(lam_max, std::abs(X.col(j).dot(y)) / n);

  const NuisanceFit fit =
      fit_lasso_glm(gaussian_toy(X, y), Response::outcome_all, Link::identity(), 10.0 * lam_max);
  for (int j = 1; j < p; ++j) CHECK(fit.coef[j] == 0.0);
  CHECK(fit.converged);
}

TEST_CASE("orthonormal design: per-coordinate soft threshold closed form") {
  const int n = 64, p = 5;
  const Eigen::MatrixXd X = orthonormal_design(n, p, 21);
  CounterRng rng(22);
  Eigen::VectorXd beta_true(p);
  beta_true << 0.5, 1.0, -2.0, 0.0, 0.3;
  Eigen::VectorXd y = X * beta_true;
  for (int i = 0; i < n; ++i) y[i] += 0.1 * rng.normal();

  for (double lambda : {0.05, 0.2, 0.7}) {
    const NuisanceFit fit =
        fit_lasso_glm(gaussian_toy(X, y), Response::outcome_all, Link::identity(), lambda);
    for (int j = 0; j < p; ++j) {
      const double rho = X.col(j).dot(y) / n;
      const double denom = X.col(j).squaredNorm() / n;  // ~= 1 exactly by construction
      const double want = (j == 0) ? rho / denom : soft_threshold_ref(rho, lambda) / denom;
      CHECK(fit.coef[j] == doctest::Approx(want).epsilon(1e-8));
    }
    CHECK(fit.kkt_max_violation <= 1e-6 * (1.0 + lambda));
  }
}

TEST_CASE("tiny logistic instance matches a dense grid-search oracle") {
  Eigen::MatrixXd X(3, 2);
  X << 1.0, 0.5, 1.0, -1.0, 1.0, 1.0;
  Eigen::VectorXd y(3);
  y << 1.0, 0.0, 1.0;
  const double lambda = 0.1;

  // Independent oracle: dense grid over [-3,3]^2, refined once.
  auto objective = [&](double b0, double b1) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double eta = b0 * X(i, 0) + b1 * X(i, 1);
      s += log1pexp(eta) - y[i] * eta;
    }
    return s / 3.0 + lambda * std::abs(b1);
  };
  double best0 = 0, best1 = 0, best = 1e300;
  for (double b0 = -3.0; b0 <= 3.0; b0 += 0.01)
    for (double b1 = -3.0; b1 <= 3.0; b1 += 0.01) {
      const double v = objective(b0, b1);
      if (v < best) {
        best = v;
        best0 = b0;
        best1 = b1;
      }
    }
  for (double b0 = best0 - 0.01; b0 <= best0 + 0.01; b0 += 0.0005)
    for (double b1 = best1 - 0.01; b1 <= best1 + 0.01; b1 += 0.0005) {
      const double v = objective(b0, b1);
      if (v < best) {
        best = v;
        best0 = b0;
        best1 = b1;
      }
    }

  Dataset d = gaussian_toy(X, y);
  const NuisanceFit fit = fit_lasso_glm(d, Response::outcome_all, Link::logistic(), lambda);
  CHECK(std::abs(fit.coef[0] - best0) < 1e-2);
  CHECK(std::abs(fit.coef[1] - best1) < 1e-2);
}

TEST_CASE("kkt certificate on random instances, all links") {
  CounterRng rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 30 + rng.uniform_int(40);
    const int p = 3 + rng.uniform_int(8);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j < p; ++j) X(i, j) = rng.uniform(-2.0, 2.0) * (1.0 + (j % 3));
      y[i] = rng.normal();
    }
    const Link& link = (rep % 3 == 0)   ? Link::identity()
                       : (rep % 3 == 1) ? Link::logistic()
                                        : Link::probit();
    if (link.kind != Link::Kind::identity)
      for (int i = 0; i < n; ++i) y[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
    const double lambda = 0.01 + 0.2 * rng.uniform();
    const NuisanceFit fit = fit_lasso_glm(gaussian_toy(X, y), Response::outcome_all, link, lambda);
    CHECK(fit.kkt_max_violation <= 1e-6 * (1.0 + lambda));
  }
}

TEST_CASE("logistic gradient matches finite differences of the smooth part") {
  CounterRng rng(41);
  const int n = 25, p = 4;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) X(i, j) = rng.uniform(-2.0, 2.0);
    y[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
  }
  Eigen::VectorXd beta(p);
  beta << 0.2, -0.4, 0.9, 0.1;
  const Eigen::VectorXd pf = Eigen::VectorXd::Ones(p);
  const Eigen::VectorXd g = lasso_detail::smooth_gradient(X, y, Link::logistic(), beta);
  const double h = 1e-6;
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd bp = beta, bm = beta;
    bp[j] += h;
    bm[j] -= h;
    const double fd = (lasso_detail::objective(X, y, Link::logistic(), 0.0, pf, bp) -
                       lasso_detail::objective(X, y, Link::logistic(), 0.0, pf, bm)) /
                      (2.0 * h);
    CHECK(std::abs(g[j] - fd) <= 1e-6 * (1.0 + std::abs(fd)));
  }
}

TEST_CASE("warm-start path matches cold-start objectives") {
  CounterRng rng(51);
  const int n = 60, p = 12;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) X(i, j) = rng.uniform(-1.5, 1.5);
    y[i] = X(i, 1) - 0.5 * X(i, 2) + 0.3 * rng.normal();
  }
  Eigen::VectorXd pf = Eigen::VectorXd::Ones(p);
  pf[0] = 0.0;
  const double lam_top = lasso_detail::lambda_max(X, y, pf);
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(p);
  for (int g = 0; g < 8; ++g) {
    const double lambda = lam_top * std::pow(0.5, g);
    const NuisanceFit w = lasso_detail::fit(X, y, Link::identity(), lambda, pf, &warm);
    warm = w.coef;
    const NuisanceFit cold = lasso_detail::fit(X, y, Link::identity(), lambda, pf, nullptr);
    const double ow = lasso_detail::objective(X, y, Link::identity(), lambda, pf, w.coef);
    const double oc = lasso_detail::objective(X, y, Link::identity(), lambda, pf, cold.coef);
    CHECK(std::abs(ow - oc) <= 1e-8 * (1.0 + std::abs(oc)));
  }
}

TEST_CASE("select_lambda rejects degenerate responses and tiny folds") {
  CounterRng rng(61);
  const int n = 30, p = 4;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 2.0);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
  }
  Dataset d;
  d.X = X;
  d.Y = y;
  d.T = Eigen::VectorXd::Ones(n);
  CHECK_THROWS_AS(select_lambda(d, Response::outcome_all, Link::identity(), 5, 1), data_error);
  d.Y[0] = 3.0;
  CHECK_THROWS_AS(select_lambda(d, Response::outcome_all, Link::identity(), 1, 1),
                  invalid_config_error);

  // pure-noise response: selection completes and lands inside the grid
  for (int i = 0; i < n; ++i) d.Y[i] = rng.normal();
  const double lam = select_lambda(d, Response::outcome_all, Link::identity(), 5, 9);
  CHECK(lam > 0.0);
  CHECK(std::isfinite(lam));
}

TEST_CASE("select_lambda is deterministic given the seed") {
  CounterRng rng(71);
  const int n = 50, p = 8;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
    y[i] = X(i, 1) + 0.5 * rng.normal();
  }
  Dataset d;
  d.X = X;
  d.Y = y;
  d.T = Eigen::VectorXd::Ones(n);
  const double a = select_lambda(d, Response::outcome_all, Link::identity(), 5, 123);
  const double b = select_lambda(d, Response::outcome_all, Link::identity(), 5, 123);
  CHECK(a == b);
}

TEST_CASE("objective is non-increasing along the identity-link CD path") {
  CounterRng rng(81);
  const int n = 40, p = 10;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
    y[i] = rng.normal();
  }
  Eigen::VectorXd pf = Eigen::VectorXd::Ones(p);
  pf[0] = 0.0;
  // probe monotonicity by comparing the one-sweep objective against the start
  const double lambda = 0.05;
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(p);
  const double obj0 = lasso_detail::objective(X, y, Link::identity(), lambda, pf, beta0);
  const NuisanceFit fit = lasso_detail::fit(X, y, Link::identity(), lambda, pf, &beta0);
  const double obj1 = lasso_detail::objective(X, y, Link::identity(), lambda, pf, fit.coef);
  CHECK(obj1 <= obj0 + 1e-12);
}

TEST_CASE("outcome_on_treated requires enough treated rows") {
  CounterRng rng(91);
  const int n = 20, p = 3;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n), t = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
    X(i, 2) = rng.normal();
    y[i] = rng.normal();
  }
  for (int i = 0; i < 5; ++i) t[i] = 1.0;  // only 5 treated
  Dataset d;
  d.X = X;
  d.Y = y;
  d.T = t;
  CHECK_THROWS_AS(fit_lasso_glm(d, Response::outcome_on_treated, Link::identity(), 0.1),
                  data_error);
}
