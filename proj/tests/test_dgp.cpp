#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcal/dgp.hpp"
#include "dcal/errors.hpp"
#include "dcal/glm_lasso.hpp"
#include "dcal/rng.hpp"

using namespace dcal;

namespace {

DgpConfig base_config(Regime r) {
  DgpConfig cfg;
  cfg.regime = r;
  cfg.n = 80;
  cfg.n_aux = 60;
  cfg.n_tr = 60;
  cfg.p = 12;
  cfg.s_r = 3;
  cfg.s_pi = 3;
  return cfg;
}

}  // namespace

TEST_CASE("determinism: identical config and seed give bit-identical data") {
  const DgpConfig cfg = base_config(Regime::sparse_or_dense_ps);
  auto [a, ta] = generate(cfg, 42);
  auto [b, tb] = generate(cfg, 42);
  CHECK(a.main.X == b.main.X);
  CHECK(a.main.T == b.main.T);
  CHECK(a.main.Y == b.main.Y);
  CHECK(a.aux.Y == b.aux.Y);
  CHECK(a.train.Y == b.train.Y);
  CHECK(ta.tau_bar_star == tb.tau_bar_star);
  auto [c, tc] = generate(cfg, 43);
  CHECK(a.main.Y != c.main.Y);
}

TEST_CASE("boundedness and overlap on every draw") {
  for (Regime r : {Regime::sparse_or_dense_ps, Regime::sparse_ps_dense_or, Regime::both_sparse,
                   Regime::approx_sparse_or, Regime::approx_sparse_ps}) {
    DgpConfig cfg = base_config(r);
    cfg.c_pi = 0.1;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      auto [split, truth] = generate(cfg, seed);
      // covariates clipped
      CHECK(split.main.X.rightCols(cfg.p - 1).cwiseAbs().maxCoeff() <= 2.0);
      // overlap strictly inside (c_pi, 1 - c_pi)
      CHECK(truth.pi_star.minCoeff() > cfg.c_pi);
      CHECK(truth.pi_star.maxCoeff() < 1.0 - cfg.c_pi);
      // tau_bar_star is exactly the main-split mean of r*
      CHECK(truth.tau_bar_star == truth.r_star.mean());
      // outcomes bounded: |r*| + 3 sd of clipped noise
      const double cap = truth.r_star.cwiseAbs().maxCoeff() + 3.0 * cfg.noise_sd + 1e-12;
      for (int i = 0; i < split.main.n(); ++i)
        if (split.main.T[i] == 1.0) CHECK(std::abs(split.main.Y[i]) <= cap);
    }
  }
}

TEST_CASE("binary treatment in ATE regimes, continuous in PLM regimes") {
  auto [ate, t1] = generate(base_config(Regime::sparse_ps_dense_or), 5);
  for (int i = 0; i < ate.main.n(); ++i)
    CHECK((ate.main.T[i] == 0.0 || ate.main.T[i] == 1.0));
  auto [plm, t2] = generate(base_config(Regime::plm_sparse_or), 5);
  CHECK(plm.main.treatment_kind == TreatmentKind::continuous);
  bool any_noninteger = false;
  for (int i = 0; i < plm.main.n(); ++i)
    any_noninteger |= (plm.main.T[i] != 0.0 && plm.main.T[i] != 1.0);
  CHECK(any_noninteger);
}

TEST_CASE("noiseless sparse OR: lasso recovers beta* to high accuracy") {
  DgpConfig cfg = base_config(Regime::sparse_or_dense_ps);
  cfg.noise_sd = 0.0;
  cfg.s_r = 1;
  cfg.n_tr = 100;
  auto [split, truth] = generate(cfg, 9);
  const NuisanceFit fit =
      fit_lasso_glm(split.train, Response::outcome_on_treated, Link::identity(), 1e-9);
  for (int j = 0; j < cfg.p; ++j)
    CHECK(std::abs(fit.coef[j] - truth.beta_star[j]) <= 1e-6);
}

TEST_CASE("clip contract on the propensity") {
  DgpConfig cfg = base_config(Regime::sparse_ps_dense_or);
  cfg.c_pi = 0.1;
  cfg.s_pi = 6;  // strong index, clipping will bind on some rows
  auto [split, truth] = generate(cfg, 13);
  CHECK(truth.pi_star.minCoeff() > 0.1);
  CHECK(truth.pi_star.maxCoeff() < 0.9);
}

TEST_CASE("approx-sparse tail sums decay at the advertised rate") {
  // sum_{j>s} beta_j^2 / s^{-2 xi} stays within [0.3, 3] for xi = 1
  const int p = 2001;
  DgpConfig cfg = base_config(Regime::approx_sparse_or);
  cfg.p = p;
  cfg.xi_r = 1.0;
  cfg.n = 10;
  cfg.n_aux = 10;
  cfg.n_tr = 10;
  auto [split, truth] = generate(cfg, 3);
  REQUIRE(truth.beta_star.size() == p);
  for (int s : {10, 50, 100}) {
    double tail = 0.0;
    for (int j = s + 1; j < p; ++j) tail += truth.beta_star[j] * truth.beta_star[j];
    const double ratio = tail / std::pow(static_cast<double>(s), -2.0);
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 3.0);
  }
  // same check at xi = 0.6
  DgpConfig cfg2 = cfg;
  cfg2.xi_r = 0.6;
  auto truth2 = generate(cfg2, 3).second;
  for (int s : {10, 50, 100}) {
    double tail = 0.0;
    for (int j = s + 1; j < p; ++j) tail += truth2.beta_star[j] * truth2.beta_star[j];
    const double ratio = tail / std::pow(static_cast<double>(s), -2.0 * 0.6);
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 3.0);
  }
}

TEST_CASE("unconfoundedness: T depends only on pi*(X)") {
  // With the treatment stream separated from the noise stream, flipping the
  // noise seed cannot change T.
  DgpConfig cfg = base_config(Regime::sparse_ps_dense_or);
  auto [a, ta] = generate(cfg, 77);
  DgpConfig cfg2 = cfg;
  cfg2.noise_sd = 2.5;  // same X and T streams, different noise magnitude
  auto [b, tb] = generate(cfg2, 77);
  CHECK(a.main.T == b.main.T);
  CHECK(a.main.X == b.main.X);
}

TEST_CASE("population_tau basics") {
  DgpConfig cfg = base_config(Regime::sparse_or_dense_ps);
  const PopulationTau one = population_tau(cfg, 1, 1);
  const double tau1 = generate(cfg, CounterRng::derive(1, 0)).second.tau_bar_star;
  CHECK(one.mean == tau1);
  CHECK(one.mc_se == 0.0);
  const PopulationTau many = population_tau(cfg, 1, 32);
  CHECK(std::isfinite(many.mean));
  CHECK(many.mc_se > 0.0);
  CHECK_THROWS_AS(population_tau(cfg, 1, 0), invalid_config_error);
}

TEST_CASE("config validation") {
  DgpConfig cfg = base_config(Regime::sparse_or_dense_ps);
  cfg.s_r = cfg.p;
  CHECK_THROWS_AS(cfg.validate(), invalid_config_error);
  cfg = base_config(Regime::sparse_or_dense_ps);
  cfg.c_pi = 0.7;
  CHECK_THROWS_AS(cfg.validate(), invalid_config_error);
}
