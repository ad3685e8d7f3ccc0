"""Smoke tests for the python bindings: construction, splitting, fitting,
estimation, and the study harness on desk-sized inputs."""

import math

import numpy as np
import pytest

import dcal


def make_dataset(n=60, p=4, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.5, 1.5, size=(n, p - 1))
    t = (rng.uniform(size=n) < 0.5).astype(float)
    y = 1.0 + 2.0 * x[:, 0] + 0.5 * t + rng.normal(0, 0.3, size=n)
    return dcal.Dataset(x, t, y)


def test_dataset_shapes_and_intercept():
    ds = make_dataset()
    assert ds.n == 60
    assert ds.p == 4  # intercept added internally
    assert np.all(ds.x[:, 0] == 1.0)


def test_dataset_rejects_bad_treatment():
    x = np.zeros((5, 2))
    with pytest.raises(ValueError):
        dcal.Dataset(x, np.array([0.0, 1.0, 0.5, 0.0, 1.0]), np.zeros(5))


def test_split_three_way_partition_and_remainder():
    ds = make_dataset(n=10)
    s = dcal.split_three_way(ds, 1 / 3, 1 / 3, 1 / 3, seed=1)
    assert (s.main.n, s.aux.n, s.train.n) == (4, 3, 3)
    s2 = dcal.split_three_way(ds, 1 / 3, 1 / 3, 1 / 3, seed=1)
    assert np.array_equal(s.main.x, s2.main.x)


def test_scalar_helpers():
    assert dcal.trim_index(10.0, 2.0) == 2.0
    assert dcal.aipw_score(1.0, 2.0, 0.5, 1.0) == pytest.approx(3.0)
    lo, hi = dcal.confidence_interval(0.0, 1.0, 0.95)
    assert lo == pytest.approx(-1.959963984540054)
    assert hi == pytest.approx(1.959963984540054)


def test_lasso_fit_and_kkt():
    ds = make_dataset(n=120, p=6, seed=3)
    lam = dcal.select_lambda(ds, "outcome_all", "identity", folds=5, seed=9)
    fit = dcal.fit_lasso_glm(ds, "outcome_all", "identity", lam)
    assert fit["kkt_max_violation"] <= 1e-6 * (1.0 + lam)
    assert len(fit["coef"]) == 6


def test_generate_and_estimate_roundtrip():
    split, truth = dcal.generate("both_sparse", n=100, n_aux=80, n_tr=80, p=10,
                                 s_r=2, s_pi=2, seed=11)
    assert truth["tau_bar_star"] == pytest.approx(np.mean(truth["r_star"]))
    rep = dcal.estimate(split, "dcal", seed=5, lambda_or=0.05, lambda_ps=0.05)
    assert math.isfinite(rep["tau_hat"])
    assert rep["se"] > 0
    lo, hi = rep["ci"]
    assert lo < rep["tau_hat"] < hi


def test_estimate_plm():
    split, truth = dcal.generate("plm_sparse_or", n=120, n_aux=100, n_tr=100,
                                 p=10, s_r=2, tau_star=1.5, seed=2)
    rep = dcal.estimate(split, "dcal-plm", seed=5, lambda_or=0.05, lambda_ps=0.05)
    assert abs(rep["tau_hat"] - 1.5) < 1.0
    assert rep["diagnostics"]["sigma_e_tilde2"] > 0


def test_run_study_is_worker_invariant():
    kwargs = dict(regime="both_sparse", n=60, n_aux=50, n_tr=50, p=8, s_r=2,
                  s_pi=2, estimators=["dml"], reps=4, seed=13)
    a = dcal.run_study(workers=1, **kwargs)
    b = dcal.run_study(workers=4, **kwargs)
    assert a[0]["mean_bias"] == b[0]["mean_bias"]
    assert a[0]["coverage"] == b[0]["coverage"]


def test_population_tau():
    mean, se = dcal.population_tau("sparse_or_dense_ps", n=50, p=8, reps=16, seed=1)
    assert math.isfinite(mean)
    assert se > 0
