"""Smoke tests for the python bindings."""

import math

import pytest

import repgame


@pytest.fixture(scope="module")
def eq():
    return repgame.Equilibrium(repgame.ModelParams(M=100.0, l=1.52, r=0.39, sigma=4.1))


def test_special_functions():
    assert repgame.gauss_erf(0.0) == 0.0
    x = repgame.gauss_erf_inv(0.6034)
    assert abs(repgame.gauss_erf(x) - 0.6034) < 1e-12
    with pytest.raises(Exception):
        repgame.gauss_erf_inv(1.0)


def test_headline_equilibrium(eq):
    assert 0.285 < eq.p < 0.295
    res = repgame.optimal_attack_prob(eq)
    assert 0.135 < res.q_hat < 0.145
    assert abs(eq.attacker_value(0.0) - 100.0 / 0.39) < 1e-9
    assert eq.blocking_prob(eq.p) == 1.0
    assert eq.regime == repgame.Regime.Interior


def test_curves_vectorized(eq):
    import numpy as np

    q = np.linspace(0.01, 0.99, 25)
    alpha = eq.attack_intensity(q)
    value = eq.attacker_value(q)
    assert alpha.shape == q.shape
    assert (alpha > 0).all() and (alpha <= 100.0).all()
    assert (np.diff(value) <= 1e-10).all()


def test_verify_and_sweep(eq):
    report = repgame.verify_closed_forms(eq)
    assert report.all_ok()
    rows = repgame.comparative_statics(
        repgame.ModelParams(M=100.0, l=1.52, r=0.39, sigma=4.1),
        "sigma",
        [2.0, 4.0, 6.0, 8.0],
    )
    ps = [row.p for row in rows]
    assert ps == sorted(ps, reverse=True)


def test_simulation_determinism(eq):
    cfg = repgame.SimConfig()
    cfg.n_paths = 2000
    cfg.dt = 1.0 / 365.0
    cfg.seed = 42
    cfg.q0 = 0.1
    cfg.x_true = 0.14
    a = repgame.run_population(eq, cfg)
    b = repgame.run_population(eq, cfg)
    assert a.mu_theta == b.mu_theta
    assert list(a.br) == list(b.br)
    assert len(a.times) == cfg.report_points
    assert a.n_blocked + a.n_terminated + a.n_running == cfg.n_paths
    # estimator sanity at small n: within 5 sigma of the truth
    assert abs(a.mu_theta - 0.14) < 5.0 * a.mu_theta_se


def test_detection_time(eq):
    days = 365.0 * repgame.expected_detection_time(eq, 0.14)
    assert abs(days - 282.6697148728022) < 1e-9


def test_calibration_roundtrip():
    target = repgame.CalibrationTarget("synthetic", 1.0, 1.0)
    cost, days = repgame.calibration_forward(target, 0.5, 3.0)
    target.avg_cost = cost
    target.avg_days = days
    res = repgame.calibrate(target)
    assert res.converged
    assert abs(res.r - 0.5) < 1e-6
    assert abs(res.sigma - 3.0) < 1e-6


def test_calibration_global_average():
    res = repgame.calibrate(repgame.CalibrationTarget("Global average", 3.86, 280.0))
    assert res.converged
    assert abs(res.r - 0.39) <= 0.02
    assert abs(res.sigma - 4.1) <= 0.15
    assert abs(res.alpha_over_sigma - 1.23) <= 0.02
    assert math.isfinite(res.jacobian_cond)
