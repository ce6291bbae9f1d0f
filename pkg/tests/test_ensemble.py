import math

import pytest

from zfepr.ensemble import (
    EnsembleParams,
    analytic_ensemble_rate,
    ensemble_contrast,
    mc_ensemble_rate,
)
from zfepr.spinmodel import TEMPO_N15, observable_transitions, transitions


def params(**overrides):
    base = dict(concentration=100.0, depth_h=8.0, surface_alpha=0.0,
                kappa=0.58, gamma2_total=3.0, nuclear_spin_twice=1,
                xi=1.0)
    base.update(overrides)
    return EnsembleParams(**base)


def test_param_validation():
    with pytest.raises(ValueError):
        params(concentration=-1.0)
    with pytest.raises(ValueError):
        params(depth_h=0.0)
    with pytest.raises(ValueError):
        params(gamma2_total=0.0)


def test_analytic_scalings():
    base = analytic_ensemble_rate(params())
    assert base > 0
    # linear in concentration and xi, quadratic in kappa, 1/gamma2, 1/h^3
    assert analytic_ensemble_rate(params(concentration=200.0)) \
        == pytest.approx(2.0 * base, rel=1e-12)
    assert analytic_ensemble_rate(params(xi=2.0)) \
        == pytest.approx(2.0 * base, rel=1e-12)
    assert analytic_ensemble_rate(params(kappa=0.29)) \
        == pytest.approx(base / 4.0, rel=1e-12)
    assert analytic_ensemble_rate(params(gamma2_total=6.0)) \
        == pytest.approx(base / 2.0, rel=1e-12)
    assert analytic_ensemble_rate(params(depth_h=16.0)) \
        == pytest.approx(base / 8.0, rel=1e-12)
    # angular factor (3 + cos 2a): alpha = 0 gives twice alpha = pi/2
    assert analytic_ensemble_rate(params(surface_alpha=0.0)) \
        == pytest.approx(2.0 * analytic_ensemble_rate(
            params(surface_alpha=math.pi / 2.0)), rel=1e-12)
    assert analytic_ensemble_rate(params(concentration=0.0)) == 0.0


def test_contrast_identity():
    p = params()
    g1 = 1.0 / 1.3
    expected = 2.0 / (3.0 * math.e) * analytic_ensemble_rate(p) / g1
    assert ensemble_contrast(p, g1) == pytest.approx(expected, rel=1e-15)
    with pytest.raises(ValueError):
        ensemble_contrast(p, 0.0)


def test_mc_matches_analytic_smoke():
    p = params()
    est = mc_ensemble_rate(p, TEMPO_N15, 0, 200_000, seed=11)
    ana = analytic_ensemble_rate(p)  # xi = 1 matches transition 0 of N15
    assert abs(est.mean - ana) < 4.0 * est.standard_error
    assert est.standard_error > 0


def test_mc_transition_index_bounds():
    with pytest.raises(IndexError):
        mc_ensemble_rate(params(), TEMPO_N15, 99, 10_000, seed=1)
    with pytest.raises(ValueError):
        mc_ensemble_rate(params(), TEMPO_N15, 0, 10, seed=1)


def test_mc_worker_invariance():
    p = params()
    # > 1 chunk so the pool actually splits work
    n = 3 * (1 << 16)
    a = mc_ensemble_rate(p, TEMPO_N15, 0, n, seed=5, workers=1)
    b = mc_ensemble_rate(p, TEMPO_N15, 0, n, seed=5, workers=4)
    assert a.mean == b.mean
    assert a.standard_error == b.standard_error


def test_mc_seed_sensitivity():
    p = params()
    a = mc_ensemble_rate(p, TEMPO_N15, 0, 50_000, seed=1)
    b = mc_ensemble_rate(p, TEMPO_N15, 0, 50_000, seed=2)
    assert a.mean != b.mean


def test_mc_standard_error_scaling():
    p = params()
    a = mc_ensemble_rate(p, TEMPO_N15, 0, 50_000, seed=9)
    b = mc_ensemble_rate(p, TEMPO_N15, 0, 800_000, seed=9)
    # SE should drop roughly as 1/sqrt(n): factor 4 for 16x samples
    assert b.standard_error < a.standard_error / 2.5


def test_mc_xi_consistency_across_transitions():
    """MC rate per transition is proportional to that transition's xi."""
    trs = observable_transitions(TEMPO_N15)
    all_trs = transitions(TEMPO_N15)
    rates = []
    for t in trs:
        idx = all_trs.index(t)
        p = params(xi=t.xi_total)
        est = mc_ensemble_rate(p, TEMPO_N15, idx, 400_000, seed=33)
        rates.append((est, analytic_ensemble_rate(p)))
    for est, ana in rates:
        assert abs(est.mean - ana) < 4.0 * est.standard_error
