import math

import numpy as np
import pytest

from zfepr.spinmodel import (
    TEMPO_N14,
    TEMPO_N15,
    Branch,
    HyperfineSystem,
    Isotope,
    diagonalize_oracle,
    energy_levels,
    mixing_angle,
    observable_transitions,
    peak_positions_closed_form,
    transitions,
)


def test_system_validation():
    with pytest.raises(ValueError):
        HyperfineSystem(0, 10.0, 90.0)
    with pytest.raises(ValueError):
        HyperfineSystem(2, 10.0, 0.0)
    with pytest.raises(ValueError):
        HyperfineSystem(2, -1.0, 90.0)


def test_level_count_and_trace():
    for spin_twice in (1, 2, 3, 4, 5):
        sys = HyperfineSystem(spin_twice, 17.0, 80.0)
        levels = energy_levels(sys)
        assert len(levels) == 2 * (spin_twice + 1)
        # H_T is traceless
        assert math.fsum(l.energy for l in levels) == pytest.approx(0.0,
                                                                    abs=1e-9)


def test_closed_form_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        sys = HyperfineSystem(int(rng.integers(1, 6)),
                              float(rng.uniform(1.0, 50.0)),
                              float(rng.uniform(55.0, 150.0)))
        analytic = np.sort([l.energy for l in energy_levels(sys)])
        oracle = diagonalize_oracle(sys)
        np.testing.assert_allclose(analytic, oracle, rtol=1e-12, atol=1e-9)


def test_mixing_angle_conventions():
    sys = TEMPO_N14
    assert mixing_angle(sys, 1) < math.pi / 2.0 < mixing_angle(sys, -1)
    assert mixing_angle(HyperfineSystem(3, 19.0, 91.0), 0) == math.pi / 2.0
    with pytest.raises(ValueError):
        mixing_angle(sys, 4)


def test_special_levels():
    sys = TEMPO_N15
    specials = [l for l in energy_levels(sys) if l.branch is Branch.SPECIAL]
    assert len(specials) == 2
    for l in specials:
        assert l.energy == pytest.approx(sys.a_par * sys.nuclear_spin / 2.0)
        assert l.alpha == 0.0


def test_n15_peaks_and_strengths():
    trs = observable_transitions(TEMPO_N15)
    freqs = [t.freq for t in trs]
    xis = [t.xi_total for t in trs]
    assert freqs == pytest.approx([32.0, 44.0, 76.0], abs=1e-9)
    assert xis == pytest.approx([1.0, 2.0, 2.0], abs=1e-9)


def test_n14_peaks_and_strengths():
    trs = observable_transitions(TEMPO_N14)
    freqs = [t.freq for t in trs]
    xis = [t.xi_total for t in trs]
    assert freqs == pytest.approx([41.829127569287195, 52.84174486142561,
                                   94.6708724307128], abs=1e-9)
    assert xis == pytest.approx([0.2779, 0.6464, 3.7221], abs=1e-4)
    # strength conservation: totals sum to 2(I+1) + transverse double count
    assert sum(xis) == pytest.approx(4.6464, abs=1e-4)


def test_sum_rule_omega3():
    # omega1 + omega2 = omega3 for both isotopes
    for sys in (TEMPO_N14, TEMPO_N15):
        f = [t.freq for t in observable_transitions(sys)]
        assert f[0] + f[1] == pytest.approx(f[2], rel=1e-12)


def test_closed_form_peak_positions():
    p14 = peak_positions_closed_form(Isotope.N14, 19.0, 91.0)
    p15 = peak_positions_closed_form(Isotope.N15, 32.0, 120.0)
    assert p14 == pytest.approx((41.829127569287195, 52.84174486142561,
                                 94.6708724307128), rel=1e-12)
    assert p15 == pytest.approx((32.0, 44.0, 76.0), rel=1e-12)
    # closed forms agree with the level enumeration
    for iso, sys in ((Isotope.N14, TEMPO_N14), (Isotope.N15, TEMPO_N15)):
        closed = peak_positions_closed_form(iso, sys.a_perp, sys.a_par)
        enum = [t.freq for t in observable_transitions(sys)]
        assert list(closed) == pytest.approx(enum, rel=1e-12)
    with pytest.raises(ValueError):
        peak_positions_closed_form(Isotope.N14, 90.0, 19.0)


def test_aperp_zero_kills_delta_m0():
    sys = HyperfineSystem(2, 0.0, 91.0)
    for t in transitions(sys):
        for m in t.members:
            if m.delta_m == 0 and t.observable:
                assert m.coupling == pytest.approx(0.0, abs=1e-12)


def test_degenerate_merge():
    # at a_perp = 0 the N15 system collapses: levels +-a_par/4 each twice
    sys = HyperfineSystem(1, 0.0, 120.0)
    trs = transitions(sys)
    observable = [t for t in trs if t.observable]
    assert all(t.freq > 0 for t in observable)
    zero = [t for t in trs if not t.observable]
    assert zero and all(t.freq <= 1e-6 for t in zero)
