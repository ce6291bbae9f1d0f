import numpy as np
import pytest

from zfepr.ensemble import EnsembleParams, ensemble_contrast
from zfepr.relaxometry import SensorParams
from zfepr.spectra import (
    BaselineKind,
    BaselineModel,
    Spectrum,
    read_spectrum_csv,
    subtract_blank,
    synthesize_spectrum,
    write_spectrum_csv,
    write_spectrum_sidecar,
)
from zfepr.spinmodel import TEMPO_N15, observable_transitions

SENSOR = SensorParams(gamma1_prime=1.0 / 1.3, gamma2_nv=0.5, kappa=0.58,
                      depth_h=8.0, surface_alpha=0.0)
ENS = EnsembleParams(concentration=100.0, depth_h=8.0, surface_alpha=0.0,
                     kappa=0.58, gamma2_total=3.0, nuclear_spin_twice=1,
                     xi=1.0)
GRID = np.linspace(20.0, 110.0, 901)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 1.0]), np.array([0.0, 0.0]))
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 2.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 2.0]), np.array([0.0, 0.0]),
                 sigma=np.array([1.0, 0.0]))


def test_synthesis_peak_heights():
    spec = synthesize_spectrum(TEMPO_N15, ENS, SENSOR, GRID)
    from dataclasses import replace
    g2 = ENS.gamma2_total
    expected = np.zeros_like(GRID)
    for tr in observable_transitions(TEMPO_N15):
        height = ensemble_contrast(replace(ENS, xi=tr.xi_total),
                                   SENSOR.gamma1_prime)
        expected += height * g2**2 / (g2**2 + (GRID - tr.freq) ** 2)
    np.testing.assert_allclose(spec.values, expected, rtol=1e-12)
    # Lorentzian FWHM of an isolated line is 2 * gamma2: half height one
    # HWHM off resonance (checked on the isolated 76 MHz peak)
    tr = observable_transitions(TEMPO_N15)[2]
    height = ensemble_contrast(replace(ENS, xi=tr.xi_total),
                               SENSOR.gamma1_prime)
    single = height * g2**2 / (g2**2 + (GRID - tr.freq) ** 2)
    on = np.interp(tr.freq, GRID, single)
    off = np.interp(tr.freq + g2, GRID, single)
    assert off == pytest.approx(on / 2.0, rel=1e-3)
    assert spec.sigma is None


def test_synthesis_noise_seeded():
    a = synthesize_spectrum(TEMPO_N15, ENS, SENSOR, GRID, noise_sigma=1e-4,
                            seed=3)
    b = synthesize_spectrum(TEMPO_N15, ENS, SENSOR, GRID, noise_sigma=1e-4,
                            seed=3)
    c = synthesize_spectrum(TEMPO_N15, ENS, SENSOR, GRID, noise_sigma=1e-4,
                            seed=4)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert np.all(a.sigma == 1e-4)


def test_synthesis_zero_concentration_flat():
    from dataclasses import replace
    flat = synthesize_spectrum(TEMPO_N15, replace(ENS, concentration=0.0),
                               SENSOR, GRID,
                               baseline=BaselineModel(BaselineKind.SLANTED,
                                                      slope=1e-5, offset=0.01))
    np.testing.assert_allclose(flat.values, 1e-5 * GRID + 0.01, atol=1e-15)


def test_subtract_blank():
    sig = synthesize_spectrum(TEMPO_N15, ENS, SENSOR, GRID,
                              baseline=BaselineModel(BaselineKind.SLANTED,
                                                     slope=2e-5, offset=0.02))
    blank = Spectrum(GRID, 2e-5 * GRID + 0.02)
    clean = subtract_blank(sig, blank)
    ref = synthesize_spectrum(TEMPO_N15, ENS, SENSOR, GRID)
    np.testing.assert_allclose(clean.values, ref.values, atol=1e-12)


def test_subtract_blank_grid_mismatch():
    sig = Spectrum(np.array([1.0, 2.0, 3.0]), np.zeros(3))
    blank = Spectrum(np.array([1.0, 2.5, 3.0]), np.zeros(3))
    with pytest.raises(ValueError, match="index 1"):
        subtract_blank(sig, blank)


def test_subtract_blank_sigma_quadrature():
    g = np.array([1.0, 2.0])
    a = Spectrum(g, np.zeros(2), sigma=np.array([3.0, 3.0]))
    b = Spectrum(g, np.zeros(2), sigma=np.array([4.0, 4.0]))
    assert subtract_blank(a, b).sigma[0] == pytest.approx(5.0)


def test_csv_round_trip_exact(tmp_path):
    spec = synthesize_spectrum(TEMPO_N15, ENS, SENSOR, GRID,
                               noise_sigma=1e-4, seed=12)
    path = tmp_path / "spec.csv"
    write_spectrum_csv(spec, path)
    back = read_spectrum_csv(path)
    np.testing.assert_array_equal(back.freqs, spec.freqs)
    np.testing.assert_array_equal(back.values, spec.values)
    np.testing.assert_array_equal(back.sigma, spec.sigma)


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        read_spectrum_csv(path)


def test_sidecar_no_timestamps(tmp_path):
    spec = synthesize_spectrum(TEMPO_N15, ENS, SENSOR, GRID, seed=1)
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    write_spectrum_sidecar(spec, p1)
    write_spectrum_sidecar(spec, p2)
    assert p1.read_bytes() == p2.read_bytes()
