"""Spectrum container, synthetic spectra, blank subtraction and file I/O.

A spectrum is contrast vs modulation frequency.  Synthesis sums one
Lorentzian of HWHM gamma2 per observable transition, scaled to the
ensemble-averaged peak contrast, on top of a configurable baseline and
seeded Gaussian noise.  CSV emission uses shortest round-trip decimal
representation so re-ingesting a file reproduces values bit-exactly.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .ensemble import EnsembleParams, ensemble_contrast
from .relaxometry import SensorParams
from .spinmodel import HyperfineSystem, transitions


@dataclass(frozen=True)
class Spectrum:
    freqs: np.ndarray                 # MHz, strictly increasing
    values: np.ndarray                # contrast
    sigma: np.ndarray | None = None   # per-point uncertainty
    meta: dict | None = None

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)
        if freqs.ndim != 1 or len(freqs) < 2:
            raise ValueError("need a 1-d frequency grid with >= 2 points")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if len(values) != len(freqs):
            raise ValueError("freqs and values must have equal length")
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            object.__setattr__(self, "sigma", sigma)
            if len(sigma) != len(freqs):
                raise ValueError("sigma length mismatch")
            if np.any(sigma <= 0):
                raise ValueError("sigma must be > 0 where present")

    def __len__(self) -> int:
        return len(self.freqs)


class BaselineKind(enum.Enum):
    NONE = "none"
    SLANTED = "slanted"
    BLANK_TRACE = "blank_trace"


@dataclass(frozen=True)
class BaselineModel:
    kind: BaselineKind = BaselineKind.NONE
    slope: float = 0.0            # per MHz
    offset: float = 0.0
    reference: Spectrum | None = None

    def evaluate(self, freqs: np.ndarray) -> np.ndarray:
        freqs = np.asarray(freqs, dtype=float)
        if self.kind is BaselineKind.NONE:
            return np.zeros_like(freqs)
        if self.kind is BaselineKind.SLANTED:
            return self.slope * freqs + self.offset
        if self.reference is None:
            raise ValueError("blank_trace baseline needs a reference spectrum")
        if not np.array_equal(self.reference.freqs, freqs):
            raise ValueError("blank_trace reference must share the grid")
        return self.reference.values.copy()


def synthesize_spectrum(sys: HyperfineSystem, ens: EnsembleParams,
                        sensor: SensorParams, grid,
                        baseline: BaselineModel | None = None,
                        noise_sigma: float = 0.0,
                        seed: int = 0) -> Spectrum:
    """Synthetic contrast-vs-frequency trace.

    Each observable transition contributes a Lorentzian centered at its
    frequency with HWHM ens.gamma2_total and peak height equal to the
    closed-form ensemble contrast at that transition's strength.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("frequency grid must be strictly increasing")
    baseline = baseline or BaselineModel()

    values = baseline.evaluate(grid)
    g2 = ens.gamma2_total
    for tr in transitions(sys):
        if not tr.observable:
            continue
        height = ensemble_contrast(replace(ens, xi=tr.xi_total),
                                   sensor.gamma1_prime)
        values = values + height * g2**2 / (g2**2 + (grid - tr.freq) ** 2)

    sigma = None
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_sigma, len(grid))
        sigma = np.full(len(grid), noise_sigma)

    meta = {
        "system": {"label": sys.label,
                   "nuclear_spin_twice": sys.nuclear_spin_twice,
                   "a_perp_mhz": sys.a_perp, "a_par_mhz": sys.a_par},
        "ensemble": {"concentration_mm": ens.concentration,
                     "depth_nm": ens.depth_h,
                     "surface_alpha_rad": ens.surface_alpha,
                     "kappa": ens.kappa,
                     "gamma2_total_mhz": ens.gamma2_total,
                     "beta": ens.prefactor_beta},
        "sensor": {"gamma1_prime_per_ms": sensor.gamma1_prime},
        "baseline": {"kind": baseline.kind.value,
                     "slope_per_mhz": baseline.slope,
                     "offset": baseline.offset},
        "noise_sigma": noise_sigma,
        "seed": seed,
    }
    return Spectrum(grid, values, sigma, meta)


def subtract_blank(signal: Spectrum, blank: Spectrum) -> Spectrum:
    """Pointwise signal minus blank; sigmas combine in quadrature."""
    if len(signal) != len(blank) or not np.array_equal(signal.freqs,
                                                       blank.freqs):
        n = min(len(signal), len(blank))
        bad = np.nonzero(signal.freqs[:n] != blank.freqs[:n])[0]
        idx = int(bad[0]) if len(bad) else n
        raise ValueError(f"frequency grids differ first at index {idx}")
    sigma = None
    if signal.sigma is not None and blank.sigma is not None:
        sigma = np.hypot(signal.sigma, blank.sigma)
    elif signal.sigma is not None:
        sigma = signal.sigma.copy()
    elif blank.sigma is not None:
        sigma = blank.sigma.copy()
    meta = {"operation": "subtract_blank",
            "signal_meta": signal.meta, "blank_meta": blank.meta}
    return Spectrum(signal.freqs.copy(), signal.values - blank.values,
                    sigma, meta)


def write_spectrum_csv(spec: Spectrum, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if spec.sigma is not None:
            writer.writerow(["freq_mhz", "contrast", "sigma"])
            for f, v, s in zip(spec.freqs, spec.values, spec.sigma):
                writer.writerow([repr(float(f)), repr(float(v)),
                                 repr(float(s))])
        else:
            writer.writerow(["freq_mhz", "contrast"])
            for f, v in zip(spec.freqs, spec.values):
                writer.writerow([repr(float(f)), repr(float(v))])


def write_spectrum_sidecar(spec: Spectrum, path) -> None:
    Path(path).write_text(
        json.dumps(spec.meta or {}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")


def read_spectrum_csv(path) -> Spectrum:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["freq_mhz", "contrast"]:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        has_sigma = len(header) > 2 and header[2] == "sigma"
        freqs, values, sigma = [], [], []
        for row in reader:
            if not row:
                continue
            freqs.append(float(row[0]))
            values.append(float(row[1]))
            if has_sigma:
                sigma.append(float(row[2]))
    return Spectrum(np.array(freqs), np.array(values),
                    np.array(sigma) if has_sigma else None,
                    meta={"source": str(path)})
