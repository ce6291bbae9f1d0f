"""Single-pair cross-relaxation signal model.

Resonance-induced extra longitudinal relaxation, population decay of the
polarized state, and the contrast observable with its optimum evolution
time.  Rates written in MHz convert to ms^-1 at exactly one site
(constants.MHZ_TO_PER_MS); detuning and linewidth stay in ordinary
frequency MHz inside the Lorentzian.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import MHZ_TO_PER_MS


@dataclass(frozen=True)
class SensorParams:
    """NV ensemble description under amplitude-modulated driving."""

    gamma1_prime: float      # ms^-1, driven longitudinal rate 1/T1'
    gamma2_nv: float         # MHz, NV decoherence contribution
    kappa: float             # dimensionless drive index
    depth_h: float           # nm
    surface_alpha: float     # rad

    def __post_init__(self):
        if self.gamma1_prime < 0 or self.gamma2_nv < 0:
            raise ValueError("rates must be >= 0")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must be in (0, 1]")
        if self.depth_h <= 0:
            raise ValueError("depth_h must be > 0")


@dataclass(frozen=True)
class TargetLinewidth:
    gamma2_target: float     # MHz

    def __post_init__(self):
        if self.gamma2_target < 0:
            raise ValueError("gamma2_target must be >= 0")


def delta_gamma1(d_zperp_sq: float, kappa: float, gamma2_total: float,
                 f: float, omega: float) -> float:
    """Extra longitudinal rate from resonant cross-relaxation, ms^-1.

    Lorentzian in the detuning (f - omega) with HWHM gamma2_total, peak
    value 3 kappa^2 D^2 / (64 gamma2_total) on resonance.
    """
    if gamma2_total <= 0:
        raise ValueError("gamma2_total must be > 0")
    det = f - omega
    rate_mhz = (3.0 * kappa**2 * d_zperp_sq / 64.0
                * gamma2_total / (gamma2_total**2 + det * det))
    return rate_mhz * MHZ_TO_PER_MS


def population(t: float, sensor: SensorParams, dg1: float) -> float:
    """Population of the polarized state after evolution time t (ms)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return 1.0 / 3.0 + 2.0 / 3.0 * math.exp(-(sensor.gamma1_prime + dg1) * t)


def contrast_exact(t: float, sensor: SensorParams, dg1: float) -> float:
    """Population difference with vs without the extra relaxation."""
    return population(t, sensor, 0.0) - population(t, sensor, dg1)


def contrast_linearized(t: float, sensor: SensorParams, dg1: float) -> float:
    """First-order contrast (2/3) dg1 t exp(-gamma1' t), valid for dg1*t << 1."""
    if dg1 * t > 0.2:
        warnings.warn(
            f"dg1*t = {dg1 * t:.3g} outside the linearized regime",
            stacklevel=2,
        )
    return 2.0 / 3.0 * dg1 * t * math.exp(-sensor.gamma1_prime * t)


def optimal_time(sensor: SensorParams) -> float:
    """Evolution time maximizing the linearized contrast: 1/gamma1' (ms)."""
    if sensor.gamma1_prime <= 0:
        raise ValueError("gamma1_prime must be > 0")
    return 1.0 / sensor.gamma1_prime
