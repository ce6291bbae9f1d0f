"""Dipolar coupling tensor and frame reductions.

Chains the point-dipole tensor (NV-axis frame), the target-orientation
rotation, the two-level reduction matrix of the chosen transition and the
surface-frame rotation into the effective transverse coupling
D_zperp^2 = D_zx^2 + D_zy^2 (MHz^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import J_DD_MHZ_NM3, MIN_RADIUS_NM


@dataclass(frozen=True)
class TargetGeometry:
    """Target position (nm, NV-axis frame) and principal-axis direction."""

    position: tuple[float, float, float]
    theta_e: float
    phi_e: float

    def __post_init__(self):
        if np.linalg.norm(self.position) <= 0:
            raise ValueError("target position must be nonzero")
        if not 0.0 <= self.theta_e <= math.pi:
            raise ValueError("theta_e must be in [0, pi]")


@dataclass(frozen=True)
class SurfaceFrame:
    """Angle between the NV axis and the diamond surface normal."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= math.pi / 2.0:
            raise ValueError("alpha must be in [0, pi/2]")


def dipolar_tensor(position) -> np.ndarray:
    """Point-dipole tensor (J_dd / r^3) (1 - 3 rhat rhat^T), MHz.

    `position` is the target location relative to the NV in nm.  Raises
    for separations below the point-dipole floor.
    """
    pos = np.asarray(position, dtype=float)
    r = np.linalg.norm(pos)
    if r < MIN_RADIUS_NM:
        raise ValueError(
            f"|position| = {r:.3g} nm below the {MIN_RADIUS_NM} nm "
            "point-dipole floor"
        )
    rhat = pos / r
    return (J_DD_MHZ_NM3 / r**3) * (np.eye(3) - 3.0 * np.outer(rhat, rhat))


def orientation_rotation(theta_e: float, phi_e: float) -> np.ndarray:
    """Rotation taking the lab z axis onto the target principal axis."""
    ct, st = math.cos(theta_e), math.sin(theta_e)
    cp, sp = math.cos(phi_e), math.sin(phi_e)
    return np.array([
        [ct * cp, -sp, st * cp],
        [ct * sp, cp, st * sp],
        [-st, 0.0, ct],
    ])


def reduction_matrix(delta_m: int, alpha0: float, alpha1: float) -> np.ndarray:
    """Two-level reduction matrix M for the chosen transition channel.

    The unspecified T_z entry only shifts energies and never feeds the
    D_zx/D_zy signal channels; it is set to 0.
    """
    if delta_m == 0:
        coeff = math.cos((alpha0 + alpha1) / 2.0)
        m = np.zeros((3, 3))
        m[2, 0] = 1.0
    elif delta_m == 1:
        coeff = math.sin(alpha0 / 2.0) * math.cos(alpha1 / 2.0)
        m = np.diag([1.0, 1.0, 0.0])
    elif delta_m == -1:
        coeff = math.cos(alpha0 / 2.0) * math.sin(alpha1 / 2.0)
        m = np.diag([1.0, -1.0, 0.0])
    else:
        raise ValueError("delta_m must be -1, 0 or +1")
    return coeff * m


def surface_rotation(alpha: float) -> np.ndarray:
    """Rotation from the NV reference frame to the laboratory frame."""
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([
        [c, 0.0, -s],
        [0.0, 1.0, 0.0],
        [s, 0.0, c],
    ])


def effective_coupling(geom: TargetGeometry, frame: SurfaceFrame,
                       delta_m: int, alpha0: float, alpha1: float) -> float:
    """D_zx^2 + D_zy^2 (MHz^2) for D = Q . D0 . R . M."""
    d0 = dipolar_tensor(geom.position)
    r = orientation_rotation(geom.theta_e, geom.phi_e)
    m = reduction_matrix(delta_m, alpha0, alpha1)
    d = surface_rotation(frame.alpha) @ d0 @ r @ m
    return float(d[2, 0] ** 2 + d[2, 1] ** 2)
