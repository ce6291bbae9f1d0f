"""Zero-field hyperfine spin model of the target radical.

Solves H_T = A_perp (SxIx + SyIy) + A_par SzIz for an electron spin 1/2
coupled to a nucleus of spin I (integer or half-integer), in closed form:
eigenlevels, transition frequencies and their relative strengths.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import DEGENERACY_THRESHOLD_MHZ


class Branch(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    SPECIAL = "special"


@dataclass(frozen=True)
class HyperfineSystem:
    """Target spin system: nuclear spin I and axial hyperfine constants (MHz)."""

    nuclear_spin_twice: int
    a_perp: float
    a_par: float
    label: str = ""

    def __post_init__(self):
        if self.nuclear_spin_twice < 1:
            raise ValueError(
                "nuclear_spin_twice must be >= 1 (spin-0 nucleus has no "
                "hyperfine structure)"
            )
        if self.a_par <= 0:
            raise ValueError("a_par must be > 0 (branch labeling convention)")
        if self.a_perp < 0:
            raise ValueError("a_perp must be >= 0")

    @property
    def nuclear_spin(self) -> float:
        return self.nuclear_spin_twice / 2.0

    def interior_m_twice(self) -> list[int]:
        """2*m_T for the interior doublets: m_T = -I+1/2 ... I-1/2."""
        return list(range(-self.nuclear_spin_twice + 1,
                          self.nuclear_spin_twice, 2))

    def chi(self, m_t_twice: int) -> float:
        """Off-diagonal mixing parameter chi at a given 2*m_T."""
        i = self.nuclear_spin
        m = m_t_twice / 2.0
        under = i * (i + 1.0) - (m - 0.5) * (m + 0.5)
        return (self.a_perp / self.a_par) * math.sqrt(max(under, 0.0))


@dataclass(frozen=True)
class EigenLevel:
    branch: Branch
    m_t_twice: int
    energy: float      # MHz
    alpha: float       # mixing angle, rad; 0 by convention for specials

    @property
    def m_t(self) -> float:
        return self.m_t_twice / 2.0


@dataclass(frozen=True)
class TransitionMember:
    """One level pair contributing to a merged spectral peak."""

    lower: EigenLevel   # lower-energy level
    upper: EigenLevel   # higher-energy level
    delta_m: int        # m_T(upper) - m_T(lower), in {-1, 0, +1}
    coupling: float     # squared reduction coefficient of this pair
    weight: float       # transverse-channel multiplicity (2, or 1 if self-mirror)

    @property
    def xi_contribution(self) -> float:
        return self.weight * self.coupling


@dataclass(frozen=True)
class Transition:
    freq: float                       # MHz, >= 0
    members: tuple[TransitionMember, ...]
    observable: bool = True

    @property
    def xi_total(self) -> float:
        return sum(m.xi_contribution for m in self.members)


def mixing_angle(sys: HyperfineSystem, m_t_twice: int) -> float:
    """Upper-branch mixing angle alpha in (0, pi) with tan(alpha) = chi/m_T.

    Defined for interior levels only, |m_T| <= I - 1/2.  Returns exactly
    pi/2 for m_T = 0.
    """
    if abs(m_t_twice) > sys.nuclear_spin_twice - 1:
        lo = -(sys.nuclear_spin_twice - 1) / 2.0
        hi = (sys.nuclear_spin_twice - 1) / 2.0
        raise ValueError(
            f"m_T = {m_t_twice / 2.0} outside interior range [{lo}, {hi}]"
        )
    if m_t_twice == 0:
        return math.pi / 2.0
    return math.atan2(sys.chi(m_t_twice), m_t_twice / 2.0)


def energy_levels(sys: HyperfineSystem) -> list[EigenLevel]:
    """All 2(2I+1) eigenlevels of H_T, interior doublets plus the two specials."""
    a_par = sys.a_par
    levels = []
    for mt2 in sys.interior_m_twice():
        m = mt2 / 2.0
        chi = sys.chi(mt2)
        root = math.sqrt(chi * chi + m * m)
        alpha_up = mixing_angle(sys, mt2)
        levels.append(EigenLevel(Branch.UPPER, mt2,
                                 0.5 * a_par * (root - 0.5), alpha_up))
        levels.append(EigenLevel(Branch.LOWER, mt2,
                                 0.5 * a_par * (-root - 0.5),
                                 alpha_up + math.pi))
    # Specials |1/2, I> and |-1/2, -I> at m_T = +-(I + 1/2); the interior
    # energy formula with chi = 0 applies and gives A_par * I / 2.
    e_special = 0.5 * a_par * sys.nuclear_spin
    for mt2 in (sys.nuclear_spin_twice + 1, -(sys.nuclear_spin_twice + 1)):
        levels.append(EigenLevel(Branch.SPECIAL, mt2, e_special, 0.0))
    return levels


def diagonalize_oracle(sys: HyperfineSystem) -> np.ndarray:
    """Sorted eigenvalues of H_T from a dense eigensolve in the product basis.

    Independent numerical check of the closed-form energy levels.
    """
    sx, sy, sz = _spin_matrices(0.5)
    ix, iy, iz = _spin_matrices(sys.nuclear_spin)
    h = (sys.a_perp * (np.kron(sx, ix) + np.kron(sy, iy)).real
         + sys.a_par * np.kron(sz, iz))
    return np.sort(np.linalg.eigvalsh(h))


def _spin_matrices(j: float):
    d = int(round(2 * j + 1))
    m = np.array([j - k for k in range(d)])
    jp = np.zeros((d, d))
    for k in range(1, d):
        jp[k - 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.T) / 2.0
    jy = (jp - jp.T) / 2j
    jz = np.diag(m)
    return jx, jy, jz


def pair_alpha(level: EigenLevel) -> float:
    """Mixing angle entering the reduction coefficients for a given level.

    Interior levels carry their stored alpha.  The special level at
    m_T = +(I+1/2) is the pure |1/2, I> state (alpha = 0); the one at
    m_T = -(I+1/2) is the pure |-1/2, -I> state, which sits at alpha = pi
    in the same parameterization.
    """
    if level.branch is Branch.SPECIAL:
        return 0.0 if level.m_t_twice > 0 else math.pi
    return level.alpha


def pair_coupling(a: EigenLevel, b: EigenLevel) -> tuple[int, float, float]:
    """(delta_m, coupling, weight) for an allowed level pair.

    delta_m is m_T(b) - m_T(a) with (a, b) ordered by energy.  The coupling
    is the squared reduction-matrix coefficient: cos^2((alpha_a+alpha_b)/2)
    for delta_m = 0, and sin^2(alpha_lo/2) cos^2(alpha_hi/2) for
    delta_m = +-1 (lo/hi by m_T), which equals |<hi| S'_+ |lo>|^2.

    Delta-m = +-1 pairs drive both transverse dipolar channels and carry
    weight 2, except self-mirror pairs (m_T values summing to zero), which
    the ensemble bookkeeping counts once.
    """
    dm2 = b.m_t_twice - a.m_t_twice
    if abs(dm2) not in (0, 2):
        raise ValueError("pair violates the selection rule |delta m_T| <= 1")
    if dm2 == 0:
        coeff = math.cos((pair_alpha(a) + pair_alpha(b)) / 2.0)
        return 0, coeff * coeff, 1.0
    lo, hi = (a, b) if a.m_t_twice < b.m_t_twice else (b, a)
    coeff = (math.sin(pair_alpha(lo) / 2.0)
             * math.cos(pair_alpha(hi) / 2.0))
    weight = 1.0 if lo.m_t_twice + hi.m_t_twice == 0 else 2.0
    return dm2 // 2, coeff * coeff, weight


def transitions(sys: HyperfineSystem,
                threshold: float = DEGENERACY_THRESHOLD_MHZ) -> list[Transition]:
    """All selection-rule-allowed transitions, merged by frequency.

    Pairs whose frequencies agree within `threshold` form one peak.
    Zero-frequency peaks (degenerate level pairs) are kept but flagged
    unobservable.
    """
    levels = energy_levels(sys)
    entries = []
    for i in range(len(levels)):
        for k in range(i + 1, len(levels)):
            a, b = levels[i], levels[k]
            if abs(a.m_t_twice - b.m_t_twice) > 2:
                continue
            lo, hi = (a, b) if a.energy <= b.energy else (b, a)
            dm, coupling, weight = pair_coupling(lo, hi)
            member = TransitionMember(lo, hi, dm, coupling, weight)
            entries.append((abs(hi.energy - lo.energy), member))
    entries.sort(key=lambda e: e[0])

    merged: list[Transition] = []
    group: list[TransitionMember] = []
    group_freq = None
    for freq, member in entries:
        if group and freq - group_freq > threshold:
            merged.append(_make_transition(group_freq, group, threshold))
            group = []
        if not group:
            group_freq = freq
        group.append(member)
    if group:
        merged.append(_make_transition(group_freq, group, threshold))
    return merged


def _make_transition(freq, members, threshold):
    return Transition(freq=freq, members=tuple(members),
                      observable=freq > threshold)


def observable_transitions(sys: HyperfineSystem,
                           threshold: float = DEGENERACY_THRESHOLD_MHZ
                           ) -> list[Transition]:
    return [t for t in transitions(sys, threshold) if t.observable]


class Isotope(enum.Enum):
    N14 = "N14"
    N15 = "N15"


def peak_positions_closed_form(isotope: Isotope, a_perp: float,
                               a_par: float) -> tuple[float, float, float]:
    """Closed-form zero-field peak positions (omega1, omega2, omega3), MHz.

    Requires a_par > a_perp >= 0.  In both cases omega1 + omega2 = omega3.
    """
    if not (a_par > a_perp >= 0):
        raise ValueError("requires a_par > a_perp >= 0")
    if isotope is Isotope.N14:
        root = math.sqrt(8.0 * a_perp * a_perp + a_par * a_par)
        return (0.75 * a_par - 0.25 * root, 0.5 * root,
                0.75 * a_par + 0.25 * root)
    if isotope is Isotope.N15:
        return (a_perp, 0.5 * (a_par - a_perp), 0.5 * (a_par + a_perp))
    raise ValueError(f"unknown isotope {isotope!r}")


# Canonical systems from X-band reference measurements of TEMPO.
TEMPO_N14 = HyperfineSystem(2, 19.0, 91.0, label="14N-TEMPO")
TEMPO_N15 = HyperfineSystem(1, 32.0, 120.0, label="15N-TEMPO")
