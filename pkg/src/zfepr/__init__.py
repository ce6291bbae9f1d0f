"""Zero-field EPR toolkit for NV-center cross-relaxation spectroscopy."""

__version__ = "0.1.0"

from .constants import BETA_CALIBRATED, J_DD_MHZ_NM3
from .ensemble import (
    EnsembleParams,
    McEstimate,
    analytic_ensemble_rate,
    calibrate_beta,
    ensemble_contrast,
    mc_ensemble_rate,
)
from .fitting import (
    FitError,
    FitResult,
    fit_double_lorentzian,
    fit_exponential_decay,
    fit_gaussian_peaks_slanted,
    fit_powerlaw_loglog,
    kinetics_series,
    lm_fit,
)
from .relaxometry import (
    SensorParams,
    contrast_exact,
    contrast_linearized,
    delta_gamma1,
    optimal_time,
    population,
)
from .spectra import (
    BaselineKind,
    BaselineModel,
    Spectrum,
    read_spectrum_csv,
    subtract_blank,
    synthesize_spectrum,
    write_spectrum_csv,
)
from .spinmodel import (
    TEMPO_N14,
    TEMPO_N15,
    Branch,
    EigenLevel,
    HyperfineSystem,
    Isotope,
    Transition,
    diagonalize_oracle,
    energy_levels,
    observable_transitions,
    peak_positions_closed_form,
    transitions,
)
