"""Nonlinear least-squares engine and the spectrum/kinetics fit models.

The engine is a damped-normal-equations (Levenberg-Marquardt style)
minimizer with analytic Jacobians, box bounds and covariance from the
unit-damping normal matrix at the optimum.  On top of it: multi-Gaussian
peaks on a slanted baseline, a double Lorentzian, exponential decay, and
a weighted log-log power law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectra import Spectrum

GAUSS_FWHM = 2.0 * math.sqrt(2.0 * math.log(2.0))


class FitError(RuntimeError):
    def __init__(self, message: str, params=None):
        super().__init__(message)
        self.params = None if params is None else np.asarray(params)


@dataclass(frozen=True)
class FitModel:
    name: str
    param_names: tuple[str, ...]
    evaluator: callable            # (params, x) -> y
    jacobian: callable             # (params, x) -> (len(x), n_params)
    lower: np.ndarray
    upper: np.ndarray

    @property
    def n_params(self) -> int:
        return len(self.param_names)


@dataclass(frozen=True)
class PeakEstimate:
    center: float
    center_err: float
    fwhm: float
    fwhm_err: float
    area: float
    area_err: float


@dataclass
class FitResult:
    model_name: str
    param_names: tuple[str, ...]
    params: np.ndarray
    covariance: np.ndarray
    residual_norm: float           # chi-square at the optimum
    n_iterations: int
    converged: bool
    covariance_reliable: bool = True
    active_bounds: tuple[str, ...] = ()
    message: str = ""
    peaks: tuple[PeakEstimate, ...] = ()

    @property
    def param_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "params": dict(zip(self.param_names, map(float, self.params))),
            "param_errors": dict(zip(self.param_names,
                                     map(float, self.param_errors))),
            "covariance": self.covariance.tolist(),
            "chi_square": float(self.residual_norm),
            "n_iterations": self.n_iterations,
            "converged": self.converged,
            "covariance_reliable": self.covariance_reliable,
            "active_bounds": list(self.active_bounds),
            "message": self.message,
            "peaks": [
                {"center": p.center, "center_err": p.center_err,
                 "fwhm": p.fwhm, "fwhm_err": p.fwhm_err,
                 "area": p.area, "area_err": p.area_err}
                for p in self.peaks
            ],
        }


def lm_fit(model: FitModel, x, y, sigma=None, init=None,
           max_iter: int = 500, tol: float = 1e-10) -> FitResult:
    """Damped least squares with monotone chi-square on accepted steps.

    Converges when the relative chi-square change or the gradient max-norm
    drops below `tol`.  Returns diagnostics whether or not it converged.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("x and y must have equal length")
    if len(x) < model.n_params:
        raise ValueError(
            f"need at least {model.n_params} points to fit {model.name}")
    if init is None:
        raise ValueError("initial parameter vector required")
    p = np.clip(np.asarray(init, dtype=float), model.lower, model.upper)
    w = np.ones_like(y) if sigma is None else 1.0 / np.asarray(sigma, float)

    def chi2_and_resid(params):
        f = model.evaluator(params, x)
        if not np.all(np.isfinite(f)):
            raise FitError(
                f"{model.name}: non-finite model output", params)
        with np.errstate(over="ignore", invalid="ignore"):
            r = (y - f) * w
            c2 = float(r @ r)
        if not math.isfinite(c2):
            raise FitError(f"{model.name}: non-finite chi-square", params)
        return c2, r

    chi2, resid = chi2_and_resid(p)
    lam = 1e-3
    converged = False
    message = "max iterations reached"
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        jac = model.jacobian(p, x) * w[:, None]
        grad = jac.T @ resid
        if np.max(np.abs(grad)) < tol:
            converged = True
            message = "gradient below tolerance"
            break
        jtj = jac.T @ jac
        accepted = False
        for _ in range(50):
            try:
                step = np.linalg.solve(jtj + lam * np.eye(model.n_params),
                                       grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = np.clip(p + step, model.lower, model.upper)
            try:
                chi2_t, resid_t = chi2_and_resid(trial)
            except FitError:
                lam *= 10.0
                continue
            if chi2_t < chi2:
                rel = (chi2 - chi2_t) / max(chi2, 1e-300)
                p, chi2, resid = trial, chi2_t, resid_t
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                if rel < tol:
                    converged = True
                    message = "chi-square change below tolerance"
                break
            lam *= 10.0
        if converged:
            break
        if not accepted:
            converged = True
            message = "no further decrease possible"
            break

    jac = model.jacobian(p, x) * w[:, None]
    jtj = jac.T @ jac
    sv = np.linalg.svd(jtj, compute_uv=False)
    reliable = bool(sv[0] > 0 and sv[-1] / sv[0] > 1e-12)
    if reliable:
        cov = np.linalg.inv(jtj)
    else:
        cov = np.linalg.pinv(jtj)
    dof = max(len(x) - model.n_params, 1)
    if sigma is None:
        cov = cov * (chi2 / dof)

    active = tuple(
        name for name, v, lo, hi in zip(model.param_names, p,
                                        model.lower, model.upper)
        if v <= lo or v >= hi
    )
    return FitResult(
        model_name=model.name, param_names=model.param_names,
        params=p, covariance=cov, residual_norm=chi2,
        n_iterations=n_iter, converged=converged,
        covariance_reliable=reliable, active_bounds=active,
        message=message,
    )


# ---------------------------------------------------------------------------
# models


def gaussian_peaks_slanted_model(n_peaks: int, x_min: float, x_max: float,
                                 width_max: float | None = None) -> FitModel:
    """y = slope*x + offset + sum_i A_i exp(-(x - mu_i)^2 / (2 s_i^2))."""
    if n_peaks < 1:
        raise ValueError("n_peaks must be >= 1")
    span = x_max - x_min
    width_max = width_max or span
    names = ["slope", "offset"]
    lower = [-np.inf, -np.inf]
    upper = [np.inf, np.inf]
    for i in range(n_peaks):
        names += [f"amp{i}", f"center{i}", f"width{i}"]
        lower += [0.0, x_min, 1e-6 * span]
        upper += [np.inf, x_max, width_max]

    def evaluate(p, x):
        y = p[0] * x + p[1]
        for i in range(n_peaks):
            a, mu, s = p[2 + 3 * i: 5 + 3 * i]
            y = y + a * np.exp(-((x - mu) ** 2) / (2.0 * s * s))
        return y

    def jac(p, x):
        j = np.empty((len(x), 2 + 3 * n_peaks))
        j[:, 0] = x
        j[:, 1] = 1.0
        for i in range(n_peaks):
            a, mu, s = p[2 + 3 * i: 5 + 3 * i]
            d = x - mu
            g = np.exp(-d * d / (2.0 * s * s))
            j[:, 2 + 3 * i] = g
            j[:, 3 + 3 * i] = a * g * d / (s * s)
            j[:, 4 + 3 * i] = a * g * d * d / (s ** 3)
        return j

    return FitModel(f"gaussian{n_peaks}_slanted", tuple(names),
                    evaluate, jac, np.array(lower), np.array(upper))


def double_lorentzian_model(x_min: float, x_max: float) -> FitModel:
    """y = offset + sum of two Lorentzians A w^2 / ((x-c)^2 + w^2), w = HWHM."""
    span = x_max - x_min
    names = ("offset", "amp0", "center0", "hwhm0",
             "amp1", "center1", "hwhm1")
    lower = np.array([-np.inf, 0.0, x_min, 1e-6 * span,
                      0.0, x_min, 1e-6 * span])
    upper = np.array([np.inf, np.inf, x_max, span, np.inf, x_max, span])

    def evaluate(p, x):
        y = np.full_like(x, p[0])
        for i in range(2):
            a, c, w = p[1 + 3 * i: 4 + 3 * i]
            y = y + a * w * w / ((x - c) ** 2 + w * w)
        return y

    def jac(p, x):
        j = np.empty((len(x), 7))
        j[:, 0] = 1.0
        for i in range(2):
            a, c, w = p[1 + 3 * i: 4 + 3 * i]
            d = x - c
            den = d * d + w * w
            j[:, 1 + 3 * i] = w * w / den
            j[:, 2 + 3 * i] = 2.0 * a * w * w * d / den**2
            j[:, 3 + 3 * i] = 2.0 * a * w * d * d / den**2
        return j

    return FitModel("double_lorentzian", names, evaluate, jac, lower, upper)


def exponential_decay_model() -> FitModel:
    """y = amp * exp(-t / t_d) + y0."""
    names = ("amp", "t_d", "y0")
    lower = np.array([-np.inf, 1e-12, -np.inf])
    upper = np.array([np.inf, np.inf, np.inf])

    def evaluate(p, t):
        return p[0] * np.exp(-t / p[1]) + p[2]

    def jac(p, t):
        e = np.exp(-t / p[1])
        j = np.empty((len(t), 3))
        j[:, 0] = e
        j[:, 1] = p[0] * e * t / (p[1] * p[1])
        j[:, 2] = 1.0
        return j

    return FitModel("exponential_decay", names, evaluate, jac, lower, upper)


def linear_model() -> FitModel:
    names = ("slope", "intercept")

    def evaluate(p, x):
        return p[0] * x + p[1]

    def jac(p, x):
        j = np.empty((len(x), 2))
        j[:, 0] = x
        j[:, 1] = 1.0
        return j

    return FitModel("linear", names, evaluate, jac,
                    np.array([-np.inf, -np.inf]), np.array([np.inf, np.inf]))


# ---------------------------------------------------------------------------
# initialization and high-level fits


def _pick_peaks(freqs, values, n_peaks, window: int = 3):
    """Smoothed local-maxima picking; returns n_peaks (center, height) pairs
    sorted by center, strongest first on ties.

    Noise rides on top of real lines, so after height-sorting the
    candidates a minimum-separation rule keeps each pick on its own peak.
    """
    kernel = np.ones(window) / window
    smooth = np.convolve(values, kernel, mode="same")
    cand = []
    for i in range(1, len(smooth) - 1):
        if smooth[i] >= smooth[i - 1] and smooth[i] >= smooth[i + 1]:
            cand.append((smooth[i], freqs[i]))
    cand.sort(key=lambda c: -c[0])
    min_sep = (freqs[-1] - freqs[0]) / (4.0 * n_peaks)
    kept = []
    for h, mu in cand:
        if all(abs(mu - mu0) >= min_sep for _, mu0 in kept):
            kept.append((h, mu))
        if len(kept) == n_peaks:
            break
    cand = kept
    if len(cand) < n_peaks:
        # pad with evenly spaced fallback positions
        extra = np.linspace(freqs[0], freqs[-1], n_peaks + 2)[1:-1]
        for pos in extra:
            if len(cand) >= n_peaks:
                break
            cand.append((float(np.max(values)) / 2.0, float(pos)))
    picked = sorted(cand[:n_peaks], key=lambda c: c[1])
    return [(mu, max(h, 1e-12)) for h, mu in picked]


def fit_gaussian_peaks_slanted(spec: Spectrum, n_peaks: int,
                               init_centers=None,
                               width_max: float | None = None) -> FitResult:
    """Multi-Gaussian on a slanted baseline; reports centers, FWHMs, areas."""
    freqs, values = spec.freqs, spec.values
    model = gaussian_peaks_slanted_model(n_peaks, freqs[0], freqs[-1],
                                         width_max)
    if len(spec) <= model.n_params:
        raise ValueError("spectrum shorter than the parameter count")
    step = float(np.median(np.diff(freqs)))
    slope0 = (values[-1] - values[0]) / (freqs[-1] - freqs[0])
    offset0 = values[0] - slope0 * freqs[0]
    init = [slope0 * 0.0, float(np.min(values))]
    if init_centers is not None:
        guesses = [(float(c), float(np.interp(c, freqs, values)))
                   for c in init_centers]
    else:
        guesses = _pick_peaks(freqs, values - np.min(values), n_peaks)
    for mu, h in guesses:
        init += [max(h, 1e-12), mu, 3.0 * step]
    result = lm_fit(model, freqs, values, spec.sigma, np.array(init))
    result.peaks = _gaussian_peaks(result, n_peaks)
    return result


def _gaussian_peaks(res: FitResult, n_peaks: int):
    peaks = []
    cov = res.covariance
    for i in range(n_peaks):
        ia, im, iw = 2 + 3 * i, 3 + 3 * i, 4 + 3 * i
        a, mu, s = res.params[ia], res.params[im], res.params[iw]
        va, vs = cov[ia, ia], cov[iw, iw]
        cas = cov[ia, iw]
        area = a * s * math.sqrt(2.0 * math.pi)
        area_var = 2.0 * math.pi * (s * s * va + a * a * vs
                                    + 2.0 * a * s * cas)
        peaks.append(PeakEstimate(
            center=float(mu),
            center_err=float(math.sqrt(max(cov[im, im], 0.0))),
            fwhm=float(GAUSS_FWHM * s),
            fwhm_err=float(GAUSS_FWHM * math.sqrt(max(vs, 0.0))),
            area=float(area),
            area_err=float(math.sqrt(max(area_var, 0.0))),
        ))
    return tuple(sorted(peaks, key=lambda p: p.center))


def fit_double_lorentzian(spec: Spectrum) -> FitResult:
    freqs, values = spec.freqs, spec.values
    model = double_lorentzian_model(freqs[0], freqs[-1])
    if len(spec) <= model.n_params:
        raise ValueError("spectrum shorter than the parameter count")
    step = float(np.median(np.diff(freqs)))
    base = float(np.min(values))
    guesses = _pick_peaks(freqs, values - base, 2)
    init = [base]
    for mu, h in guesses:
        init += [max(h, 1e-12), mu, 3.0 * step]
    result = lm_fit(model, freqs, values, spec.sigma, np.array(init))
    peaks = []
    for i in range(2):
        ia, ic, iw = 1 + 3 * i, 2 + 3 * i, 3 + 3 * i
        a, c, w = result.params[ia], result.params[ic], result.params[iw]
        # Lorentzian area = pi * A * w (HWHM convention)
        va, vw = result.covariance[ia, ia], result.covariance[iw, iw]
        caw = result.covariance[ia, iw]
        area = math.pi * a * w
        area_var = math.pi**2 * (w * w * va + a * a * vw + 2.0 * a * w * caw)
        peaks.append(PeakEstimate(
            center=float(c),
            center_err=float(math.sqrt(max(result.covariance[ic, ic], 0.0))),
            fwhm=float(2.0 * w),
            fwhm_err=float(2.0 * math.sqrt(max(vw, 0.0))),
            area=float(area),
            area_err=float(math.sqrt(max(area_var, 0.0))),
        ))
    result.peaks = tuple(sorted(peaks, key=lambda p: p.center))
    return result


def fit_exponential_decay(t, y, sigma=None) -> FitResult:
    """Fit y = A exp(-t/t_d) + y0; t in hours."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 4:
        raise ValueError("need at least 4 points for an exponential fit")
    if np.ptp(y) == 0.0:
        res = FitResult(
            model_name="exponential_decay",
            param_names=("amp", "t_d", "y0"),
            params=np.array([0.0, np.inf, float(y[0])]),
            covariance=np.full((3, 3), np.nan),
            residual_norm=0.0, n_iterations=0, converged=False,
            covariance_reliable=False,
            message="degenerate: constant series, decay time unbounded")
        return res
    y0_guess = float(y[np.argmax(t)])
    a_guess = float(y[np.argmin(t)] - y0_guess) or float(np.ptp(y))
    td_guess = float(np.ptp(t)) / 2.0 or 1.0
    init = np.array([a_guess, td_guess, y0_guess])
    return lm_fit(exponential_decay_model(), t, y, sigma, init)


def fit_powerlaw_loglog(power, t_d, t_d_err=None) -> FitResult:
    """Weighted linear regression of log(t_d) on log(power).

    Errors propagate as d(log t_d) = dt_d / t_d.  Natural logarithms.
    """
    power = np.asarray(power, dtype=float)
    t_d = np.asarray(t_d, dtype=float)
    if np.any(power <= 0) or np.any(t_d <= 0):
        raise ValueError("power and t_d must be positive for a log-log fit")
    if len(power) < 2:
        raise ValueError("need at least 2 points (fit is underdetermined)")
    x = np.log(power)
    y = np.log(t_d)
    sigma = None
    if t_d_err is not None:
        t_d_err = np.asarray(t_d_err, dtype=float)
        if np.any(t_d_err <= 0):
            raise ValueError("t_d_err must be positive")
        sigma = t_d_err / t_d
    slope0 = (y[-1] - y[0]) / (x[-1] - x[0]) if x[-1] != x[0] else 0.0
    init = np.array([slope0, y[0] - slope0 * x[0]])
    return lm_fit(linear_model(), x, y, sigma, init)


# ---------------------------------------------------------------------------
# kinetics


@dataclass(frozen=True)
class KineticsRow:
    time: float
    total_area: float
    areas: tuple[float, ...]
    fwhms: tuple[float, ...]
    failed: bool = False


@dataclass(frozen=True)
class KineticsResult:
    rows: tuple[KineticsRow, ...]
    decay: FitResult
    n_failed: int


def _kinetics_fit_one(args) -> KineticsRow:
    time, spec, n_peaks, init_centers = args
    try:
        res = fit_gaussian_peaks_slanted(spec, n_peaks,
                                         init_centers=init_centers)
        if not res.converged:
            raise FitError("peak fit did not converge", res.params)
        areas = tuple(p.area for p in res.peaks)
        fwhms = tuple(p.fwhm for p in res.peaks)
        return KineticsRow(float(time), float(sum(areas)), areas, fwhms)
    except (FitError, ValueError, np.linalg.LinAlgError):
        return KineticsRow(float(time), math.nan, (math.nan,) * n_peaks,
                           (math.nan,) * n_peaks, failed=True)


def kinetics_series(series, n_peaks: int = 3, init_centers=None,
                    workers: int = 1) -> KineticsResult:
    """Fit each (time, spectrum) pair and the exponential decay of total area.

    Per-spectrum failures leave a gap in the table; the decay fit uses the
    remaining points.  The independent per-spectrum fits may run on a
    worker pool; the result is order-preserving and worker-count invariant.
    """
    series = list(series)
    if len(series) < 3:
        raise ValueError("need at least 3 spectra for a kinetics series")
    jobs = [(time, spec, n_peaks, init_centers) for time, spec in series]
    if workers > 1 and len(jobs) > 1:
        from multiprocessing import Pool
        with Pool(workers) as pool:
            rows = pool.map(_kinetics_fit_one, jobs)
    else:
        rows = [_kinetics_fit_one(j) for j in jobs]
    n_failed = sum(r.failed for r in rows)
    good = [(r.time, r.total_area) for r in rows if not r.failed]
    if len(good) < 4:
        raise FitError(
            f"only {len(good)} usable spectra, cannot fit the decay")
    t = np.array([g[0] for g in good])
    a = np.array([g[1] for g in good])
    decay = fit_exponential_decay(t, a)
    return KineticsResult(tuple(rows), decay, n_failed)
