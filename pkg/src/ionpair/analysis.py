"""
Weighted least-squares estimators for parity data.

Nonlinear fits run scipy's trust-region solver on analytic Jacobians.
Standard errors come from the inverse of J^T J of the weighted residuals,
i.e. the data error bars are taken as absolute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, signal

from .errors import DegenerateDesign, InsufficientData, NoConvergence
from .noise import FWHM_PER_SIGMA

LN2 = math.log(2.0)


@dataclass
class FitResult:
    params: dict
    stderrs: dict
    chi2_reduced: float
    converged: bool
    covariance: np.ndarray = field(default=None, repr=False)

    def __getitem__(self, name):
        return self.params[name]

    def err(self, name) -> float:
        return self.stderrs[name]


def _arrays(data, y=None, y_err=None):
    """Accept a list of ParityTrace or explicit arrays."""
    if y is None:
        t = np.array([p.abscissa for p in data], float)
        y = np.array([p.parity_mean for p in data], float)
        e = np.array([p.parity_stderr for p in data], float)
        # all-equal outcomes give a zero sample error; floor at one count
        floor = np.array([1.0 / max(p.shots, 1) for p in data])
        return t, y, np.maximum(e, floor)
    t = np.asarray(data, float)
    y = np.asarray(y, float)
    e = np.ones_like(y) if y_err is None else np.asarray(y_err, float)
    if np.any(e <= 0):
        raise InsufficientData("error bars must be positive")
    return t, y, e


def _covariance(jac_w: np.ndarray) -> np.ndarray:
    jtj = jac_w.T @ jac_w
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        return np.full(jtj.shape, np.inf)
    if not np.all(np.isfinite(cov)) or np.any(np.diag(cov) < 0):
        return np.full(jtj.shape, np.inf)
    return cov


def _solve(resid, jac, x0, max_nfev=2000):
    try:
        res = optimize.least_squares(resid, x0, jac=jac, method="trf", x_scale="jac",
                                     max_nfev=max_nfev, xtol=1e-14, ftol=1e-14, gtol=1e-14)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise NoConvergence(str(exc)) from exc
    if res.status <= 0 or not np.all(np.isfinite(res.x)):
        raise NoConvergence(res.message)
    return res


# Damped sinusoid ------------------------------------------------------------

def _linear_amplitudes(t, y, w, freq, offset):
    cols = [np.cos(2 * np.pi * freq * t), np.sin(2 * np.pi * freq * t)]
    if offset:
        cols.append(np.ones_like(t))
    A = np.stack(cols, axis=1) * w[:, None]
    coef, *_ = np.linalg.lstsq(A, y * w, rcond=None)
    return coef


def _initial_decay_rate(t, y, w, freq, offset) -> float:
    """Log-linear regression of windowed fringe amplitudes against time."""
    n_win = 3 if len(t) >= 12 else 2
    order = np.argsort(t)
    amps, centers = [], []
    for chunk in np.array_split(order, n_win):
        if len(chunk) < 3:
            continue
        a, b, *_ = _linear_amplitudes(t[chunk], y[chunk], w[chunk], freq, offset)
        amps.append(math.hypot(a, b))
        centers.append(t[chunk].mean())
    amps = np.array(amps)
    if len(amps) < 2 or np.any(amps <= 0):
        return 0.0
    slope = np.polyfit(centers, np.log(amps), 1)[0]
    return max(-slope, 0.0)


def _candidate_frequencies(t, y, w, n_peaks=3):
    span = t.max() - t.min()
    dt = np.median(np.diff(np.sort(t)))
    f_max = 0.5 / dt
    grid = np.linspace(0.25 / span, f_max, max(int(20 * f_max * span), 200))
    yc = (y - np.average(y, weights=w ** 2))
    power = signal.lombscargle(t, yc, 2 * np.pi * grid, precenter=False)
    peaks, _ = signal.find_peaks(power)
    if len(peaks) == 0:
        return [grid[np.argmax(power)]]
    top = peaks[np.argsort(power[peaks])[::-1][:n_peaks]]
    return list(grid[top])


def damped_sinusoid(t, C0, freq, phase, decay_rate, offset=0.0):
    t = np.asarray(t, float)
    return C0 * np.exp(-decay_rate * t) * np.cos(2 * np.pi * freq * t + phase) + offset


def fit_damped_sinusoid(trace, exclude_below: float = 0.0, offset: bool = False,
                        y=None, y_err=None) -> FitResult:
    """Fit C0 exp(-t/tau_d) cos(2 pi freq t + phase) [+ offset].

    ``trace`` is a list of ParityTrace (abscissa in seconds) or, with ``y``
    given, an array of times. Points with t < ``exclude_below`` are dropped.
    The frequency is seeded from the strongest periodogram peaks and the
    best of the resulting local minima is kept.
    """
    t, yy, e = _arrays(trace, y, y_err)
    keep = t >= exclude_below
    t, yy, e = t[keep], yy[keep], e[keep]
    n_par = 5 if offset else 4
    if len(t) < max(6, n_par + 1) or np.ptp(t) <= 0:
        raise InsufficientData(f"need >= {max(6, n_par + 1)} distinct points, got {len(t)}")
    w = 1.0 / e

    def unpack(x):
        return x[0], x[1], x[2], x[3], (x[4] if offset else 0.0)

    def resid(x):
        return (damped_sinusoid(t, *unpack(x)) - yy) * w

    def jac(x):
        C, f, ph, r, _ = unpack(x)
        env = np.exp(-r * t)
        arg = 2 * np.pi * f * t + ph
        c, s = np.cos(arg), np.sin(arg)
        cols = [env * c, -C * env * s * 2 * np.pi * t, -C * env * s, -t * C * env * c]
        if offset:
            cols.append(np.ones_like(t))
        return np.stack(cols, axis=1) * w[:, None]

    best = None
    for f0 in _candidate_frequencies(t, yy, w):
        coef = _linear_amplitudes(t, yy, w, f0, offset)
        C0, ph0 = math.hypot(coef[0], coef[1]), math.atan2(-coef[1], coef[0])
        r0 = _initial_decay_rate(t, yy, w, f0, offset)
        x0 = [C0, f0, ph0, r0] + ([coef[2]] if offset else [])
        try:
            res = _solve(resid, jac, np.array(x0, float))
        except NoConvergence:
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise NoConvergence("no frequency candidate converged")

    x = best.x.copy()
    if x[0] < 0:
        x[0], x[2] = -x[0], x[2] + math.pi
    if x[1] < 0:
        x[1], x[2] = -x[1], -x[2]
    x[2] = math.remainder(x[2], 2 * math.pi)
    cov = _covariance(jac(x))
    err = np.sqrt(np.diag(cov))
    names = ["C0", "freq", "phase", "decay_rate"] + (["offset"] if offset else [])
    params = dict(zip(names, map(float, x)))
    stderrs = dict(zip(names, map(float, err)))
    rate = params["decay_rate"]
    params["tau_d"] = 1.0 / rate if rate > 0 else math.inf
    stderrs["tau_d"] = stderrs["decay_rate"] / rate ** 2 if rate > 0 else math.inf
    dof = len(t) - len(names)
    chi2 = float(2 * best.cost / dof) if dof > 0 else 0.0
    converged = bool(best.success and np.all(np.isfinite(err))
                     and params["C0"] > 3 * stderrs["C0"])
    return FitResult(params, stderrs, chi2, converged, cov)


# Exponential and Gaussian decays -------------------------------------------

def _loglinear(t, y, power):
    """Regress ln y on t**power using the positive points; returns (ln C0, slope)."""
    pos = y > 0
    if pos.sum() < 2:
        return math.log(max(np.max(np.abs(y)), 1e-12)), 0.0
    slope, icpt = np.polyfit(t[pos] ** power, np.log(y[pos]), 1)
    return icpt, slope


def fit_exponential(t, y, y_err=None) -> FitResult:
    """Fit C0 exp(-t / tau)."""
    t, y, e = _arrays(t, y, y_err)
    if len(t) < 3 or np.ptp(t) <= 0:
        raise InsufficientData("need >= 3 distinct points")
    w = 1.0 / e
    lnc, slope = _loglinear(t, y, 1)
    x0 = np.array([math.exp(lnc), max(-slope, 0.0)])

    def resid(x):
        return (x[0] * np.exp(-x[1] * t) - y) * w

    def jac(x):
        ex = np.exp(-x[1] * t)
        return np.stack([ex, -t * x[0] * ex], axis=1) * w[:, None]

    res = _solve(resid, jac, x0)
    cov = _covariance(jac(res.x))
    err = np.sqrt(np.diag(cov))
    C0, rate = map(float, res.x)
    tau = 1.0 / rate if rate > 0 else math.inf
    params = {"C0": C0, "decay_rate": rate, "tau": tau}
    stderrs = {"C0": float(err[0]), "decay_rate": float(err[1]),
               "tau": float(err[1] / rate ** 2) if rate > 0 else math.inf}
    dof = len(t) - 2
    converged = bool(res.success and np.all(np.isfinite(err)) and rate > 3 * err[1])
    return FitResult(params, stderrs, float(2 * res.cost / dof) if dof else 0.0,
                     converged, cov)


def gaussian_contrast(t, C0, tau_half):
    return C0 * np.exp(-LN2 * (np.asarray(t, float) / tau_half) ** 2)


def fit_contrast_gaussian(t, contrast=None, contrast_err=None) -> FitResult:
    """Fit C0 exp(-ln2 (t / tau_half)^2); tau_half is where the contrast halves.

    Internally the fit parameter is k = 1/tau_half^2, so a flat curve
    (k consistent with zero) reports ``converged=False`` instead of failing.
    """
    t, c, e = _arrays(t, contrast, contrast_err)
    if len(t) < 5 or np.ptp(t) <= 0:
        raise InsufficientData("need >= 5 distinct points")
    w = 1.0 / e
    lnc, slope = _loglinear(t, c, 2)
    x0 = np.array([math.exp(lnc), max(-slope / LN2, 1e-12 / np.ptp(t) ** 2)])

    def resid(x):
        return (x[0] * np.exp(-LN2 * x[1] * t * t) - c) * w

    def jac(x):
        ex = np.exp(-LN2 * x[1] * t * t)
        return np.stack([ex, -LN2 * t * t * x[0] * ex], axis=1) * w[:, None]

    res = _solve(resid, jac, x0)
    cov = _covariance(jac(res.x))
    err = np.sqrt(np.diag(cov))
    C0, k = map(float, res.x)
    decays = k > 0 and np.isfinite(err[1]) and k > 3 * err[1]
    tau = 1.0 / math.sqrt(k) if k > 0 else math.inf
    params = {"C0": C0, "k": k, "tau_half": tau}
    stderrs = {"C0": float(err[0]), "k": float(err[1]),
               "tau_half": float(err[1] / (2 * k ** 1.5)) if k > 0 else math.inf}
    dof = len(t) - 2
    return FitResult(params, stderrs, float(2 * res.cost / dof), bool(res.success and decays),
                     cov)


def linewidth_from_tau_half(tau_half: float) -> float:
    """Gaussian laser FWHM (Hz) implied by the half-width of the parity contrast.

    For a quasi-static Gaussian laser error of rms sigma_f the parity contrast
    is (1/2) exp(-2 (2 pi sigma_f t)^2), which halves at
    t = sqrt(ln2 / 2) / (2 pi sigma_f); with FWHM = 2 sqrt(2 ln2) sigma_f
    this gives FWHM = ln2 / (pi tau_half).
    """
    if not tau_half > 0:
        raise ValueError("tau_half must be > 0")
    return LN2 / (math.pi * tau_half)


def parity_contrast_quasi_static(laser_fwhm: float, t, c0: float = 0.5):
    sigma = laser_fwhm / FWHM_PER_SIGMA
    return c0 * np.exp(-2 * (2 * np.pi * sigma * np.asarray(t, float)) ** 2)


# Phase scans and straight lines --------------------------------------------

def contrast_from_phase_scan(trace, y=None, y_err=None) -> FitResult:
    """Fit A cos(phi0 + phi_off) + B to a phase scan; ``contrast`` is |A|."""
    phi, yy, e = _arrays(trace, y, y_err)
    if len(phi) < 3:
        raise InsufficientData("need >= 3 phases")
    w = 1.0 / e
    X = np.stack([np.cos(phi), np.sin(phi), np.ones_like(phi)], axis=1)
    Xw = X * w[:, None]
    cov = _covariance(Xw)
    if not np.all(np.isfinite(cov)):
        raise DegenerateDesign("phase grid does not resolve a fringe")
    a, b, c = cov @ (Xw.T @ (yy * w))
    A = math.hypot(a, b)
    g = np.array([a, b, 0.0]) / A if A > 0 else np.array([1.0, 0.0, 0.0])
    var_A = float(g @ cov @ g)
    r = (X @ [a, b, c] - yy) * w
    dof = len(phi) - 3
    params = {"contrast": A, "phase_offset": math.atan2(-b, a), "offset": float(c)}
    stderrs = {"contrast": math.sqrt(var_A),
               "phase_offset": math.sqrt(float(np.array([-b, a, 0]) @ cov @ np.array([-b, a, 0])))
               / A ** 2 if A > 0 else math.inf,
               "offset": math.sqrt(cov[2, 2])}
    return FitResult(params, stderrs, float(r @ r / dof) if dof else 0.0, True, cov)


def fit_line(x, y, y_err=None) -> FitResult:
    """Weighted straight line y = alpha x + offset."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    e = np.ones_like(y) if y_err is None else np.asarray(y_err, float)
    if len(x) < 2 or np.ptp(x) == 0:
        raise DegenerateDesign("need at least two distinct x values")
    w = 1.0 / e ** 2
    S, Sx, Sy = w.sum(), (w * x).sum(), (w * y).sum()
    Sxx, Sxy = (w * x * x).sum(), (w * x * y).sum()
    det = S * Sxx - Sx * Sx
    alpha = (S * Sxy - Sx * Sy) / det
    offset = (Sxx * Sy - Sx * Sxy) / det
    cov = np.array([[S, -Sx], [-Sx, Sxx]]) / det
    r = (y - alpha * x - offset) / e
    dof = len(x) - 2
    return FitResult({"alpha": float(alpha), "offset": float(offset)},
                     {"alpha": math.sqrt(cov[0, 0]), "offset": math.sqrt(cov[1, 1])},
                     float(r @ r / dof) if dof else 0.0, True, cov)


def projection_noise_sigma(tau: float, contrast: float, n: int) -> float:
    """Rough projection-noise limit 1/((tau/2) C sqrt(2N)) on a parity frequency."""
    if not (tau > 0 and 0 < contrast <= 1 and n >= 1):
        raise ValueError("need tau > 0, 0 < C <= 1, N >= 1")
    return 1.0 / ((tau / 2) * contrast * math.sqrt(2 * n))
