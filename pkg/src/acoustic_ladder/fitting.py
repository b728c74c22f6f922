"""Fit multi-branch mBVD models to sampled admittance traces.

The initial guess de-embeds an estimate of the electrode parasitics, reads
each mode off the conductance of the remaining core, and keeps the (Rs, Ls)
candidate whose guessed model best matches the trace.  Refinement is a
bounded Nelder-Mead search on the RMS error of log10|Y|, restarted from its
own best point until it stops improving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.signal import find_peaks, peak_widths, savgol_filter

from .errors import FitError, InsufficientPeaksError
from .mbvd import TWO_PI, MotionalBranch, ResonatorModel, admittance, admittance_from_rlc

MIN_TRACE_POINTS = 16
# Minimum peak prominence, in decades of conductance.
PEAK_PROMINENCE = 0.005
MAX_ITERATIONS = 5000
OBJECTIVES = ("log-magnitude", "complex")

_RS_FRACTIONS = (0.0, 0.5, 0.8, 0.95)
_LS_CANDIDATES = np.linspace(0.0, 1e-9, 101)


@dataclass(frozen=True)
class AdmittanceTrace:
    frequencies: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        y = np.asarray(self.values, dtype=complex)
        if f.ndim != 1 or f.shape != y.shape:
            raise ValueError("frequencies and values must be 1-D arrays of equal length")
        if len(f) < MIN_TRACE_POINTS:
            raise ValueError(f"a trace needs at least {MIN_TRACE_POINTS} points, got {len(f)}")
        if not np.all(np.diff(f) > 0) or f[0] <= 0:
            raise ValueError("trace frequencies must be positive and strictly ascending")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", y)

    @classmethod
    def from_model(cls, model: ResonatorModel, frequencies, label="") -> "AdmittanceTrace":
        f = np.asarray(frequencies, dtype=float)
        return cls(f, admittance(model, f), label)


@dataclass(frozen=True)
class FitResult:
    model: ResonatorModel
    residual: float
    branch_residuals: tuple[float, ...]
    initial_residual: float
    iterations: int
    status: str = "converged"  # or "max-iterations"
    guess: Optional[ResonatorModel] = field(default=None, repr=False)


def log_magnitude_residual(model: ResonatorModel, trace: AdmittanceTrace) -> float:
    err = np.log10(np.abs(admittance(model, trace.frequencies))) - np.log10(np.abs(trace.values))
    return float(np.sqrt(np.mean(err**2)))


def _branch_residuals(model, trace, half_width=0.03):
    err = np.log10(np.abs(admittance(model, trace.frequencies))) - np.log10(np.abs(trace.values))
    out = []
    for b in model.branches:
        near = np.abs(trace.frequencies - b.fs) <= half_width * b.fs
        out.append(float(np.sqrt(np.mean(err[near] ** 2))) if near.any() else float("nan"))
    return tuple(out)


def _core_branches(f, y_core, n, smooth):
    """Peaks of the core conductance -> list of (fs, q, cm), plus c0; None if unusable."""
    w = TWO_PI * f
    g = y_core.real
    lg = np.log10(np.maximum(g, 1e-300))
    if smooth and len(f) > 40:
        lg = savgol_filter(lg, 31, 3)
    peaks, props = find_peaks(lg, prominence=PEAK_PROMINENCE)
    if len(peaks) < n:
        return None, f[peaks]
    top = np.argsort(props["prominences"], kind="stable")[::-1][:n]
    peaks = np.sort(peaks[top])
    gs = 10.0**lg
    _, _, left, right = peak_widths(gs, peaks, rel_height=0.5)
    idx = np.arange(len(f))
    found = []
    for p, lo, hi in zip(peaks, left, right):
        fs = f[p]
        bw = np.interp(hi, idx, f) - np.interp(lo, idx, f)
        if not bw > 0:
            return None, f[peaks]
        q = fs / bw
        rm = 1.0 / gs[p]
        lm = q * rm / (TWO_PI * fs)
        cm = 1.0 / ((TWO_PI * fs) ** 2 * lm)
        found.append((fs, q, cm, rm, lm))
    rm, lm, cm = (np.array([b[k] for b in found]) for k in (3, 4, 2))
    ym = 1.0 / (rm + 1j * (w[:, None] * lm - 1.0 / (w[:, None] * cm)))
    c0 = float(np.median((y_core.imag - ym.sum(axis=1).imag) / w))
    if not c0 > 0:
        return None, f[peaks]
    return (c0, [b[:3] for b in found]), f[peaks]


def initial_guess(trace: AdmittanceTrace, n_branches: int, smooth: Optional[bool] = None) -> ResonatorModel:
    """Starting model with ``n_branches`` motional branches.

    Each candidate (Rs, Ls) is removed from 1/Y; the ``n_branches`` most
    prominent peaks of the remaining conductance give fs (peak position),
    Q (half-power width) and cm (peak height), and c0 comes from the
    susceptance left after subtracting those branches.  The candidate whose
    model has the lowest log-magnitude residual wins.

    Raises :class:`InsufficientPeaksError` when no candidate shows enough peaks.
    """
    if n_branches < 1:
        raise ValueError("n_branches must be at least 1")
    f = trace.frequencies
    y = trace.values
    w = TWO_PI * f
    if smooth is None:
        smooth = bool(np.median(np.abs(np.diff(np.log10(np.abs(y)), n=2))) > 1e-4)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = 1.0 / y
    rs_max = max(float(np.min(z.real)), 0.0)
    target = np.log10(np.abs(y))
    best = None
    most_peaks = np.array([])
    for frac in _RS_FRACTIONS:
        rs = frac * rs_max
        for ls in _LS_CANDIDATES:
            with np.errstate(divide="ignore", invalid="ignore"):
                y_core = 1.0 / (z - rs - 1j * w * ls)
            if not np.all(np.isfinite(y_core)):
                continue
            got, peaks = _core_branches(f, y_core, n_branches, smooth)
            if got is None:
                if len(peaks) > len(most_peaks):
                    most_peaks = peaks
                continue
            c0, found = got
            k2 = [cm / (c0 + cm) for _, _, cm in found]
            if any(not 1e-6 < k < 0.95 for k in k2):
                continue
            fs = np.array([b[0] for b in found])
            q = np.array([b[1] for b in found])
            rm, lm, cm = _rlc_arrays(c0, fs, q, np.array(k2))
            y_model = admittance_from_rlc(f, c0, rs, ls, 0.0, rm, lm, cm)
            err = float(np.sqrt(np.mean((np.log10(np.abs(y_model)) - target) ** 2)))
            if best is None or err < best[0]:
                best = (err, c0, rs, ls, fs, q, k2)
    if best is None:
        raise InsufficientPeaksError(n_branches, most_peaks)
    _, c0, rs, ls, fs, q, k2 = best
    branches = [
        MotionalBranch(f"m{i + 1}", float(a), float(b), float(c)) for i, (a, b, c) in enumerate(zip(fs, q, k2))
    ]
    return ResonatorModel(c0=c0, rs=rs, ls=ls, branches=branches, label=trace.label)


def _rlc_arrays(c0, fs, q, k2):
    ws = TWO_PI * fs
    cm = c0 * k2 / (1.0 - k2)
    lm = 1.0 / (ws * ws * cm)
    rm = ws * lm / q
    return rm, lm, cm


def fit_mbvd(
    trace: AdmittanceTrace,
    n_branches: int,
    guess: Optional[ResonatorModel] = None,
    max_iterations: int = MAX_ITERATIONS,
    xatol: float = 1e-9,
    max_restarts: int = 8,
    objective: str = "log-magnitude",
) -> FitResult:
    """Least log-magnitude-error mBVD model for ``trace``.

    Parameters are searched in units of their guessed values within fixed
    bounds: fs within +-10 % of the guess, k2 in [1e-4, 0.95], Q in [1, 1e4],
    c0 within [0.1, 10] x guess, Rs and Ls from zero to ten times the guess
    (at least ten times the smallest Re(1/Y) of the trace for Rs, 1 nH for Ls).
    Branches are sorted by fs (larger k2 first on ties) every evaluation so
    their identity cannot swap.  The search is deterministic.

    ``objective="complex"`` minimises the RMS of ``|ln(Y_model / Y)|``
    instead, which also weighs phase.  ``FitResult.residual`` is always the
    log-magnitude figure.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    if guess is None:
        guess = initial_guess(trace, n_branches)
    elif len(guess.branches) != n_branches:
        raise FitError(f"guess has {len(guess.branches)} branches, expected {n_branches}")
    branches = sorted(guess.branches, key=lambda b: (b.fs, -b.k2))
    labels = [b.label for b in branches]
    f = trace.frequencies
    target = np.log10(np.abs(trace.values))
    y_meas = trace.values

    # A zero Rs / Ls guess would pin the parameter at zero; the caps then fall
    # back to floors taken from the trace (Rs) or a fixed 1 nH (Ls).
    with np.errstate(divide="ignore", invalid="ignore"):
        re_z = np.nanmin((1.0 / trace.values).real)
    rs_floor = max(10.0 * float(re_z), 1.0) if np.isfinite(re_z) else 1.0
    x0 = [guess.c0, guess.rs, guess.ls]
    lo = [0.1 * guess.c0, 0.0, 0.0]
    hi = [10.0 * guess.c0, max(10.0 * guess.rs, rs_floor), max(10.0 * guess.ls, 1e-9)]
    for b in branches:
        x0 += [b.fs, b.q, b.k2]
        lo += [0.9 * b.fs, 1.0, 1e-4]
        hi += [1.1 * b.fs, 1e4, 0.95]
    x0 = np.array(x0)
    scale = np.where(x0 > 0, x0, np.array(hi))
    lo = np.array(lo) / scale
    hi = np.array(hi) / scale
    u = np.clip(x0 / scale, lo, hi)

    def unpack(v):
        p = v * scale
        fs = p[3::3]
        q = p[4::3]
        k2 = p[5::3]
        order = np.lexsort((-k2, fs))
        return p[0], p[1], p[2], fs[order], q[order], k2[order]

    def cost(v):
        c0, rs, ls, fs, q, k2 = unpack(v)
        rm, lm, cm = _rlc_arrays(c0, fs, q, k2)
        with np.errstate(all="ignore"):
            y = admittance_from_rlc(f, c0, rs, ls, 0.0, rm, lm, cm)
            if objective == "complex":
                e = np.abs(np.log(y / y_meas))
            else:
                e = np.log10(np.abs(y)) - target
        val = float(np.sqrt(np.mean(e * e)))
        return val if math.isfinite(val) else 1e300

    best_val = cost(u)
    initial_residual = best_val if objective == "log-magnitude" else log_magnitude_residual(guess, trace)
    best_u = u
    iterations = 0
    status = "converged"
    for _ in range(max_restarts):
        res = minimize(
            cost,
            best_u,
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={"maxiter": max_iterations, "xatol": xatol, "fatol": 1e-15, "adaptive": True},
        )
        iterations += int(res.nit)
        improved = res.fun < best_val
        if improved:
            gain = best_val - res.fun
            best_val, best_u = float(res.fun), res.x
        if best_val < 1e-12:
            # exact to rounding; further restarts only crawl along a bound
            status = "converged"
            break
        if res.nit >= max_iterations:
            status = "max-iterations"
        elif not improved or gain <= 1e-12 * best_val:
            status = "converged"
            break
    c0, rs, ls, fs, q, k2 = unpack(best_u)
    model = ResonatorModel(
        c0=float(c0),
        rs=float(rs),
        ls=float(ls),
        branches=[MotionalBranch(lab, float(a), float(b), float(c)) for lab, a, b, c in zip(labels, fs, q, k2)],
        label=trace.label or guess.label,
        meta=guess.meta,
    )
    return FitResult(
        model=model,
        residual=log_magnitude_residual(model, trace),
        branch_residuals=_branch_residuals(model, trace),
        initial_residual=initial_residual,
        iterations=iterations,
        status=status,
        guess=guess,
    )
