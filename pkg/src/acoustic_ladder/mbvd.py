"""Multi-branch modified Butterworth-Van Dyke (mBVD) resonator models.

A resonator is a static capacitance ``c0`` in parallel with one or more
motional R-L-C branches (one per acoustic mode), and that parallel block is
in series with the electrode resistance ``rs`` and inductance ``ls``.

Each branch is specified by its series resonance ``fs``, quality factor ``q``
and coupling ``k2``, where coupling is measured against the full static
capacitance::

    k2 = (fp**2 - fs**2) / fp**2 = cm / (c0 + cm)

``fp`` being the anti-resonance of that branch in parallel with ``c0`` alone.
Other conventions can be mapped onto this one with :func:`convert_coupling`.

All quantities are SI (Hz, F, H, Ohm, S).
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ModelError, ResonanceNotFoundError

TWO_PI = 2.0 * math.pi

# Relative spacing under which two branch frequencies count as identical.
FS_DISTINCT_RTOL = 1e-6


@dataclass(frozen=True)
class MotionalBranch:
    """One acoustic mode, as (fs, Q, k2)."""

    label: str
    fs: float
    q: float
    k2: float

    def __post_init__(self):
        if not (math.isfinite(self.fs) and self.fs > 0):
            raise ModelError(f"branch {self.label!r}: fs must be positive, got {self.fs!r}")
        if not self.q > 0:
            raise ModelError(f"branch {self.label!r}: q must be positive, got {self.q!r}")
        if not (math.isfinite(self.k2) and 0 <= self.k2 < 1):
            raise ModelError(f"branch {self.label!r}: k2 must lie in [0, 1), got {self.k2!r}")

    @property
    def fp(self) -> float:
        """Anti-resonance of this branch against the static capacitance alone."""
        return self.fs / math.sqrt(1.0 - self.k2)


@dataclass(frozen=True)
class MotionalRLC:
    rm: float
    lm: float
    cm: float

    def __post_init__(self):
        if not self.rm >= 0:
            raise ModelError(f"rm must be non-negative, got {self.rm!r}")
        if not self.lm > 0:
            raise ModelError(f"lm must be positive, got {self.lm!r}")
        if not self.cm > 0:
            raise ModelError(f"cm must be positive, got {self.cm!r}")


@dataclass(frozen=True)
class ResonatorMeta:
    """Descriptive geometry. Never enters the electrical computation."""

    ln_thickness_nm: Optional[float] = None
    wavelength_um: Optional[float] = None
    electrode_width_nm: Optional[float] = None
    electrode_pairs: Optional[float] = None
    aperture_um: Optional[float] = None


@dataclass(frozen=True)
class ResonatorModel:
    c0: float
    branches: tuple[MotionalBranch, ...]
    rs: float = 0.0
    ls: float = 0.0
    r0: float = 0.0  # in series with c0; kept at zero for the published tables
    label: str = ""
    meta: Optional[ResonatorMeta] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not (math.isfinite(self.c0) and self.c0 > 0):
            raise ModelError(f"resonator {self.label!r}: c0 must be positive, got {self.c0!r}")
        for name in ("rs", "ls", "r0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ModelError(f"resonator {self.label!r}: {name} must be non-negative, got {value!r}")
        if not self.branches:
            raise ModelError(f"resonator {self.label!r}: at least one motional branch is required")
        ordered = sorted(b.fs for b in self.branches)
        for lo, hi in zip(ordered, ordered[1:]):
            if hi - lo <= FS_DISTINCT_RTOL * hi:
                raise ModelError(
                    f"resonator {self.label!r}: branches at {lo!r} Hz and {hi!r} Hz are not distinct"
                )

    def admittance(self, f):
        return admittance(self, f)

    def with_branches(self, branches: Sequence[MotionalBranch]) -> "ResonatorModel":
        return dataclasses.replace(self, branches=tuple(branches))

    def scaled(self, fs_scale: float = 1.0, c0_scale: float = 1.0) -> "ResonatorModel":
        """Return a copy with every fs multiplied by ``fs_scale`` and c0 by ``c0_scale``."""
        if fs_scale == 1.0 and c0_scale == 1.0:
            return self
        branches = tuple(dataclasses.replace(b, fs=b.fs * fs_scale) for b in self.branches)
        return dataclasses.replace(self, c0=self.c0 * c0_scale, branches=branches)


# ---------------------------------------------------------------------------
# branch <-> RLC


def branch_to_rlc(branch: MotionalBranch, c0: float) -> MotionalRLC:
    """Motional R-L-C values of ``branch`` against static capacitance ``c0``.

    >>> rlc = branch_to_rlc(MotionalBranch("toy", fs=1.0, q=1.0, k2=0.5), c0=1.0)
    >>> rlc.cm
    1.0
    """
    if not c0 > 0:
        raise ModelError(f"c0 must be positive, got {c0!r}")
    if branch.k2 <= 0:
        raise ModelError(f"branch {branch.label!r}: k2 = 0 is a degenerate branch; omit it")
    if branch.k2 >= 1:
        raise ModelError(f"branch {branch.label!r}: k2 must be < 1")
    if math.isinf(branch.q):
        raise ModelError("infinite Q unsupported")
    ws = TWO_PI * branch.fs
    cm = c0 * branch.k2 / (1.0 - branch.k2)
    lm = 1.0 / (ws * ws * cm)
    rm = ws * lm / branch.q
    return MotionalRLC(rm=rm, lm=lm, cm=cm)


def rlc_to_branch(rlc: MotionalRLC, c0: float, label: str = "") -> MotionalBranch:
    """Inverse of :func:`branch_to_rlc`."""
    if not c0 > 0:
        raise ModelError(f"c0 must be positive, got {c0!r}")
    if rlc.rm == 0:
        raise ModelError("infinite Q unsupported")
    ws = 1.0 / math.sqrt(rlc.lm * rlc.cm)
    return MotionalBranch(
        label=label,
        fs=ws / TWO_PI,
        q=ws * rlc.lm / rlc.rm,
        k2=rlc.cm / (c0 + rlc.cm),
    )


# Each convention maps to the capacitance ratio cm / c0.
_TO_RATIO = {
    "mbvd": lambda k: k / (1.0 - k),
    "ratio": lambda k: k,
    "pi2_8": lambda k: k * 8.0 / math.pi**2,
}
_FROM_RATIO = {
    "mbvd": lambda r: r / (1.0 + r),
    "ratio": lambda r: r,
    "pi2_8": lambda r: r * math.pi**2 / 8.0,
}
COUPLING_CONVENTIONS = tuple(_TO_RATIO)


def convert_coupling(k2: float, source: str, target: str = "mbvd") -> float:
    """Convert a coupling figure between conventions.

    ``mbvd``
        (fp^2 - fs^2) / fp^2, equal to cm / (c0 + cm). Used everywhere in this package.
    ``ratio``
        (fp^2 - fs^2) / fs^2, equal to cm / c0.
    ``pi2_8``
        (pi^2 / 8) * cm / c0, common in XBAR literature.
    """
    try:
        to_ratio = _TO_RATIO[source]
        from_ratio = _FROM_RATIO[target]
    except KeyError as exc:
        raise ValueError(f"unknown coupling convention {exc.args[0]!r}") from None
    return from_ratio(to_ratio(k2))


# ---------------------------------------------------------------------------
# admittance


def _branch_arrays(model: ResonatorModel):
    rlcs = [branch_to_rlc(b, model.c0) for b in model.branches]
    rm = np.array([r.rm for r in rlcs])
    lm = np.array([r.lm for r in rlcs])
    cm = np.array([r.cm for r in rlcs])
    return rm, lm, cm


def admittance_from_rlc(f, c0, rs, ls, r0, rm, lm, cm):
    """Vectorised admittance of an mBVD circuit given raw element arrays.

    ``f`` is a 1-D array; ``rm``, ``lm``, ``cm`` are 1-D arrays over branches.
    Exact lossless poles evaluate to ``inf``.
    """
    w = TWO_PI * f[:, None]
    x = w * lm - 1.0 / (w * cm)
    # Cancellation down to a few ulps of the inductive reactance is an exact pole.
    pole = (rm == 0) & (np.abs(x) <= 8 * np.finfo(float).eps * w * lm)
    z = rm + 1j * x
    with np.errstate(divide="ignore", invalid="ignore"):
        ym = np.where(pole, 0.0, 1.0 / np.where(pole, 1.0, z))
    w1 = w[:, 0]
    if r0:
        y_static = 1.0 / (r0 + 1.0 / (1j * w1 * c0))
    else:
        y_static = 1j * w1 * c0
    y_core = y_static + ym.sum(axis=1)
    core_pole = pole.any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        z_core = np.where(core_pole, 0.0, 1.0 / np.where(y_core == 0, 1.0, y_core))
        z_total = rs + 1j * w1 * ls + z_core
        y = np.where(z_total == 0, complex(np.inf, 0.0), 1.0 / np.where(z_total == 0, 1.0, z_total))
    # y_core == 0 means an exact lossless anti-resonance: open circuit.
    return np.where((y_core == 0) & ~core_pole, 0.0, y)


def admittance(model: ResonatorModel, f):
    """Complex admittance of ``model`` at frequency ``f`` (scalar or array, Hz)."""
    f_arr = np.asarray(f, dtype=float)
    scalar = f_arr.ndim == 0
    f_arr = np.atleast_1d(f_arr)
    if np.any(~(f_arr > 0)):
        raise ModelError("admittance requires f > 0")
    rm, lm, cm = _branch_arrays(model)
    y = admittance_from_rlc(f_arr, model.c0, model.rs, model.ls, model.r0, rm, lm, cm)
    return complex(y[0]) if scalar else y


def impedance(model: ResonatorModel, f):
    y = admittance(model, f)
    with np.errstate(divide="ignore"):
        return 1.0 / y


# ---------------------------------------------------------------------------
# resonance search

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(fun, a, b, rtol):
    """Minimise ``fun`` on [a, b] (log-frequency coordinates) by golden-section search."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    while abs(b - a) > rtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _local_extrema(values):
    interior = values[1:-1]
    maxima = np.flatnonzero((interior > values[:-2]) & (interior >= values[2:])) + 1
    minima = np.flatnonzero((interior < values[:-2]) & (interior <= values[2:])) + 1
    return maxima, minima


def resonance_frequencies(
    model: ResonatorModel,
    f_min: Optional[float] = None,
    f_max: Optional[float] = None,
    points_per_decade: int = 4000,
    rtol: float = 1e-6,
) -> list[tuple[float, float]]:
    """Per-branch (fs, fp) located as the |Y| maximum and the following minimum.

    A log-spaced scan brackets each extremum, which is then refined by
    golden-section search to relative tolerance ``rtol``.  Returned pairs are
    sorted by frequency.  Raises :class:`ResonanceNotFoundError` naming the
    first branch whose extrema are not bracketed inside ``[f_min, f_max]``.
    """
    branches = sorted(model.branches, key=lambda b: b.fs)
    if f_min is None:
        f_min = 0.5 * branches[0].fs
    if f_max is None:
        f_max = 2.0 * max(b.fp for b in branches)
    if not 0 < f_min < f_max:
        raise ValueError("need 0 < f_min < f_max")
    if points_per_decade < 2000:
        raise ValueError("points_per_decade must be at least 2000")

    decades = math.log10(f_max / f_min)
    n = max(int(math.ceil(decades * points_per_decade)) + 1, 16)
    logf = np.linspace(math.log10(f_min), math.log10(f_max), n)
    with np.errstate(divide="ignore"):
        mag = np.log(np.abs(admittance(model, 10.0**logf)))
    maxima, minima = _local_extrema(mag)

    def log_mag(lf):
        with np.errstate(divide="ignore"):
            return math.log(abs(admittance(model, 10.0**lf)))

    target = np.log10([b.fs for b in branches])
    # Only the few maxima nearest each nominal fs can take part in the assignment.
    near = set()
    for t in target:
        near.update(np.argsort(np.abs(logf[maxima] - t))[:3].tolist())
    maxima = maxima[sorted(near)]
    found = logf[maxima]
    k = min(len(branches), len(found))
    # Order-preserving assignment of branches to maxima, least total log distance.
    best = None
    for bsel in itertools.combinations(range(len(branches)), k):
        for msel in itertools.combinations(range(len(found)), k):
            cost = float(np.sum(np.abs(target[list(bsel)] - found[list(msel)])))
            if best is None or cost < best[0]:
                best = (cost, bsel, msel)
    matched = dict(zip(best[1], best[2])) if best else {}
    for i, b in enumerate(branches):
        if i not in matched:
            raise ResonanceNotFoundError(b.label, "no |Y| maximum bracketed in scan range")

    step = logf[1] - logf[0]
    tol = math.log10(1.0 + rtol)
    out = []
    for i, b in enumerate(branches):
        im = maxima[matched[i]]
        nxt = maxima[matched[i + 1]] if i + 1 in matched else len(logf) - 1
        following = minima[(minima > im) & (minima < nxt)]
        if len(following) == 0:
            raise ResonanceNotFoundError(b.label, "no |Y| minimum bracketed after the maximum")
        lf_s = _golden(lambda lf: -log_mag(lf), logf[im] - step, logf[im] + step, tol)
        jm = following[0]
        lf_p = _golden(log_mag, logf[jm] - step, logf[jm] + step, tol)
        out.append((10.0**lf_s, 10.0**lf_p))
    return out


# ---------------------------------------------------------------------------
# thickness trimming


def thickness_scale(model: ResonatorModel, t_ref: float, t_new: float) -> ResonatorModel:
    """Shift every branch fs for a film trimmed from ``t_ref`` to ``t_new``.

    Frequencies scale as ``t_ref / t_new``; c0, Rs, Ls, Q and k2 are untouched
    (the static capacitance of a lateral-field IDT is set by the electrodes).
    """
    if not (t_ref > 0 and t_new > 0):
        raise ModelError("thicknesses must be positive")
    if t_new == t_ref:
        return model
    ratio = t_ref / t_new
    branches = tuple(dataclasses.replace(b, fs=b.fs * ratio) for b in model.branches)
    meta = model.meta
    if meta is not None:
        meta = dataclasses.replace(meta, ln_thickness_nm=t_new)
    return dataclasses.replace(model, branches=branches, meta=meta)
