"""Penalty-based design optimisation over resonator multipliers and stage order.

The continuous variables are per-resonator multipliers on every branch fs
(a stand-in for film trimming) and on c0 (a stand-in for aperture or
electrode pair count).  Coupling and Q stay fixed.  Stage order is a
discrete variable: every distinct permutation of the declared stages is
tried when there are at most :data:`EXHAUSTIVE_LIMIT` of them, otherwise a
greedy pairwise-swap search is used.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import LadderError
from .mbvd import ResonatorModel
from .metrics import FilterMetrics, extract_metrics, rejection_at
from .network import FrequencyGrid, LadderDesign, SParameters, Stage, simulate

EXHAUSTIVE_LIMIT = 12
FAILURE_PENALTY = 1e6

DEFAULT_FS_BOUNDS = (0.95, 1.05)
DEFAULT_C0_BOUNDS = (0.5, 2.0)


@dataclass(frozen=True)
class RejectionRequirement:
    """Minimum rejection either at ``f_center + offset_bw * BW`` or over an absolute band."""

    min_db: float
    offset_bw: Optional[float] = None
    band: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if (self.offset_bw is None) == (self.band is None):
            raise ValueError("a rejection requirement needs exactly one of offset_bw or band")
        if not (math.isfinite(self.min_db) and self.min_db > 0):
            raise ValueError(f"min_db must be positive and finite, got {self.min_db!r}")
        if self.band is not None:
            lo, hi = self.band
            if not 0 < lo < hi:
                raise ValueError(f"rejection band needs 0 < start < stop, got {self.band!r}")
            object.__setattr__(self, "band", (float(lo), float(hi)))

    def achieved(self, s: SParameters, m: FilterMetrics) -> float:
        if self.offset_bw is not None:
            return rejection_at(s, m.f_center + self.offset_bw * m.bandwidth_3db)
        lo, hi = self.band
        inside = (s.f > lo) & (s.f < hi)
        rej = rejection_at(s, [lo, hi])
        return float(min(np.min(rej), np.min(rejection_at(s, s.f[inside])) if inside.any() else np.inf))


@dataclass(frozen=True)
class CostWeights:
    """Per-term weights: IL per dB, FBW per unit fraction, rejection per dB, fc per unit relative error."""

    il: float = 1.0
    bw: float = 10.0
    rej: float = 0.5
    fc: float = 20.0


@dataclass(frozen=True)
class DesignSpec:
    target_fc: float
    min_fbw: float
    max_il: float
    rejection: tuple[RejectionRequirement, ...] = ()
    z0: float = 50.0
    weights: CostWeights = field(default_factory=CostWeights)

    def __post_init__(self):
        object.__setattr__(self, "rejection", tuple(self.rejection))
        for name in ("target_fc", "min_fbw", "max_il", "z0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class DesignVariables:
    """Stage ordering plus fs / c0 multipliers keyed by resonator name.

    ``bounds`` is keyed ``"<resonator>.fs"`` / ``"<resonator>.c0"``; a key
    whose lower and upper bound coincide is held fixed.
    """

    stages: tuple[Stage, ...]
    fs_scale: Mapping[str, float] = field(default_factory=dict)
    c0_scale: Mapping[str, float] = field(default_factory=dict)
    bounds: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        names = self.resonator_names()
        fs = {n: float(self.fs_scale.get(n, 1.0)) for n in names}
        c0 = {n: float(self.c0_scale.get(n, 1.0)) for n in names}
        bounds = {}
        for n in names:
            bounds[f"{n}.fs"] = tuple(map(float, self.bounds.get(f"{n}.fs", DEFAULT_FS_BOUNDS)))
            bounds[f"{n}.c0"] = tuple(map(float, self.bounds.get(f"{n}.c0", DEFAULT_C0_BOUNDS)))
        extra = set(self.bounds) - set(bounds)
        if extra:
            raise ValueError(f"bounds given for unknown variables: {sorted(extra)}")
        object.__setattr__(self, "fs_scale", fs)
        object.__setattr__(self, "c0_scale", c0)
        object.__setattr__(self, "bounds", bounds)
        for key, value in self.values().items():
            lo, hi = bounds[key]
            if not (0 < lo <= hi):
                raise ValueError(f"bounds for {key} must satisfy 0 < lo <= hi, got {(lo, hi)}")
            if not lo <= value <= hi:
                raise ValueError(f"{key} = {value!r} lies outside its bounds {(lo, hi)}")

    def resonator_names(self) -> list[str]:
        seen = []
        for st in self.stages:
            if st.resonator not in seen:
                seen.append(st.resonator)
        return seen

    def values(self) -> dict[str, float]:
        out = {}
        for n in self.resonator_names():
            out[f"{n}.fs"] = self.fs_scale[n]
            out[f"{n}.c0"] = self.c0_scale[n]
        return out

    def free_keys(self) -> list[str]:
        return [k for k, (lo, hi) in self.bounds.items() if hi > lo]

    def with_values(self, values: Mapping[str, float]) -> "DesignVariables":
        fs = dict(self.fs_scale)
        c0 = dict(self.c0_scale)
        for key, v in values.items():
            name, kind = key.rsplit(".", 1)
            (fs if kind == "fs" else c0)[name] = float(v)
        return dataclasses.replace(self, fs_scale=fs, c0_scale=c0)

    def with_stages(self, stages: Sequence[Stage]) -> "DesignVariables":
        return dataclasses.replace(self, stages=tuple(stages))

    def apply(self, resonators: Mapping[str, ResonatorModel], z0: float) -> LadderDesign:
        scaled = {
            n: resonators[n].scaled(self.fs_scale[n], self.c0_scale[n]) for n in self.resonator_names()
        }
        return LadderDesign(self.stages, scaled, z0)


def cost_terms(design: LadderDesign, spec: DesignSpec, grid) -> dict[str, float]:
    """Individual weighted penalty terms; ``{"failure": 1e6}`` if metrics cannot be extracted."""
    if design.z0 != spec.z0:
        design = LadderDesign(design.stages, design.resonators, spec.z0)
    w = spec.weights
    try:
        s = simulate(design, grid)
        m = extract_metrics(s, thresholds=())
        rej = sum(max(0.0, r.min_db - r.achieved(s, m)) for r in spec.rejection)
    except LadderError:
        return {"failure": FAILURE_PENALTY}
    terms = {
        "il": w.il * max(0.0, m.il_db - spec.max_il),
        "bw": w.bw * max(0.0, spec.min_fbw - m.fbw_3db),
        "rej": w.rej * rej,
        "fc": w.fc * abs(m.f_center - spec.target_fc) / spec.target_fc,
    }
    if not all(math.isfinite(v) for v in terms.values()):
        return {"failure": FAILURE_PENALTY}
    return terms


def evaluate(design: LadderDesign, spec: DesignSpec, grid) -> float:
    terms = cost_terms(design, spec, grid)
    return float(terms["il"] + terms["bw"] + terms["rej"] + terms["fc"]) if "failure" not in terms \
        else FAILURE_PENALTY


@dataclass
class OptimizeResult:
    variables: DesignVariables
    cost: float
    trace: list[float]
    evaluations: int
    budget_exhausted: bool
    feasible: bool = False
    history: list[tuple[tuple[Stage, ...], tuple[float, ...]]] = field(repr=False, default_factory=list)

    @property
    def status(self) -> str:
        return "budget-exhausted" if self.budget_exhausted else "converged"


class _BudgetExhausted(Exception):
    pass


class _Counter:
    """Counts evaluations against the budget and tracks the best point seen."""

    def __init__(self, resonators, spec, grid, budget, keys):
        self.resonators = resonators
        self.spec = spec
        self.grid = grid
        self.budget = budget
        self.keys = keys
        self.trace: list[float] = []
        self.history: list = []
        self.best: Optional[tuple[float, DesignVariables]] = None

    def __call__(self, variables: DesignVariables) -> float:
        if len(self.trace) >= self.budget:
            raise _BudgetExhausted
        cost = evaluate(variables.apply(self.resonators, self.spec.z0), self.spec, self.grid)
        self.history.append((variables.stages, tuple(variables.values()[k] for k in self.keys)))
        if self.best is None or cost < self.best[0]:
            self.best = (cost, variables)
        self.trace.append(self.best[0])
        return cost


def _distinct_orderings(stages: Sequence[Stage]) -> list[tuple[Stage, ...]]:
    out = []
    seen = set()
    for perm in itertools.permutations(stages):
        if perm not in seen:
            seen.add(perm)
            out.append(perm)
    return out


def _count_distinct(stages: Sequence[Stage]) -> int:
    counts = {}
    for st in stages:
        counts[st] = counts.get(st, 0) + 1
    n = math.factorial(len(stages))
    for c in counts.values():
        n //= math.factorial(c)
    return n


def _simplex_search(counter: _Counter, start: DesignVariables, rng, xatol, fatol, restarts=3):
    keys = start.free_keys()
    if not keys:
        return False
    lo = np.array([start.bounds[k][0] for k in keys])
    hi = np.array([start.bounds[k][1] for k in keys])
    span = hi - lo

    def fun(u):
        return counter(start.with_values(dict(zip(keys, lo + u * span))))

    best_var = start
    u0 = (np.array([start.values()[k] for k in keys]) - lo) / span
    for _ in range(restarts):
        signs = rng.choice([-1.0, 1.0], size=len(keys))
        simplex = [u0]
        for i in range(len(keys)):
            step = 0.1 * signs[i]
            if not 0.0 <= u0[i] + step <= 1.0:
                step = -step
            v = u0.copy()
            v[i] += step
            simplex.append(v)
        before = counter.best[0]
        minimize(
            fun,
            u0,
            method="Nelder-Mead",
            bounds=[(0.0, 1.0)] * len(keys),
            options={"initial_simplex": np.array(simplex), "xatol": xatol, "fatol": fatol,
                     "maxiter": 10**6, "maxfev": 10**6},
        )
        best_var = counter.best[1]
        u0 = (np.array([best_var.values()[k] for k in keys]) - lo) / span
        if before - counter.best[0] <= fatol:
            break
    return True


def optimize(
    initial: DesignVariables,
    resonators: Mapping[str, ResonatorModel],
    spec: DesignSpec,
    grid,
    budget: int = 2000,
    seed: int = 0,
    xatol: float = 1e-6,
    fatol: float = 1e-12,
) -> OptimizeResult:
    """Minimise :func:`evaluate` over ``initial``'s free variables and stage order.

    Every evaluation counts against ``budget``.  The returned ``trace`` holds
    the best cost seen after each evaluation, so it never increases.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1 evaluation")
    rng = np.random.default_rng(seed)
    keys = list(initial.values())
    counter = _Counter(resonators, spec, grid, budget, keys)
    exhausted = False
    try:
        initial_cost = counter(initial)
        if _count_distinct(initial.stages) <= EXHAUSTIVE_LIMIT:
            ranked = []
            for k, order in enumerate(_distinct_orderings(initial.stages)):
                v = initial.with_stages(order)
                cost = initial_cost if order == initial.stages else counter(v)
                ranked.append((cost, k, v))
            ranked.sort(key=lambda t: (t[0], t[1]))
            for _, _, v in ranked:
                _simplex_search(counter, v, rng, xatol, fatol)
        else:
            current = initial
            current_cost = counter.best[0]
            improved = True
            while improved:
                improved = False
                pairs = list(itertools.combinations(range(len(current.stages)), 2))
                for idx in rng.permutation(len(pairs)):
                    i, j = pairs[idx]
                    if current.stages[i] == current.stages[j]:
                        continue
                    st = list(current.stages)
                    st[i], st[j] = st[j], st[i]
                    cand = current.with_stages(st)
                    cost = counter(cand)
                    if cost < current_cost:
                        current, current_cost, improved = cand, cost, True
            _simplex_search(counter, current, rng, xatol, fatol)
    except _BudgetExhausted:
        exhausted = True
    best_cost, best_var = counter.best
    terms = cost_terms(best_var.apply(resonators, spec.z0), spec, grid)
    feasible = "failure" not in terms and terms["il"] == terms["bw"] == terms["rej"] == 0.0
    return OptimizeResult(
        variables=best_var,
        cost=best_cost,
        trace=counter.trace,
        evaluations=len(counter.trace),
        budget_exhausted=exhausted,
        feasible=feasible,
        history=counter.history,
    )


@dataclass(frozen=True)
class RankedOrdering:
    cost: float
    design: LadderDesign
    metrics: Optional[FilterMetrics]


def rank_orderings(
    orderings: Sequence[Sequence[Stage]],
    resonators: Mapping[str, ResonatorModel],
    spec: DesignSpec,
    grid,
) -> list[RankedOrdering]:
    """Score fixed-multiplier designs for each candidate stage order, best first.

    The score is :func:`evaluate` against ``spec``; ties keep the input order.
    Orderings whose response cannot be measured are ranked last with
    ``metrics=None``.
    """
    ranked = []
    for k, stages in enumerate(orderings):
        design = LadderDesign(tuple(stages), resonators, spec.z0)
        try:
            m = extract_metrics(simulate(design, grid), thresholds=())
        except LadderError:
            m = None
        cost = evaluate(design, spec, grid)
        ranked.append((cost, k, RankedOrdering(cost, design, m)))
    ranked.sort(key=lambda t: (t[0], t[1]))
    return [r for _, _, r in ranked]
