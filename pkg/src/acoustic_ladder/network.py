"""Two-port ABCD algebra and ladder filter simulation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterator, Literal, Mapping, Optional, Sequence

import numpy as np

from .errors import LadderError, SingularNetworkError
from .mbvd import ResonatorModel, admittance

Placement = Literal["series", "shunt"]


@dataclass(frozen=True)
class FrequencyGrid:
    start: float
    stop: float
    points: int
    spacing: Literal["linear", "logarithmic"] = "linear"

    def __post_init__(self):
        if not 0 < self.start < self.stop:
            raise ValueError(f"frequency grid needs 0 < start < stop, got {self.start!r}..{self.stop!r}")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError(f"frequency grid needs at least 2 points, got {self.points!r}")
        if self.spacing not in ("linear", "logarithmic"):
            raise ValueError(f"unknown spacing {self.spacing!r}")

    def frequencies(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.start, self.stop, self.points)
        return np.geomspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class AbcdMatrix:
    """Transmission matrix; entries may be scalars or equal-length arrays."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> "AbcdMatrix":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    def __matmul__(self, other: "AbcdMatrix") -> "AbcdMatrix":
        return AbcdMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def det(self):
        return self.a * self.d - self.b * self.c

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)


def series_element(z) -> AbcdMatrix:
    z = np.asarray(z, dtype=complex)
    one = np.ones_like(z)
    return AbcdMatrix(one, z, np.zeros_like(z), one)


def shunt_element(y) -> AbcdMatrix:
    y = np.asarray(y, dtype=complex)
    one = np.ones_like(y)
    return AbcdMatrix(one, np.zeros_like(y), y, one)


def cascade(ms: Sequence[AbcdMatrix]) -> AbcdMatrix:
    """Left-to-right product; port 1 is the input of ``ms[0]``."""
    ms = list(ms)
    if not ms:
        raise ValueError("cascade needs at least one matrix")
    return reduce(lambda x, y: x @ y, ms)


def abcd_to_s(m: AbcdMatrix, z0: float, frequencies=None):
    """Convert to (s11, s12, s21, s22) referenced to a real ``z0`` at both ports."""
    if not z0 > 0:
        raise ValueError(f"z0 must be positive, got {z0!r}")
    a, b, c, d = (np.asarray(x, dtype=complex) for x in (m.a, m.b, m.c, m.d))
    with np.errstate(all="ignore"):
        delta = a + b / z0 + c * z0 + d
        s11 = (a + b / z0 - c * z0 - d) / delta
        s21 = 2.0 / delta
        s12 = 2.0 * (a * d - b * c) / delta
        s22 = (-a + b / z0 - c * z0 + d) / delta
    bad = (delta == 0) | ~np.isfinite(delta)
    for s in (s11, s12, s21, s22):
        bad |= ~np.isfinite(s)
    if np.any(bad):
        idx = int(np.flatnonzero(np.atleast_1d(bad))[0])
        freq = None
        if frequencies is not None:
            freq = float(np.atleast_1d(frequencies)[idx])
        raise SingularNetworkError(idx, freq)
    if delta.ndim == 0:
        return complex(s11), complex(s12), complex(s21), complex(s22)
    return s11, s12, s21, s22


@dataclass(frozen=True)
class SParameters:
    f: np.ndarray
    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray
    z0: float = 50.0
    grid: Optional[FrequencyGrid] = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.f)
        for name in ("s11", "s12", "s21", "s22"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} points, expected {n}")
        if not self.z0 > 0:
            raise ValueError("z0 must be positive")

    def __len__(self):
        return len(self.f)

    def matrices(self) -> np.ndarray:
        """Array of shape (n, 2, 2) in [[s11, s12], [s21, s22]] layout."""
        return np.stack(
            [np.stack([self.s11, self.s12], axis=-1), np.stack([self.s21, self.s22], axis=-1)],
            axis=-2,
        )

    @classmethod
    def from_matrices(cls, f, s, z0=50.0) -> "SParameters":
        s = np.asarray(s, dtype=complex)
        return cls(np.asarray(f, dtype=float), s[:, 0, 0], s[:, 0, 1], s[:, 1, 0], s[:, 1, 1], z0)

    def s21_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.s21))

    def s11_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.s11))


@dataclass(frozen=True)
class Stage:
    placement: Placement
    resonator: str

    def __post_init__(self):
        if self.placement not in ("series", "shunt"):
            raise ValueError(f"placement must be 'series' or 'shunt', got {self.placement!r}")


@dataclass(frozen=True)
class LadderDesign:
    stages: tuple[Stage, ...]
    resonators: Mapping[str, ResonatorModel]
    z0: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValueError("a ladder needs at least one stage")
        if not self.z0 > 0:
            raise ValueError("z0 must be positive")
        for st in self.stages:
            if st.resonator not in self.resonators:
                raise LadderError(f"stage references unknown resonator {st.resonator!r}")

    def with_stages(self, stages: Sequence[Stage]) -> "LadderDesign":
        return LadderDesign(tuple(stages), self.resonators, self.z0)

    def code(self) -> str:
        """Compact ordering label such as ``ser-sha-ser-shb-ser``."""
        return "-".join(st.resonator for st in self.stages)


def ladder_abcd(design: LadderDesign, f) -> AbcdMatrix:
    f = np.atleast_1d(np.asarray(f, dtype=float))
    ys = {name: admittance(design.resonators[name], f) for name in {st.resonator for st in design.stages}}
    elements = []
    for st in design.stages:
        y = ys[st.resonator]
        if st.placement == "series":
            with np.errstate(divide="ignore", invalid="ignore"):
                elements.append(series_element(1.0 / y))
        else:
            elements.append(shunt_element(y))
    return cascade(elements)


def simulate(design: LadderDesign, grid) -> SParameters:
    """S-parameters of ``design`` over ``grid`` (a FrequencyGrid or frequency array).

    Every frequency point is evaluated independently.
    """
    fgrid = grid if isinstance(grid, FrequencyGrid) else None
    f = grid.frequencies() if fgrid is not None else np.atleast_1d(np.asarray(grid, dtype=float))
    m = ladder_abcd(design, f)
    s11, s12, s21, s22 = abcd_to_s(m, design.z0, frequencies=f)
    return SParameters(f, s11, s12, s21, s22, design.z0, grid=fgrid)


def ladder_orderings(
    series: str, shunts: Sequence[str], order: int = 5
) -> Iterator[tuple[Stage, ...]]:
    """Alternating ladder orderings of ``order`` stages.

    Both alternations are produced (series first and shunt first); series
    slots always hold ``series`` and each shunt slot takes any of ``shunts``.
    For five stages and two shunt variants this yields 4 + 8 = 12 orderings.
    """
    for first in ("series", "shunt"):
        pattern = [
            ("series" if (i % 2 == 0) == (first == "series") else "shunt") for i in range(order)
        ]
        n_shunt = pattern.count("shunt")
        for assign in itertools.product(shunts, repeat=n_shunt):
            it = iter(assign)
            yield tuple(
                Stage("series", series) if p == "series" else Stage("shunt", next(it)) for p in pattern
            )
