"""Touchstone 1.x (.s1p / .s2p) reading and writing.

Only version 1 files are handled.  Two-port rows use the version 1 column
order ``f s11 s21 s12 s22``.  Y and Z data are stored as written, i.e.
normalised to the reference resistance.  Two-port noise blocks are not
supported: a frequency that fails to increase is a parse error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..errors import ParseError
from ..network import SParameters

FREQ_UNITS = {"HZ": ("Hz", 1.0), "KHZ": ("kHz", 1e3), "MHZ": ("MHz", 1e6), "GHZ": ("GHz", 1e9)}
PARAMETERS = ("S", "Y", "Z")
FORMATS = ("RI", "MA", "DB")

_UNIT_SCALE = {name: scale for name, scale in FREQ_UNITS.values()}


@dataclass
class TouchstoneDocument:
    frequencies: np.ndarray  # Hz
    data: np.ndarray  # (n, nports, nports), complex, as stored in the file
    parameter: str = "S"
    fmt: str = "RI"
    freq_unit: str = "GHz"
    r_ref: float = 50.0
    comments: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 3 or self.data.shape[1] != self.data.shape[2]:
            raise ValueError("data must have shape (n, nports, nports)")
        if self.data.shape[0] != len(self.frequencies):
            raise ValueError("data and frequencies differ in length")
        if self.nports not in (1, 2):
            raise ValueError("only 1- and 2-port documents are supported")
        if self.parameter not in PARAMETERS:
            raise ValueError(f"parameter must be one of {PARAMETERS}")
        if self.fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if self.freq_unit not in _UNIT_SCALE:
            raise ValueError(f"frequency unit must be one of {tuple(_UNIT_SCALE)}")

    @property
    def nports(self) -> int:
        return self.data.shape[1]

    @classmethod
    def from_sparameters(cls, s: SParameters, fmt="RI", freq_unit="GHz", comments=()) -> "TouchstoneDocument":
        return cls(s.f.copy(), s.matrices(), "S", fmt, freq_unit, s.z0, list(comments))

    def to_sparameters(self) -> SParameters:
        if self.nports != 2 or self.parameter != "S":
            raise ValueError("only two-port S-parameter documents convert to SParameters")
        return SParameters.from_matrices(self.frequencies, self.data, self.r_ref)

    def one_port_admittance(self) -> np.ndarray:
        """Admittance in siemens of a one-port document, whatever its parameter type."""
        if self.nports != 1:
            raise ValueError("admittance conversion needs a one-port document")
        v = self.data[:, 0, 0]
        r = self.r_ref
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.parameter == "S":
                return (1.0 - v) / (1.0 + v) / r
            if self.parameter == "Y":
                return v / r
            return 1.0 / (v * r)


def _to_text(data: Union[bytes, str]) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"file is not valid UTF-8 text: {exc}") from None
    return data


def _parse_option_line(body: str, lineno: int, col0: int):
    unit, param, fmt, r = "GHz", "S", "MA", 50.0
    tokens = []
    pos = 0
    for tok in body.split():
        pos = body.index(tok, pos)
        tokens.append((tok, col0 + pos))
        pos += len(tok)
    i = 0
    while i < len(tokens):
        tok, col = tokens[i]
        up = tok.upper()
        if up in FREQ_UNITS:
            unit = FREQ_UNITS[up][0]
        elif up in PARAMETERS:
            param = up
        elif up in ("G", "H"):
            raise ParseError(f"unsupported parameter type {tok!r}", lineno, col)
        elif up in FORMATS:
            fmt = up
        elif up == "R":
            if i + 1 >= len(tokens):
                raise ParseError("reference resistance missing after 'R'", lineno, col)
            value, vcol = tokens[i + 1]
            try:
                r = float(value)
            except ValueError:
                raise ParseError(f"bad reference resistance {value!r}", lineno, vcol) from None
            if not (math.isfinite(r) and r > 0):
                raise ParseError(f"reference resistance must be positive, got {value!r}", lineno, vcol)
            i += 1
        else:
            raise ParseError(f"unknown option {tok!r}", lineno, col)
        i += 1
    return unit, param, fmt, r


def _pair(a: float, b: float, fmt: str) -> complex:
    if fmt == "RI":
        return complex(a, b)
    mag = a if fmt == "MA" else 10.0 ** (a / 20.0)
    ang = math.radians(b)
    return complex(mag * math.cos(ang), mag * math.sin(ang))


def read_touchstone(data: Union[bytes, str], nports: Optional[int] = None) -> TouchstoneDocument:
    """Parse a Touchstone 1.x document.

    ``nports`` may be given (e.g. from the file extension); otherwise it is
    inferred from the column count of the first data row.
    """
    text = _to_text(data)
    option = None
    comments: list[str] = []
    freqs: list[float] = []
    rows: list[list[complex]] = []
    expected = None if nports is None else 1 + 2 * nports * nports
    if nports is not None and nports not in (1, 2):
        raise ValueError("only 1- and 2-port files are supported")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw
        bang = line.find("!")
        if bang >= 0:
            comments.append(line[bang + 1:].rstrip())
            line = line[:bang]
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if option is None:
                col0 = line.index("#") + 2
                option = _parse_option_line(line[line.index("#") + 1:], lineno, col0)
            continue
        if stripped.startswith("["):
            raise ParseError("Touchstone 2.0 keywords are not supported", lineno, line.index("[") + 1)
        if option is None:
            option = ("GHz", "S", "MA", 50.0)
        tokens = []
        pos = 0
        for tok in line.split():
            pos = line.index(tok, pos)
            tokens.append((tok, pos + 1))
            pos += len(tok)
        if expected is None:
            if len(tokens) == 3:
                expected = 3
            elif len(tokens) == 9:
                expected = 9
            else:
                raise ParseError(
                    f"cannot infer port count from {len(tokens)} columns (expected 3 or 9)", lineno, 1
                )
        if len(tokens) != expected:
            col = tokens[expected][1] if len(tokens) > expected else len(line.rstrip()) + 1
            raise ParseError(f"expected {expected} columns, found {len(tokens)}", lineno, col)
        values = []
        for tok, col in tokens:
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(f"not a number: {tok!r}", lineno, col) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {tok!r}", lineno, col)
            values.append(v)
        f = values[0] * _UNIT_SCALE[option[0]]
        if freqs and not f > freqs[-1]:
            raise ParseError("frequencies must be strictly increasing", lineno, tokens[0][1])
        if f < 0:
            raise ParseError("negative frequency", lineno, tokens[0][1])
        freqs.append(f)
        fmt = option[2]
        rows.append([_pair(values[k], values[k + 1], fmt) for k in range(1, expected, 2)])
    if option is None or not rows:
        raise ParseError("no data rows found")
    unit, param, fmt, r = option
    n = 1 if expected == 3 else 2
    arr = np.array(rows, dtype=complex)
    if n == 1:
        mats = arr.reshape(-1, 1, 1)
    else:
        # file order s11 s21 s12 s22 -> [[s11, s12], [s21, s22]]
        mats = np.empty((len(rows), 2, 2), dtype=complex)
        mats[:, 0, 0] = arr[:, 0]
        mats[:, 1, 0] = arr[:, 1]
        mats[:, 0, 1] = arr[:, 2]
        mats[:, 1, 1] = arr[:, 3]
    return TouchstoneDocument(np.array(freqs), mats, param, fmt, unit, r, comments)


def _fmt_freq(x: float) -> str:
    return f"{x:.8e}"


def _fmt_value(x: float) -> str:
    return f"{x: .11e}"


def _encode(v: complex, fmt: str) -> tuple[float, float]:
    if fmt == "RI":
        return v.real, v.imag
    mag = abs(v)
    ang = math.degrees(math.atan2(v.imag, v.real))
    if fmt == "MA":
        return mag, ang
    return (20.0 * math.log10(mag) if mag > 0 else -400.0), ang


def write_touchstone(doc: TouchstoneDocument) -> bytes:
    """Serialise ``doc``.  Output is deterministic for identical input."""
    lines = [f"!{c}" for c in doc.comments]
    lines.append(f"# {doc.freq_unit} {doc.parameter} {doc.fmt} R {doc.r_ref:g}")
    scale = _UNIT_SCALE[doc.freq_unit]
    for f, m in zip(doc.frequencies, doc.data):
        if doc.nports == 1:
            cells = [m[0, 0]]
        else:
            cells = [m[0, 0], m[1, 0], m[0, 1], m[1, 1]]
        parts = [_fmt_freq(f / scale)]
        for c in cells:
            a, b = _encode(complex(c), doc.fmt)
            parts.append(_fmt_value(a))
            parts.append(_fmt_value(b))
        lines.append(" ".join(parts))
    return ("\n".join(lines) + "\n").encode("ascii")
