"""CSV traces: admittance data for fitting and plot-ready S-parameter tables."""

from __future__ import annotations

import csv
import io
from typing import Union

import numpy as np

from ..errors import ParseError
from ..fitting import AdmittanceTrace
from ..network import SParameters
from .touchstone import read_touchstone

_RE_NAMES = ("re", "re_y")
_IM_NAMES = ("im", "im_y")


def _text(data: Union[bytes, str]) -> str:
    return data.decode("utf-8") if isinstance(data, bytes) else data


def read_trace_csv(data: Union[bytes, str], label: str = "") -> AdmittanceTrace:
    """Read a ``freq_hz,re,im`` admittance table (``re_y``/``im_y`` also accepted)."""
    rows = list(csv.reader(io.StringIO(_text(data))))
    rows = [(i + 1, r) for i, r in enumerate(rows) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty trace file")
    lineno, header = rows[0]
    names = [h.strip().lower() for h in header]
    try:
        i_f = names.index("freq_hz")
        i_re = next(names.index(n) for n in _RE_NAMES if n in names)
        i_im = next(names.index(n) for n in _IM_NAMES if n in names)
    except (ValueError, StopIteration):
        raise ParseError("header must contain freq_hz, re and im columns", lineno, 1) from None
    f, y = [], []
    for lineno, row in rows[1:]:
        if len(row) != len(names):
            raise ParseError(f"expected {len(names)} columns, found {len(row)}", lineno, 1)
        vals = []
        for k in (i_f, i_re, i_im):
            try:
                vals.append(float(row[k]))
            except ValueError:
                col = sum(len(c) + 1 for c in row[:k]) + 1
                raise ParseError(f"not a number: {row[k]!r}", lineno, col) from None
        if f and not vals[0] > f[-1]:
            raise ParseError("frequencies must be strictly increasing", lineno, 1)
        f.append(vals[0])
        y.append(complex(vals[1], vals[2]))
    try:
        return AdmittanceTrace(np.array(f), np.array(y), label)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def write_trace_csv(trace: AdmittanceTrace) -> bytes:
    # shortest round-trip repr, so write -> read is lossless
    lines = ["freq_hz,re,im"]
    for f, y in zip(trace.frequencies, trace.values):
        lines.append(f"{float(f)!r},{float(y.real)!r},{float(y.imag)!r}")
    return ("\n".join(lines) + "\n").encode("ascii")


def read_trace_touchstone(data: Union[bytes, str], label: str = "") -> AdmittanceTrace:
    doc = read_touchstone(data, nports=1)
    try:
        return AdmittanceTrace(doc.frequencies, doc.one_port_admittance(), label)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def write_sparameter_csv(s: SParameters) -> bytes:
    """Plot-ready ``freq_hz,s21_db,s11_db`` table."""
    s21 = s.s21_db()
    s11 = s.s11_db()
    lines = ["freq_hz,s21_db,s11_db"]
    for f, a, b in zip(s.f, s21, s11):
        lines.append(f"{f:.12g},{a:.9g},{b:.9g}")
    return ("\n".join(lines) + "\n").encode("ascii")
