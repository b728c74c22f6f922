"""Command-line front end: ``acoustic-ladder {simulate,metrics,fit,optimize,sweep}``.

Exit codes are part of the interface: 0 success, 2 invalid input (schema,
parse or key-path errors), 3 numerical failure (singular network, no
passband, failed fit), 4 I/O error.  Relative output paths are resolved
against ``$ACOUSTIC_LADDER_OUTDIR`` when it is set.
"""

from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import BandEdgeError, FitError, LadderError, MetricsError, ModelError, ParseError, SingularNetworkError
from .fitting import fit_mbvd
from .formats.designfile import (
    FIXTURES,
    DesignDocument,
    fixture_path,
    fragment_to_bytes,
    read_design,
    read_spec,
    spec_to_dict,
    write_design,
)
from .formats.touchstone import TouchstoneDocument, read_touchstone, write_touchstone
from .formats.traces import read_trace_csv, read_trace_touchstone, write_sparameter_csv
from .metrics import FilterMetrics, extract_metrics, insertion_loss
from .network import FrequencyGrid, simulate
from .optimizer import cost_terms, optimize

OUTDIR_ENV = "ACOUSTIC_LADDER_OUTDIR"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class UsageError(Exception):
    """Bad user input that is not a file-format error (exit 2)."""


def fmt(x) -> str:
    """Six significant digits, the fixed precision of all numeric stdout."""
    return f"{float(x) + 0.0:.6g}"  # never print "-0"


# ---------------------------------------------------------------------------
# file helpers


class _Run:
    """Collects inputs and outputs of one command for the run report."""

    def __init__(self, command: str, argv: Sequence[str]):
        self.command = command
        self.argv = list(argv)
        self.inputs: list[dict] = []
        self.outputs: list[dict] = []
        self.metrics: Optional[dict] = None

    def read(self, path: str) -> bytes:
        p = Path(path)
        if not p.exists() and p.suffix in ("", ".design") and p.stem in FIXTURES and len(p.parts) == 1:
            p = fixture_path(p.stem)
        try:
            data = p.read_bytes()
        except OSError as exc:
            raise OSError(f"cannot read {path}: {exc.strerror or exc}") from None
        self.inputs.append({"path": str(path), "sha256": hashlib.sha256(data).hexdigest()})
        return data

    def write(self, path: str, data: bytes) -> Path:
        p = output_path(path)
        try:
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_bytes(data)
        except OSError as exc:
            raise OSError(f"cannot write {p}: {exc.strerror or exc}") from None
        self.outputs.append({"path": str(p), "sha256": hashlib.sha256(data).hexdigest()})
        return p

    def report(self) -> dict:
        digest = hashlib.sha256()
        for item in self.inputs:
            digest.update(item["sha256"].encode())
        return {
            "tool": "acoustic-ladder",
            "version": __version__,
            "command": self.command,
            "argv": self.argv,
            "inputs": self.inputs,
            "inputs_digest": digest.hexdigest(),
            "metrics": self.metrics,
            "outputs": self.outputs,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }


def output_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _print_metrics(m: FilterMetrics, out) -> None:
    print(f"f_center_ghz: {fmt(m.f_center / 1e9)}", file=out)
    print(f"il_db: {fmt(m.il_db)}", file=out)
    print(f"f_min_loss_ghz: {fmt(m.f_min_loss / 1e9)}", file=out)
    print(f"f_3db_ghz: {fmt(m.f_lo_3db / 1e9)} {fmt(m.f_hi_3db / 1e9)}", file=out)
    print(f"fbw_pct: {fmt(100 * m.fbw_3db)}", file=out)
    print(f"rejection_db: {fmt(m.rej_low_db)} {fmt(m.rej_high_db)}", file=out)
    for b in m.rejection_bands:
        print(
            f"rejection_band: {fmt(b.threshold_db)} dB {b.side} "
            f"{fmt(b.f_start / 1e9)}-{fmt(b.f_stop / 1e9)} GHz width {fmt(b.width / 1e9)} GHz",
            file=out,
        )


def _grid_override(doc: DesignDocument, args) -> FrequencyGrid:
    g = doc.grid
    try:
        return FrequencyGrid(
            args.start_ghz * 1e9 if args.start_ghz is not None else g.start,
            args.stop_ghz * 1e9 if args.stop_ghz is not None else g.stop,
            args.points if args.points is not None else g.points,
            args.spacing or g.spacing,
        )
    except ValueError as exc:
        raise UsageError(f"invalid grid: {exc}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args, run: _Run, out) -> int:
    doc = read_design(run.read(args.design))
    grid = _grid_override(doc, args)
    s = simulate(doc.design(), grid)
    if args.out:
        ts = TouchstoneDocument.from_sparameters(s, comments=[f" acoustic-ladder {__version__} simulate"])
        run.write(args.out, write_touchstone(ts))
    if args.csv:
        run.write(args.csv, write_sparameter_csv(s))
    m = extract_metrics(s, thresholds=args.threshold)
    run.metrics = m.as_record()
    print(f"design: {doc.name or args.design}", file=out)
    print(f"ordering: {doc.design().code()}", file=out)
    _print_metrics(m, out)
    return EXIT_OK


def cmd_metrics(args, run: _Run, out) -> int:
    ts = read_touchstone(run.read(args.s2p), nports=2 if args.s2p.lower().endswith(".s2p") else None)
    if ts.nports != 2 or ts.parameter != "S":
        raise UsageError("metrics needs a two-port S-parameter file")
    s = ts.to_sparameters()
    try:
        m = extract_metrics(s, thresholds=args.threshold, relative=args.relative)
    except BandEdgeError:
        # the loss figure is still meaningful without a band
        il, f_il = insertion_loss(s)
        print(f"il_db: {fmt(il)}", file=out)
        print(f"f_min_loss_ghz: {fmt(f_il / 1e9)}", file=out)
        raise
    run.metrics = m.as_record()
    if args.json:
        print(json.dumps(m.as_record(), indent=2, sort_keys=True), file=out)
    else:
        _print_metrics(m, out)
    return EXIT_OK


def cmd_fit(args, run: _Run, out) -> int:
    data = run.read(args.trace)
    name = args.name or Path(args.trace).stem
    if args.trace.lower().endswith((".s1p", ".y1p", ".z1p")):
        trace = read_trace_touchstone(data, label=name)
    else:
        trace = read_trace_csv(data, label=name)
    result = fit_mbvd(trace, args.branches, max_iterations=args.max_iterations, objective=args.objective)
    model = result.model
    if args.out:
        run.write(args.out, fragment_to_bytes({name: model}))
    run.metrics = {
        "residual": result.residual,
        "initial_residual": result.initial_residual,
        "branch_residuals": list(result.branch_residuals),
        "status": result.status,
        "iterations": result.iterations,
    }
    print(f"resonator: {name}", file=out)
    print(f"status: {result.status}", file=out)
    print(f"residual: {fmt(result.residual)}", file=out)
    print(f"initial_residual: {fmt(result.initial_residual)}", file=out)
    print(f"c0_ff: {fmt(model.c0 / 1e-15)}", file=out)
    print(f"rs_ohm: {fmt(model.rs)}", file=out)
    print(f"ls_nh: {fmt(model.ls / 1e-9)}", file=out)
    for b, r in zip(model.branches, result.branch_residuals):
        print(
            f"branch {b.label}: fs_ghz {fmt(b.fs / 1e9)} q {fmt(b.q)} k2_pct {fmt(100 * b.k2)} residual {fmt(r)}",
            file=out,
        )
    return EXIT_OK


def _load_spec(run: _Run, path: Optional[str], doc: DesignDocument):
    if path is None:
        if doc.spec is None:
            raise UsageError("no spec: pass --spec or add a spec block to the design file")
        return doc.spec
    data = run.read(path)
    try:
        obj = json.loads(data)
    except json.JSONDecodeError:
        obj = None
    if isinstance(obj, dict) and "format" in obj:
        spec_doc = read_design(data)
        if spec_doc.spec is None:
            raise UsageError(f"{path} has no spec block")
        return spec_doc.spec
    return read_spec(data, doc.z0)


def cmd_optimize(args, run: _Run, out) -> int:
    doc = read_design(run.read(args.design))
    if doc.variables is None:
        raise UsageError("design file has no stages to optimize")
    spec = _load_spec(run, args.spec, doc)
    grid = _grid_override(doc, args)
    result = optimize(doc.variables, doc.resonators, spec, grid, budget=args.budget, seed=args.seed)
    best = doc.with_variables(result.variables)
    best = DesignDocument(best.resonators, best.variables, best.z0, best.grid, spec, best.name,
                          best.description, best.has_sweep)
    if args.out:
        run.write(args.out, write_design(best))
    if args.trace:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["evaluation", "best_cost"])
        for i, c in enumerate(result.trace, start=1):
            w.writerow([i, f"{c:.12g}"])
        run.write(args.trace, buf.getvalue().encode())
    terms = cost_terms(best.design(), spec, grid)
    run.metrics = {
        "cost": result.cost,
        "terms": terms,
        "evaluations": result.evaluations,
        "status": result.status,
        "feasible": result.feasible,
        "spec": spec_to_dict(spec),
    }
    print(f"status: {result.status}", file=out)
    print(f"feasible: {str(result.feasible).lower()}", file=out)
    print(f"evaluations: {result.evaluations}", file=out)
    print(f"cost: {fmt(result.cost)}", file=out)
    for k in sorted(terms):
        print(f"cost_{k}: {fmt(terms[k])}", file=out)
    print(f"ordering: {best.design().code()}", file=out)
    for key, v in result.variables.values().items():
        print(f"{key}: {fmt(v)}", file=out)
    try:
        m = extract_metrics(simulate(best.design(), grid), thresholds=())
    except MetricsError:
        return EXIT_OK
    run.metrics["filter"] = m.as_record()
    print(f"f_center_ghz: {fmt(m.f_center / 1e9)}", file=out)
    print(f"il_db: {fmt(m.il_db)}", file=out)
    print(f"fbw_pct: {fmt(100 * m.fbw_3db)}", file=out)
    print(f"rejection_db: {fmt(m.rej_low_db)} {fmt(m.rej_high_db)}", file=out)
    return EXIT_OK


def _parse_vary(text: str):
    key, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or not key or len(parts) != 3:
        raise UsageError(f"--vary expects key=lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--vary bounds must be numbers and n an integer, got {text!r}") from None
    if n < 1:
        raise UsageError("--vary needs n >= 1")
    return key, lo, hi, n


def _set_path(obj: dict, key: str, value: float) -> None:
    """Assign a numeric field addressed by a dotted path such as ``resonators.series.c0_ff``.

    ``variables.fs_scale.<name>`` and ``variables.c0_scale.<name>`` may be set
    even when absent from the file, for any resonator used in a stage.
    """
    parts = key.split(".")
    if len(parts) == 3 and parts[0] == "variables" and parts[1] in ("fs_scale", "c0_scale"):
        names = {st["resonator"] for st in obj.get("stages", [])}
        if parts[2] not in names:
            raise UsageError(f"bad key path {key!r}: no stage uses resonator {parts[2]!r}")
        obj.setdefault("variables", {}).setdefault(parts[1], {})[parts[2]] = value
        return
    node = obj
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        if isinstance(node, list):
            try:
                idx = int(part)
                node[idx]
            except (ValueError, IndexError):
                raise UsageError(f"bad key path {key!r}: {part!r} is not a valid index") from None
            part = idx
        elif not (isinstance(node, dict) and part in node):
            raise UsageError(f"bad key path {key!r}: no field {part!r}")
        if last:
            current = node[part]
            if isinstance(current, bool) or not isinstance(current, (int, float)):
                raise UsageError(f"bad key path {key!r}: field is not numeric")
            node[part] = int(value) if isinstance(current, int) and float(value).is_integer() else value
        else:
            node = node[part]


SWEEP_COLUMNS = ("value", "f_center_hz", "il_db", "fbw_3db", "rej_low_db", "rej_high_db", "status")


def cmd_sweep(args, run: _Run, out) -> int:
    data = run.read(args.design)
    read_design(data)  # validates the base file before any key handling
    base = json.loads(data)
    key, lo, hi, n = _parse_vary(args.vary)
    values = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    _set_path(copy.deepcopy(base), key, float(values[0]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((key,) + SWEEP_COLUMNS[1:])
    rows = []
    for v in values:
        obj = copy.deepcopy(base)
        _set_path(obj, key, float(v))
        doc = read_design(json.dumps(obj))
        try:
            m = extract_metrics(simulate(doc.design(), _grid_override(doc, args)), thresholds=())
            row = [m.f_center, m.il_db, m.fbw_3db, m.rej_low_db, m.rej_high_db]
            status = "ok"
        except (MetricsError, SingularNetworkError) as exc:
            row = [float("nan")] * 5
            status = type(exc).__name__
        w.writerow([f"{v:.12g}"] + [f"{x:.12g}" for x in row] + [status])
        rows.append({"value": float(v), "status": status})
    text = buf.getvalue()
    if args.out:
        run.write(args.out, text.encode())
    else:
        out.write(text)
    run.metrics = {"key": key, "rows": rows}
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_grid_args(p):
    g = p.add_argument_group("sweep overrides")
    g.add_argument("--start-ghz", type=float)
    g.add_argument("--stop-ghz", type=float)
    g.add_argument("--points", type=int)
    g.add_argument("--spacing", choices=("linear", "logarithmic"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="acoustic-ladder", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--report", help="write a JSON run report to this path")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a design file")
    p.add_argument("design", help="design file, or the name of a shipped fixture (table3, table4)")
    p.add_argument("--out", help="Touchstone .s2p output")
    p.add_argument("--csv", help="plot-ready CSV output (freq_hz, s21_db, s11_db)")
    p.add_argument("--threshold", type=float, action="append", default=None,
                   help="rejection-band threshold in dB (repeatable, default 40)")
    _add_grid_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="filter metrics of a two-port Touchstone file")
    p.add_argument("s2p")
    p.add_argument("--json", action="store_true", help="print the metrics record as JSON")
    p.add_argument("--relative", action="store_true", help="close-in rejection relative to IL")
    p.add_argument("--threshold", type=float, action="append", default=None)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("fit", help="fit an mBVD model to an admittance trace")
    p.add_argument("trace", help="CSV (freq_hz,re,im) admittance trace or one-port Touchstone file")
    p.add_argument("--branches", type=int, required=True)
    p.add_argument("--name", help="resonator name in the output fragment (default: file stem)")
    p.add_argument("--out", help="design-file fragment holding the fitted resonator")
    p.add_argument("--max-iterations", type=int, default=5000)
    p.add_argument("--objective", choices=("log-magnitude", "complex"), default="log-magnitude")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("optimize", help="optimize stage order and fs/c0 multipliers")
    p.add_argument("design")
    p.add_argument("--spec", help="spec file (default: the design file's spec block)")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="optimized design file")
    p.add_argument("--trace", help="cost-trace CSV")
    _add_grid_args(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="metrics versus one numeric design field")
    p.add_argument("design")
    p.add_argument("--vary", required=True, metavar="KEY=LO:HI:N",
                   help="dotted field path, e.g. variables.fs_scale.series=0.97:1.03:7")
    p.add_argument("--out", help="CSV output (default: stdout)")
    _add_grid_args(p)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threshold", "absent") is None:
        args.threshold = [40.0]
    run = _Run(args.command, argv)
    try:
        code = args.func(args, run, out)
        if args.report:
            run.write(args.report, (json.dumps(run.report(), indent=2, sort_keys=True) + "\n").encode())
        return code
    except (ParseError, UsageError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except (SingularNetworkError, MetricsError, FitError, ModelError, LadderError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
