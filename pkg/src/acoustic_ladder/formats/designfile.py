"""The ``.design`` JSON format: resonators, stage list, termination, sweep and spec.

Every dimensioned key carries its unit as a suffix (``_ghz``, ``_ff``,
``_nh``, ``_ohm``, ``_pct``, ``_db``); values are converted to SI on read
and back on write.  Unknown keys are rejected.
"""

from __future__ import annotations

import json
from decimal import Decimal
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import jsonschema

from ..errors import ModelError, SchemaError
from ..mbvd import MotionalBranch, ResonatorMeta, ResonatorModel
from ..network import FrequencyGrid, LadderDesign, Stage
from ..optimizer import CostWeights, DesignSpec, DesignVariables, RejectionRequirement

GHZ = 1e9
FF = 1e-15
NH = 1e-9
PCT = 1e-2

FORMAT_NAME = "acoustic-ladder-design"
FORMAT_VERSION = 1

_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}

_BRANCH = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "fs_ghz", "q", "k2_pct"],
    "properties": {
        "mode": {"type": "string"},
        "fs_ghz": _pos,
        "q": _pos,
        "k2_pct": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 100},
    },
}

_META = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "ln_thickness_nm": _pos,
        "wavelength_um": _pos,
        "electrode_width_nm": _pos,
        "electrode_pairs": _pos,
        "aperture_um": _pos,
    },
}

_RESONATOR = {
    "type": "object",
    "additionalProperties": False,
    "required": ["c0_ff", "branches"],
    "properties": {
        "c0_ff": _pos,
        "rs_ohm": _nonneg,
        "ls_nh": _nonneg,
        "r0_ohm": _nonneg,
        "meta": _META,
        "branches": {"type": "array", "minItems": 1, "items": _BRANCH},
    },
}

_BOUNDS = {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2}

_REJECTION = {
    "type": "object",
    "additionalProperties": False,
    "required": ["min_db"],
    "properties": {
        "min_db": _pos,
        "offset_bw": {"type": "number"},
        "start_ghz": _pos,
        "stop_ghz": _pos,
    },
    "oneOf": [
        {"required": ["offset_bw"], "not": {"anyOf": [{"required": ["start_ghz"]}, {"required": ["stop_ghz"]}]}},
        {"required": ["start_ghz", "stop_ghz"], "not": {"required": ["offset_bw"]}},
    ],
}

_WEIGHTS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"il": _nonneg, "bw": _nonneg, "rej": _nonneg, "fc": _nonneg},
}

SPEC_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["target_fc_ghz", "min_fbw_pct", "max_il_db"],
    "properties": {
        "target_fc_ghz": _pos,
        "min_fbw_pct": _pos,
        "max_il_db": _pos,
        "z0_ohm": _pos,
        "rejection": {"type": "array", "items": _REJECTION},
        "weights": _WEIGHTS,
    },
}

_SWEEP = {
    "type": "object",
    "additionalProperties": False,
    "required": ["start_ghz", "stop_ghz", "points"],
    "properties": {
        "start_ghz": _pos,
        "stop_ghz": _pos,
        "points": {"type": "integer", "minimum": 2},
        "spacing": {"enum": ["linear", "logarithmic"]},
    },
}

_VARIABLES = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "fs_scale": {"type": "object", "additionalProperties": _pos},
        "c0_scale": {"type": "object", "additionalProperties": _pos},
        "bounds": {"type": "object", "additionalProperties": _BOUNDS},
    },
}

DESIGN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["format", "version", "resonators"],
    "properties": {
        "format": {"const": FORMAT_NAME},
        "version": {"const": FORMAT_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "z0_ohm": _pos,
        "resonators": {"type": "object", "minProperties": 1, "additionalProperties": _RESONATOR},
        "stages": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["placement", "resonator"],
                "properties": {"placement": {"enum": ["series", "shunt"]}, "resonator": {"type": "string"}},
            },
        },
        "variables": _VARIABLES,
        "sweep": _SWEEP,
        "spec": SPEC_SCHEMA,
    },
}

DEFAULT_GRID = FrequencyGrid(5 * GHZ, 35 * GHZ, 3001)


def _si(value, exponent: int) -> float:
    """``value * 10**exponent`` rounded once, so 17.1 GHz reads as the double nearest 17.1e9."""
    return float(Decimal(repr(float(value))).scaleb(exponent))


@dataclass(frozen=True)
class DesignDocument:
    """A parsed design file.  ``resonators`` hold the unscaled models."""

    resonators: Mapping[str, ResonatorModel]
    variables: Optional[DesignVariables] = None
    z0: float = 50.0
    grid: FrequencyGrid = DEFAULT_GRID
    spec: Optional[DesignSpec] = None
    name: str = ""
    description: str = ""
    has_sweep: bool = field(default=True, compare=False)

    @property
    def stages(self) -> tuple[Stage, ...]:
        return self.variables.stages if self.variables is not None else ()

    def design(self) -> LadderDesign:
        if self.variables is None:
            raise SchemaError("design has no stages", ("stages",))
        return self.variables.apply(self.resonators, self.z0)

    def with_variables(self, variables: DesignVariables) -> "DesignDocument":
        return replace(self, variables=variables)


# ---------------------------------------------------------------------------
# reading


def _line_of(text: str, path) -> Optional[int]:
    """Best-effort source line of the element addressed by ``path``.

    String keys are searched for in order; an array index ``i`` followed by
    a key skips to the ``i``-th occurrence of that key, which is right for
    arrays of objects sharing a layout.
    """
    pos = 0
    found = False
    skip = 0
    for part in path:
        if isinstance(part, int):
            skip = part
            continue
        needle = json.dumps(part) + ":"
        for _ in range(skip + 1):
            nxt = text.find(needle, pos)
            if nxt < 0:
                break
            pos = nxt + len(needle)
            found = True
        skip = 0
    if not found:
        return None
    return text.count("\n", 0, pos) + 1


def _load_json(data: Union[bytes, str]) -> tuple[Any, str]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from None


def _validate(obj, schema, text, prefix=()):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        path = prefix + tuple(err.absolute_path)
        message = err.message
        if err.validator == "additionalProperties":
            message = f"unknown key: {message}"
        raise SchemaError(message, path, line=_line_of(text, path))


def _spec_from(obj, z0) -> DesignSpec:
    reqs = []
    for r in obj.get("rejection", []):
        if "offset_bw" in r:
            reqs.append(RejectionRequirement(min_db=float(r["min_db"]), offset_bw=float(r["offset_bw"])))
        else:
            reqs.append(RejectionRequirement(min_db=float(r["min_db"]),
                                             band=(_si(r["start_ghz"], 9), _si(r["stop_ghz"], 9))))
    return DesignSpec(
        target_fc=_si(obj["target_fc_ghz"], 9),
        min_fbw=_si(obj["min_fbw_pct"], -2),
        max_il=float(obj["max_il_db"]),
        rejection=tuple(reqs),
        z0=float(obj.get("z0_ohm", z0)),
        weights=CostWeights(**{k: float(v) for k, v in obj.get("weights", {}).items()}),
    )


def _resonator_from(name, obj) -> ResonatorModel:
    meta = ResonatorMeta(**obj["meta"]) if "meta" in obj else None
    branches = [
        MotionalBranch(b["mode"], _si(b["fs_ghz"], 9), float(b["q"]), _si(b["k2_pct"], -2)) for b in obj["branches"]
    ]
    return ResonatorModel(
        c0=_si(obj["c0_ff"], -15),
        rs=float(obj.get("rs_ohm", 0.0)),
        ls=_si(obj.get("ls_nh", 0.0), -9),
        r0=float(obj.get("r0_ohm", 0.0)),
        branches=branches,
        label=name,
        meta=meta,
    )


def read_design(data: Union[bytes, str]) -> DesignDocument:
    """Parse and validate a design document; raises :class:`SchemaError` with its location."""
    obj, text = _load_json(data)
    _validate(obj, DESIGN_SCHEMA, text)
    resonators = {}
    for name, robj in obj["resonators"].items():
        try:
            resonators[name] = _resonator_from(name, robj)
        except ModelError as exc:
            raise SchemaError(str(exc), ("resonators", name), line=_line_of(text, ("resonators", name))) from None
    z0 = float(obj.get("z0_ohm", 50.0))
    variables = None
    if "stages" in obj:
        stages = []
        for i, st in enumerate(obj["stages"]):
            if st["resonator"] not in resonators:
                raise SchemaError(f"unknown resonator {st['resonator']!r}", ("stages", i, "resonator"),
                                  line=_line_of(text, ("stages", i, "resonator")))
            stages.append(Stage(st["placement"], st["resonator"]))
        vobj = obj.get("variables", {})
        try:
            variables = DesignVariables(
                stages=tuple(stages),
                fs_scale=vobj.get("fs_scale", {}),
                c0_scale=vobj.get("c0_scale", {}),
                bounds={k: tuple(v) for k, v in vobj.get("bounds", {}).items()},
            )
        except ValueError as exc:
            raise SchemaError(str(exc), ("variables",), line=_line_of(text, ("variables",))) from None
    grid = DEFAULT_GRID
    if "sweep" in obj:
        sw = obj["sweep"]
        try:
            grid = FrequencyGrid(_si(sw["start_ghz"], 9), _si(sw["stop_ghz"], 9), int(sw["points"]),
                                 sw.get("spacing", "linear"))
        except ValueError as exc:
            raise SchemaError(str(exc), ("sweep",), line=_line_of(text, ("sweep",))) from None
    spec = None
    if "spec" in obj:
        try:
            spec = _spec_from(obj["spec"], z0)
        except ValueError as exc:
            raise SchemaError(str(exc), ("spec",), line=_line_of(text, ("spec",))) from None
    return DesignDocument(
        resonators=resonators,
        variables=variables,
        z0=z0,
        grid=grid,
        spec=spec,
        name=obj.get("name", ""),
        description=obj.get("description", ""),
        has_sweep="sweep" in obj,
    )


def read_spec(data: Union[bytes, str], z0: float = 50.0) -> DesignSpec:
    """Parse a standalone spec file (the ``spec`` block of a design file)."""
    obj, text = _load_json(data)
    _validate(obj, SPEC_SCHEMA, text)
    try:
        return _spec_from(obj, z0)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


# ---------------------------------------------------------------------------
# writing


def _num(x: float):
    """Round to 12 significant digits; integral values are emitted as integers."""
    v = float(f"{x:.12g}")
    if v.is_integer() and abs(v) < 1e15:
        return int(v)
    return v


def _resonator_to(m: ResonatorModel) -> dict:
    out: dict[str, Any] = {"c0_ff": _num(m.c0 / FF), "rs_ohm": _num(m.rs), "ls_nh": _num(m.ls / NH)}
    if m.r0:
        out["r0_ohm"] = _num(m.r0)
    if m.meta is not None:
        meta = {k: _num(v) for k, v in vars(m.meta).items() if v is not None}
        if meta:
            out["meta"] = meta
    out["branches"] = [
        {"mode": b.label, "fs_ghz": _num(b.fs / GHZ), "q": _num(b.q), "k2_pct": _num(b.k2 / PCT)}
        for b in m.branches
    ]
    return out


def spec_to_dict(spec: DesignSpec, z0: Optional[float] = None) -> dict:
    out: dict[str, Any] = {
        "target_fc_ghz": _num(spec.target_fc / GHZ),
        "min_fbw_pct": _num(spec.min_fbw / PCT),
        "max_il_db": _num(spec.max_il),
    }
    if z0 is None or spec.z0 != z0:
        out["z0_ohm"] = _num(spec.z0)
    if spec.rejection:
        rej = []
        for r in spec.rejection:
            if r.offset_bw is not None:
                rej.append({"offset_bw": _num(r.offset_bw), "min_db": _num(r.min_db)})
            else:
                rej.append({"start_ghz": _num(r.band[0] / GHZ), "stop_ghz": _num(r.band[1] / GHZ),
                            "min_db": _num(r.min_db)})
        out["rejection"] = rej
    if spec.weights != CostWeights():
        out["weights"] = {k: _num(v) for k, v in vars(spec.weights).items()}
    return out


def design_to_dict(doc: DesignDocument) -> dict:
    out: dict[str, Any] = {"format": FORMAT_NAME, "version": FORMAT_VERSION}
    if doc.name:
        out["name"] = doc.name
    if doc.description:
        out["description"] = doc.description
    out["z0_ohm"] = _num(doc.z0)
    out["resonators"] = {name: _resonator_to(m) for name, m in doc.resonators.items()}
    v = doc.variables
    if v is not None:
        out["stages"] = [{"placement": st.placement, "resonator": st.resonator} for st in v.stages]
        vars_out: dict[str, Any] = {}
        fs = {k: _num(x) for k, x in v.fs_scale.items() if x != 1.0}
        c0 = {k: _num(x) for k, x in v.c0_scale.items() if x != 1.0}
        defaults = DesignVariables(v.stages).bounds
        bounds = {k: [_num(b[0]), _num(b[1])] for k, b in v.bounds.items() if b != defaults[k]}
        if fs:
            vars_out["fs_scale"] = fs
        if c0:
            vars_out["c0_scale"] = c0
        if bounds:
            vars_out["bounds"] = bounds
        if vars_out:
            out["variables"] = vars_out
    if doc.has_sweep:
        g = doc.grid
        out["sweep"] = {"start_ghz": _num(g.start / GHZ), "stop_ghz": _num(g.stop / GHZ), "points": int(g.points)}
        if g.spacing != "linear":
            out["sweep"]["spacing"] = g.spacing
    if doc.spec is not None:
        out["spec"] = spec_to_dict(doc.spec, doc.z0)
    return out


def write_design(doc: DesignDocument) -> bytes:
    return (json.dumps(design_to_dict(doc), indent=2) + "\n").encode("utf-8")


def fragment_to_bytes(resonators: Mapping[str, ResonatorModel]) -> bytes:
    """A design file holding only resonator definitions (what ``fit`` emits)."""
    doc = DesignDocument(resonators=dict(resonators), has_sweep=False)
    return write_design(doc)


# ---------------------------------------------------------------------------
# shipped fixtures

FIXTURES = ("table3", "table4")


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return Path(str(resources.files("acoustic_ladder") / "data" / f"{name}.design"))


def load_fixture(name: str) -> DesignDocument:
    return read_design(fixture_path(name).read_bytes())
