"""Regenerate the shipped ``table3.design`` / ``table4.design`` fixtures.

The resonator values are typed in below in engineering units; the stage
order is the one selected by ``reproduce_tables.py``.
"""

import argparse
from pathlib import Path

from acoustic_ladder.formats.designfile import DEFAULT_GRID, DesignDocument, write_design, FF, GHZ, NH, PCT
from acoustic_ladder.mbvd import MotionalBranch, ResonatorMeta, ResonatorModel
from acoustic_ladder.network import Stage
from acoustic_ladder.optimizer import DesignSpec, DesignVariables, RejectionRequirement

MODES = ("S2", "A3", "S4")

META = {
    "series": ResonatorMeta(260, 12, 800, 12, 71),
    "shunt_a": ResonatorMeta(310, 8, 800, 19.5, 71),
    "shunt_b": ResonatorMeta(310, 8, 800, 6.5, 71),
}

# name: (c0 fF, rs ohm, ls nH, [(fs GHz, Q, k2 %), ...])
SYNTHESIZED = {
    "series": (90, 0, 0, [(13.4, 80, 27.8), (20.2, 80, 18.7), (26.8, 80, 6.54)]),
    "shunt_a": (178, 0, 0, [(11.5, 80, 2.4), (17.1, 80, 58.7), (22.5, 80, 5.7)]),
    "shunt_b": (44.5, 0, 0, [(11.5, 80, 2.4), (17.1, 80, 58.7), (22.5, 80, 5.7)]),
}

MEASURED = {
    "series": (96, 6, 0.21, [(13.5, 53.8, 24.2), (20.2, 87.7, 10), (26.7, 136, 1.2)]),
    "shunt_a": (174, 5, 0.19, [(11.4, 12.9, 2.8), (17.2, 18.9, 46), (22.7, 46.6, 1.9)]),
    "shunt_b": (48, 9.4, 0.24, [(11.5, 10.2, 0.8), (17.2, 36.3, 45), (22.7, 78.5, 1.2)]),
}

STAGES = (
    Stage("series", "series"),
    Stage("shunt", "shunt_b"),
    Stage("series", "series"),
    Stage("shunt", "shunt_b"),
    Stage("series", "series"),
)


def resonators(table):
    out = {}
    for name, (c0, rs, ls, modes) in table.items():
        branches = [MotionalBranch(m, fs * GHZ, q, k2 * PCT) for m, (fs, q, k2) in zip(MODES, modes)]
        out[name] = ResonatorModel(c0 * FF, branches, rs, ls * NH, label=name, meta=META[name])
    return out


def documents():
    low_side = (RejectionRequirement(min_db=40.0, offset_bw=-2.0),)
    yield "table3", DesignDocument(
        resonators=resonators(SYNTHESIZED),
        variables=DesignVariables(STAGES),
        grid=DEFAULT_GRID,
        spec=DesignSpec(19.5 * GHZ, 0.096, 2.2, low_side),
        name="table3",
        description="Synthesized three-mode resonators, lossless electrodes, 5-stage ladder",
    )
    yield "table4", DesignDocument(
        resonators=resonators(MEASURED),
        variables=DesignVariables(STAGES),
        grid=DEFAULT_GRID,
        spec=DesignSpec(19.3 * GHZ, 0.085, 2.2, low_side),
        name="table4",
        description="Resonator models fitted to measured devices, 5-stage ladder",
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    default = Path(__file__).resolve().parents[1] / "src" / "acoustic_ladder" / "data"
    ap.add_argument("--out", type=Path, default=default)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, doc in documents():
        path = args.out / f"{name}.design"
        path.write_bytes(write_design(doc))
        print(path)


if __name__ == "__main__":
    main()
