"""Rank every 5-stage ordering of the shipped resonator tables.

For each fixture the twelve alternating orderings are simulated at the
fixture's own multipliers, scored against its spec block and printed best
first.  ``--json`` writes the same table for later comparison.
"""

import argparse
import json

from acoustic_ladder.formats import load_fixture
from acoustic_ladder.metrics import rejection_bandwidth
from acoustic_ladder.network import ladder_orderings, simulate
from acoustic_ladder.optimizer import rank_orderings


def ranking(name, threshold_db):
    doc = load_fixture(name)
    rows = []
    for r in rank_orderings(list(ladder_orderings("series", ["shunt_a", "shunt_b"])), doc.resonators, doc.spec, doc.grid):
        row = {"ordering": r.design.code(), "cost": r.cost}
        if r.metrics is not None:
            m = r.metrics
            band = rejection_bandwidth(simulate(r.design, doc.grid), threshold_db, "below")
            row.update(
                f_center_ghz=m.f_center / 1e9,
                il_db=m.il_db,
                fbw_pct=100 * m.fbw_3db,
                rej_low_db=m.rej_low_db,
                rej_high_db=m.rej_high_db,
                band_below_ghz=0.0 if band is None else (band[1] - band[0]) / 1e9,
            )
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threshold", type=float, default=35.0, help="rejection level for the band width column")
    ap.add_argument("--json", help="write the rankings to this file")
    args = ap.parse_args()

    out = {}
    for name in ("table3", "table4"):
        rows = ranking(name, args.threshold)
        out[name] = rows
        print(f"\n{name}")
        print(f"{'ordering':40s} {'cost':>8s} {'fc GHz':>7s} {'IL dB':>6s} {'FBW %':>6s} "
              f"{'rej lo':>6s} {'rej hi':>6s} {'band':>5s}")
        for r in rows:
            if "il_db" not in r:
                print(f"{r['ordering']:40s} {r['cost']:8.3g}  (no measurable passband)")
                continue
            print(f"{r['ordering']:40s} {r['cost']:8.3g} {r['f_center_ghz']:7.3f} {r['il_db']:6.2f} "
                  f"{r['fbw_pct']:6.2f} {r['rej_low_db']:6.1f} {r['rej_high_db']:6.1f} {r['band_below_ghz']:5.2f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2)


if __name__ == "__main__":
    main()
