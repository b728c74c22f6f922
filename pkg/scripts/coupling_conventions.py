"""How much the reading of the tabulated k2 moves the filter response.

The tables quote a coupling in percent without saying which definition it
is.  This re-reads every branch under each supported convention, converts
to the package's cm / (c0 + cm) form and re-simulates the fixture.
"""

import argparse

from acoustic_ladder.formats import load_fixture
from acoustic_ladder.mbvd import MotionalBranch, convert_coupling
from acoustic_ladder.metrics import extract_metrics, rejection_bandwidth
from acoustic_ladder.network import LadderDesign, simulate

CONVENTIONS = ("mbvd", "ratio", "pi2_8")


def reread(model, convention):
    branches = [MotionalBranch(b.label, b.fs, b.q, convert_coupling(b.k2, convention)) for b in model.branches]
    return model.with_branches(branches)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("fixture", nargs="?", default="table3", choices=("table3", "table4"))
    args = ap.parse_args()

    doc = load_fixture(args.fixture)
    print(f"{args.fixture}, ordering {doc.design().code()}")
    print(f"{'convention':10s} {'fc GHz':>7s} {'IL dB':>6s} {'FBW %':>6s} {'rej lo':>6s} {'rej hi':>6s} {'35 dB band':>10s}")
    for conv in CONVENTIONS:
        try:
            res = {name: reread(m, conv) for name, m in doc.resonators.items()}
        except ValueError as exc:
            print(f"{conv:10s} not representable: {exc}")
            continue
        s = simulate(LadderDesign(doc.stages, res, doc.z0), doc.grid)
        m = extract_metrics(s, thresholds=())
        band = rejection_bandwidth(s, 35.0, "below")
        width = 0.0 if band is None else (band[1] - band[0]) / 1e9
        print(f"{conv:10s} {m.f_center / 1e9:7.3f} {m.il_db:6.2f} {100 * m.fbw_3db:6.2f} "
              f"{m.rej_low_db:6.1f} {m.rej_high_db:6.1f} {width:10.2f}")


if __name__ == "__main__":
    main()
