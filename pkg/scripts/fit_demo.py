"""Synthesize an admittance trace from a shipped resonator and fit it back.

Multiplicative Gaussian amplitude noise can be added; the script prints the
true and recovered parameters side by side and can save the noisy trace as
a CSV that ``acoustic-ladder fit`` accepts.
"""

import argparse

import numpy as np

from acoustic_ladder.fitting import AdmittanceTrace, fit_mbvd
from acoustic_ladder.formats import load_fixture, write_trace_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", default="table4", choices=("table3", "table4"))
    ap.add_argument("--resonator", default="shunt_a", choices=("series", "shunt_a", "shunt_b"))
    ap.add_argument("--noise", type=float, default=0.005, help="relative amplitude noise (0 for none)")
    ap.add_argument("--points", type=int, default=3001)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", help="also write the synthesized trace here")
    args = ap.parse_args()

    model = load_fixture(args.fixture).resonators[args.resonator]
    f = np.linspace(5e9, 35e9, args.points)
    rng = np.random.default_rng(args.seed)
    y = model.admittance(f) * (1 + args.noise * rng.standard_normal(len(f)))
    trace = AdmittanceTrace(f, y, args.resonator)
    if args.csv:
        with open(args.csv, "wb") as fh:
            fh.write(write_trace_csv(trace))

    r = fit_mbvd(trace, len(model.branches))
    fit = r.model
    print(f"{args.fixture}/{args.resonator}: {r.status}, residual {r.residual:.3g} "
          f"(guess {r.initial_residual:.3g}), {r.iterations} iterations")
    print(f"{'':10s} {'true':>10s} {'fitted':>10s}")
    print(f"{'c0 fF':10s} {model.c0 * 1e15:10.4g} {fit.c0 * 1e15:10.4g}")
    print(f"{'rs ohm':10s} {model.rs:10.4g} {fit.rs:10.4g}")
    print(f"{'ls nH':10s} {model.ls * 1e9:10.4g} {fit.ls * 1e9:10.4g}")
    for a, b in zip(model.branches, fit.branches):
        print(f"{a.label + ' fs GHz':10s} {a.fs / 1e9:10.5g} {b.fs / 1e9:10.5g}")
        print(f"{a.label + ' Q':10s} {a.q:10.4g} {b.q:10.4g}")
        print(f"{a.label + ' k2 %':10s} {100 * a.k2:10.4g} {100 * b.k2:10.4g}")


if __name__ == "__main__":
    main()
