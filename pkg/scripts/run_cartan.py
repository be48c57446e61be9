#!/usr/bin/env python3
"""Prism-approximant Cauchy gaps against their bound, and the Cartan residual, on the unit square."""
import argparse
from fractions import Fraction

from dipoly.coefficients import Group
from dipoly.experiments import cartan_table
from dipoly.geom import Simplex
from dipoly.polychain import PolyChain

SQUARE = PolyChain.from_terms([(((0, 0, 0), (1, 0, 0), (1, 1, 0)), 1),
                               (((0, 0, 0), (1, 1, 0), (0, 1, 0)), 1)], Group.Q)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=8)
    ap.add_argument("--v", default="1/3,1/4,1", help="direction, comma separated rationals")
    args = ap.parse_args()
    v = tuple(Fraction(x) for x in args.v.split(","))
    tau = Simplex(((0, 0, 0), (1, 0, 0), (1, 1, 0)))
    rep = cartan_table(tau, v, range(1, args.steps + 1), sigma=SQUARE)
    print(f"{'j':>2} {'gap':>14} {'bound':>14} {'residual':>10}")
    for r in rep.rows:
        print(f"{r.j:>2} {r.gap:>14.8g} {r.bound:>14.8g} {r.residual:>10.3g}")
    print("ratios:", ", ".join(f"{x:.6f}" for x in rep.ratios), "ok =", rep.ok)


if __name__ == "__main__":
    main()
