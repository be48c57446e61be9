#!/usr/bin/env python3
"""Staircase lower-semicontinuity table: scaffold flat distance and weights per resolution."""
import argparse
import json

from dipoly.experiments import lsc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-level", type=int, default=6)
    ap.add_argument("--kind", choices=["dipole", "mass"], default="dipole")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rep = lsc(range(1, args.max_level + 1), kind=args.kind)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2))
        return
    print(f"{'i':>2} {'E_flat(D_i - D)':>16} {'regime':>17} {'W(D_i)':>8} {'M(D_i)':>8}")
    for r in rep.rows:
        print(f"{r.i:>2} {r.flat_distance:>16.10g} {r.regime:>17} {r.weight:>8.4f} {r.mass:>8.4f}")
    print(f"limit W = {rep.limit_weight:.6f}, M = {rep.limit_mass:.6f}, margin = {rep.margin:.6f}, ok = {rep.ok}")


if __name__ == "__main__":
    main()
