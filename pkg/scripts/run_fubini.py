#!/usr/bin/env python3
"""Slice-integral inequalities on random dipolyhedra (seeded)."""
import argparse
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from dipoly.coefficients import Group  # noqa: E402
from dipoly.experiments import fubini  # noqa: E402
from randgen import rand_dipolyhedron  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    worst = 0.0
    for i in range(args.count):
        g = rng.choice(list(Group))
        d = rand_dipolyhedron(rng, rng.randint(1, 2), rng.randint(2, 3), g, directions=2)
        rep = fubini(d, rng.randint(1, d.ambient))
        rel = min(rep.margins.values()) / rep.energy if rep.energy else 0.0
        worst = min(worst, rel)
        print(f"{i:>3} {g.value:>2} k={d.dim} n={d.ambient} E={rep.energy:9.4f} "
              f"intE={rep.integral_energy:9.4f} min margin/E={rel: .3e} ok={rep.ok}")
    print(f"worst relative margin {worst:.3e}")


if __name__ == "__main__":
    main()
