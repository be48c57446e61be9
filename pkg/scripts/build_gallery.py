#!/usr/bin/env python3
"""Build every gallery model, print its checks, and write JSON + OBJ files."""
import argparse
from pathlib import Path

from dipoly import io
from dipoly.gallery import MODELS, build


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="gallery_out")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for name in MODELS:
        m = build(name)
        io.write_json(str(out / f"{name}.json"), io.chain_to_json(m.D))
        (out / f"{name}.obj").write_text(io.to_obj(m.D))
        failed += not m.ok
        print(f"{name}: {'ok' if m.ok else 'FAILED'}")
        for check, good in m.checks.items():
            print(f"    [{'x' if good else ' '}] {check}")
        for key, val in m.values.items():
            print(f"    {key} = {val:.6g}")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
