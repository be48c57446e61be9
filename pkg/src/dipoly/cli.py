"""Command-line interface: ``dipoly eval|boundary|flatnorm|fubini|cartan|gallery|lsc``.

Exit status: 0 on success with all property checks passing, 1 when a
property check fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction

from . import io
from .coefficients import Group
from .dipolyhedra import Dipolyhedron
from .polychain import ChainError, PolyChain

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _emit(args, report: dict, text: str) -> None:
    if args.json:
        sys.stdout.write(io.dumps(report))
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _load(args):
    if not args.input:
        raise InputError("--in FILE is required")
    x = io.read_chain(args.input)
    if args.group:
        g = Group.parse(args.group)
        if isinstance(x, PolyChain):
            return x.with_group(g)
        x = Dipolyhedron.build(x.dim, x.ambient, g, {v: p.with_group(g) for v, p in x.dipole_parts},
                               {v: p.with_group(g) for v, p in x.mass_parts})
    return x


def _write_or_print(args, doc: dict) -> None:
    if args.out:
        io.write_json(args.out, doc)
    else:
        sys.stdout.write(io.dumps(doc))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    x = _load(args)
    fn = args.functional
    if fn in ("boundary",):
        return cmd_boundary(args, x)
    if fn == "support":
        cells = [[[io._q(c) for c in v] for v in s.vertices] for s in x.support()]
        _emit(args, {"functional": "support", "cells": cells},
              "\n".join(" ".join("(" + ",".join(io._q(c) for c in v) + ")" for v in s) for s in cells) or "(empty)")
        return EXIT_OK
    if isinstance(x, PolyChain):
        if fn != "mass":
            raise InputError(f"functional {fn!r} needs a dipolyhedron; polyhedral chains have only mass")
        value = x.mass()
    else:
        value = {"weight": x.weight, "mass": x.mass, "energy": x.energy}[fn]()
    _emit(args, {"functional": fn, "value": value}, f"{fn} = {value!r}")
    return EXIT_OK


def cmd_boundary(args, x=None) -> int:
    x = _load(args) if x is None else x
    b = x.boundary()
    if not b.boundary().is_zero():
        return EXIT_PROPERTY
    doc = io.chain_to_json(b)
    if args.out:
        io.write_json(args.out, doc)
        _emit(args, {"written": args.out, "cells": len(b.support())}, f"boundary written to {args.out}")
    else:
        sys.stdout.write(io.dumps(doc))
    return EXIT_OK


def cmd_flatnorm(args) -> int:
    from .flatnorm import Scaffold, energy_flat, flat_poly, verify_witness
    from .gallery import staircase

    if args.model:
        if args.model != "staircase":
            raise InputError(f"flatnorm --model supports only 'staircase', got {args.model!r}")
        if args.steps is None or args.steps < 0 or args.steps > 8:
            raise InputError("--steps must be in 0..8 for the staircase model")
        d_i, d = staircase(args.steps)
        x, scaffold = d_i - d, Scaffold.grid(2 ** args.steps)
    else:
        x = _load(args)
        if not args.scaffold:
            raise InputError("--scaffold FILE is required")
        scaffold = io.read_scaffold(args.scaffold)
    method = args.method
    if isinstance(x, PolyChain):
        res = flat_poly(x, scaffold, method)
        ok = (res.B + res.C.boundary() - x).is_zero()
        B, C = res.B, res.C
    else:
        res = energy_flat(x, scaffold, method)
        check = verify_witness(x, res.decomposition)
        ok = check.ok
        B, C = res.decomposition.B, res.decomposition.C
    trivial = x.mass() if isinstance(x, PolyChain) else x.energy()
    report = {"value": res.value, "regime": res.regime, "relaxation": res.relaxation,
              "trivial": trivial, "verified": ok}
    if args.out:
        io.write_json(args.out, io.witness_to_json(res.value, B, C))
    _emit(args, report, f"flat norm <= {res.value!r}  (regime {res.regime}, trivial {trivial!r}, "
                        f"witness {'verified' if ok else 'FAILED'})")
    return EXIT_OK if ok and res.value <= trivial * (1 + 1e-12) + 1e-300 else EXIT_PROPERTY


def cmd_fubini(args) -> int:
    from .experiments import fubini

    x = _load(args)
    if isinstance(x, PolyChain):
        x = Dipolyhedron.dipole(x)
    step = Fraction(args.step) if args.step is not None else Fraction(1, 1000)
    if step <= 0:
        raise InputError("--step must be positive")
    axis = args.axis or 1
    if not 1 <= axis <= x.ambient:
        raise InputError(f"--axis must be in 1..{x.ambient}")
    r = fubini(x, axis, step)
    text = (f"int W(S_s) ds = {r.integral_weight:.9g} <= W = {r.weight:.9g}\n"
            f"int M(T_s) ds = {r.integral_mass:.9g} <= M = {r.mass:.9g}\n"
            f"int E(D_s) ds = {r.integral_energy:.9g} <= E = {r.energy:.9g}\n"
            f"margins: " + ", ".join(f"{k} {v:.3g}" for k, v in r.margins.items()))
    _emit(args, r.to_dict(), text)
    return EXIT_OK if r.ok else EXIT_PROPERTY


def _vector(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(t) for t in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"invalid vector {text!r}; expected comma-separated rationals") from None


def cmd_cartan(args) -> int:
    from .experiments import cartan_table
    from .natural_norm import DegenerateDirectionWarning

    if args.input:
        x = _load(args)
        if not isinstance(x, PolyChain) or len(x.terms) != 1:
            raise InputError("cartan needs a poly file with exactly one simplex")
        sigma = x
    else:
        sigma = PolyChain.simplex((0, 0), (1, 0), group=Group.Q)
    tau = sigma.terms[0][0]
    v = _vector(args.v) if args.v else (Fraction(0),) * (tau.ambient - 1) + (Fraction(1),)
    if len(v) not in (tau.ambient, tau.ambient + 1):
        raise InputError(f"direction must have {tau.ambient} or {tau.ambient + 1} coordinates")
    steps = 8 if args.steps is None else args.steps
    if steps < 1 or steps > 16:
        raise InputError("--steps must be in 1..16")
    scaffold = io.read_scaffold(args.scaffold) if args.scaffold else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateDirectionWarning)
        rep = cartan_table(tau, v, range(1, steps + 1),
                           sigma if len(v) == tau.ambient else None, scaffold)
    if rep.degenerate:
        print("warning: direction is tangent to the cell (degenerate prism)", file=sys.stderr)
    lines = ["j  cauchy_gap        bound             residual"]
    for r in rep.rows:
        res = "-" if r.residual is None else f"{r.residual:.6g}"
        lines.append(f"{r.j:<2} {r.gap:<17.10g} {r.bound:<17.10g} {res}")
    _emit(args, rep.to_dict(), "\n".join(lines))
    return EXIT_OK if rep.ok else EXIT_PROPERTY


def cmd_gallery(args) -> int:
    from .gallery import MODELS, ModelCheckError, build

    if not args.model:
        raise InputError("--model NAME is required; choose from " + ", ".join(sorted(MODELS)))
    if args.model not in MODELS:
        raise InputError(f"unknown model {args.model!r}; choose from {', '.join(sorted(MODELS))}")
    try:
        model = build(args.model)
    except ModelCheckError as e:
        print(f"property check failed: {e}", file=sys.stderr)
        return EXIT_PROPERTY
    report = {"model": model.name, "checks": model.checks, "values": model.values,
              "weight": model.D.weight(), "mass": model.D.mass(), "energy": model.D.energy()}
    if args.out:
        prefix = args.out[:-5] if args.out.endswith(".json") else args.out
        io.write_json(prefix + ".json", io.chain_to_json(model.D))
        io.write_json(prefix + ".boundary.json", io.chain_to_json(model.boundary))
        with open(prefix + ".obj", "w", encoding="utf-8") as fh:
            fh.write(io.to_obj(model.D))
        report["files"] = [prefix + ".json", prefix + ".boundary.json", prefix + ".obj"]
    text = [f"model {model.name}: E = {model.D.energy():.9g}"]
    text += [f"  [{'ok' if ok else 'FAIL'}] {name}" for name, ok in model.checks.items()]
    text += [f"  {k} = {v:.9g}" for k, v in model.values.items()]
    _emit(args, report, "\n".join(text))
    return EXIT_OK


def cmd_lsc(args) -> int:
    from .experiments import lsc

    n = 6 if args.steps is None else args.steps
    if n < 1 or n > 8:
        raise InputError("--steps must be in 1..8")
    rep = lsc(range(1, n + 1), args.kind, args.constant)
    label = "W" if rep.kind == "dipole" else "M"
    lines = [f"i  E_flat(D_i - D)   regime            {label}(D_i)"]
    for r in rep.rows:
        lines.append(f"{r.i:<2} {r.flat_distance:<17.10g} {r.regime:<17} "
                     f"{r.weight if rep.kind == 'dipole' else r.mass:.9g}")
    lim = rep.limit_weight if rep.kind == "dipole" else rep.limit_mass
    lines.append(f"{label}(D) = {lim:.9g}; semicontinuity margin = {rep.margin:.9g}")
    _emit(args, rep.to_dict(), "\n".join(lines))
    return EXIT_OK if rep.ok else EXIT_PROPERTY


COMMANDS = {"eval": cmd_eval, "boundary": cmd_boundary, "flatnorm": cmd_flatnorm, "fubini": cmd_fubini,
            "cartan": cmd_cartan, "gallery": cmd_gallery, "lsc": cmd_lsc}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dipoly", description="Exact dipolyhedral chain calculus.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--in", dest="input", metavar="FILE", help="chain file (JSON)")
    p.add_argument("--out", metavar="FILE", help="output file (or prefix for gallery)")
    p.add_argument("--group", choices=[g.value for g in Group], help="override the coefficient group")
    p.add_argument("--functional", default="energy",
                   choices=["weight", "mass", "energy", "boundary", "support"])
    p.add_argument("--axis", type=int, help="slicing axis, 1-based")
    p.add_argument("--step", help="quadrature step relative to the support extent (rational)")
    p.add_argument("--scaffold", metavar="FILE", help="scaffold file (JSON)")
    p.add_argument("--model", help="gallery model name, or 'staircase' for flatnorm")
    p.add_argument("--steps", type=int, help="j-range / resolution range / staircase level")
    p.add_argument("--v", help="direction vector for cartan, comma separated")
    p.add_argument("--kind", default="dipole", choices=["dipole", "mass"], help="lsc sequence kind")
    p.add_argument("--constant", action="store_true", help="lsc with the constant sequence D_i = D")
    p.add_argument("--method", choices=["exhaustive", "branch-and-bound", "lp-lift"],
                   help="force a Z2 solver regime")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except io.SchemaError as e:
        print(json.dumps({"error": "schema", "pointer": e.pointer, "message": str(e)}), file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ChainError, ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
