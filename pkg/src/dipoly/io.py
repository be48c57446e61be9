"""JSON chain files and OBJ mesh export.

Rationals are written as "p/q" strings and terms in canonical order, so a
serialized document is byte-identical across runs and parse(serialize(x)) == x.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .coefficients import Group
from .dipolyhedra import E4, Dipolyhedron
from .geom import Simplex
from .polychain import ChainError, PolyChain, canonicalize


class SchemaError(ValueError):
    """Malformed chain document; ``pointer`` is a JSON pointer to the offending value."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def _q(x) -> str:
    return Group.Q.format(x)


def _rational(x, ptr: str) -> Fraction:
    if isinstance(x, bool):
        raise SchemaError(ptr, "expected a rational, got a boolean")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise SchemaError(ptr, f"invalid rational {x!r}") from None
    raise SchemaError(ptr, f"expected a rational ('p/q' string or integer), got {type(x).__name__}")


def _field(doc: dict, key: str, ptr: str, kind=None):
    if not isinstance(doc, dict):
        raise SchemaError(ptr, "expected an object")
    if key not in doc:
        raise SchemaError(f"{ptr}/{key}", "missing required field")
    val = doc[key]
    if kind is not None and (not isinstance(val, kind) or isinstance(val, bool)):
        raise SchemaError(f"{ptr}/{key}", f"expected {kind.__name__}, got {type(val).__name__}")
    return val


def _group(doc: dict, ptr: str) -> Group:
    name = _field(doc, "group", ptr, str)
    try:
        return Group.parse(name)
    except ValueError as e:
        raise SchemaError(f"{ptr}/group", str(e)) from None


def _simplex(verts, ptr: str, ambient: int, dim: int) -> Simplex:
    if not isinstance(verts, list) or len(verts) != dim + 1:
        raise SchemaError(ptr, f"expected a list of {dim + 1} vertices")
    pts = []
    for i, v in enumerate(verts):
        if not isinstance(v, list) or len(v) != ambient:
            raise SchemaError(f"{ptr}/{i}", f"expected a point with {ambient} coordinates")
        pts.append(tuple(_rational(c, f"{ptr}/{i}/{j}") for j, c in enumerate(v)))
    return Simplex(tuple(pts))


def _terms(lst, ptr: str, group: Group, dim: int, ambient: int, default_dir=None):
    if not isinstance(lst, list):
        raise SchemaError(ptr, "expected a list of terms")
    out = []
    for i, t in enumerate(lst):
        p = f"{ptr}/{i}"
        s = _simplex(_field(t, "vertices", p), f"{p}/vertices", ambient, dim)
        raw = t.get("coeff", 1) if isinstance(t, dict) else 1
        try:
            c = group.coerce(_rational(raw, f"{p}/coeff"))
        except ValueError as e:
            raise SchemaError(f"{p}/coeff", str(e)) from None
        d = default_dir
        if isinstance(t, dict) and "direction" in t:
            dv = t["direction"]
            if not isinstance(dv, list) or not dv:
                raise SchemaError(f"{p}/direction", "expected a nonempty list")
            d = tuple(_rational(x, f"{p}/direction/{j}") for j, x in enumerate(dv))
        out.append((s, c, d))
    return out


def _dims(doc: dict, ptr: str) -> tuple[int, int]:
    dim = _field(doc, "dim", ptr, int)
    ambient = _field(doc, "ambient", ptr, int)
    if dim < 0:
        raise SchemaError(f"{ptr}/dim", "must be nonnegative")
    if ambient < 1 or dim > ambient:
        raise SchemaError(f"{ptr}/ambient", f"need 1 <= ambient and dim <= ambient, got dim={dim}, ambient={ambient}")
    return dim, ambient


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _term_doc(s: Simplex, c, direction=None) -> dict:
    d = {"vertices": [[_q(x) for x in v] for v in s.vertices], "coeff": _q(c)}
    if direction is not None:
        d["direction"] = [_q(x) for x in direction]
    return d


def poly_to_json(p: PolyChain) -> dict:
    return {"kind": "poly", "group": p.group.value, "dim": p.dim, "ambient": p.ambient,
            "terms": [_term_doc(s, c) for s, c in p.terms]}


def dipolyhedron_to_json(d: Dipolyhedron) -> dict:
    def parts(items):
        return [_term_doc(s, c, None if v == E4 else v) for v, p in items for s, c in p.terms]

    return {"kind": "dipolyhedron", "group": d.group.value, "dim": d.dim, "ambient": d.ambient,
            "dipole_terms": parts(d.dipole_parts), "mass_terms": parts(d.mass_parts)}


def poly_from_json(doc: Any, ptr: str = "") -> PolyChain:
    if _field(doc, "kind", ptr, str) != "poly":
        raise SchemaError(f"{ptr}/kind", "expected 'poly'")
    g = _group(doc, ptr)
    dim, ambient = _dims(doc, ptr)
    terms = _terms(_field(doc, "terms", ptr), f"{ptr}/terms", g, dim, ambient)
    return canonicalize([(s, c) for s, c, _ in terms], g, dim, ambient)


def dipolyhedron_from_json(doc: Any, ptr: str = "") -> Dipolyhedron:
    if _field(doc, "kind", ptr, str) != "dipolyhedron":
        raise SchemaError(f"{ptr}/kind", "expected 'dipolyhedron'")
    g = _group(doc, ptr)
    dim, ambient = _dims(doc, ptr)
    default = E4
    if "direction" in doc:
        dv = doc["direction"]
        if not isinstance(dv, list) or not dv:
            raise SchemaError(f"{ptr}/direction", "expected a nonempty list")
        default = tuple(_rational(x, f"{ptr}/direction/{j}") for j, x in enumerate(dv))
    dip = _terms(doc.get("dipole_terms", []), f"{ptr}/dipole_terms", g, dim, ambient, default)
    if dim == 0 and doc.get("mass_terms"):
        raise SchemaError(f"{ptr}/mass_terms", "a 0-dimensional dipolyhedron has no mass part")
    mas = _terms(doc.get("mass_terms", []), f"{ptr}/mass_terms", g, dim - 1, ambient, default) if dim else []

    def group_by(items, k):
        out: dict = {}
        for s, c, v in items:
            out.setdefault(v, []).append((s, c))
        return {v: canonicalize(t, g, k, ambient) for v, t in out.items()}

    return Dipolyhedron.build(dim, ambient, g, group_by(dip, dim), group_by(mas, dim - 1))


def chain_to_json(x) -> dict:
    if isinstance(x, PolyChain):
        return poly_to_json(x)
    if isinstance(x, Dipolyhedron):
        return dipolyhedron_to_json(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def chain_from_json(doc: Any):
    kind = _field(doc, "kind", "", str)
    if kind == "poly":
        return poly_from_json(doc)
    if kind == "dipolyhedron":
        return dipolyhedron_from_json(doc)
    raise SchemaError("/kind", f"unknown kind {kind!r} (expected 'poly' or 'dipolyhedron')")


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("", f"invalid JSON: {e}") from None


def read_chain(path: str):
    with open(path, encoding="utf-8") as fh:
        return chain_from_json(loads(fh.read()))


def write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def read_scaffold(path: str):
    from .flatnorm import Scaffold

    with open(path, encoding="utf-8") as fh:
        doc = loads(fh.read())
    if _field(doc, "kind", "", str) != "scaffold":
        raise SchemaError("/kind", "expected 'scaffold'")
    ambient = _field(doc, "ambient", "", int)
    simp = _field(doc, "simplices", "", dict)
    cells = []
    for k, lst in sorted(simp.items()):
        try:
            dim = int(k)
        except ValueError:
            raise SchemaError(f"/simplices/{k}", "keys must be dimensions") from None
        if not isinstance(lst, list):
            raise SchemaError(f"/simplices/{k}", "expected a list of simplices")
        for i, verts in enumerate(lst):
            cells.append(_simplex(verts, f"/simplices/{k}/{i}", ambient, dim))
    if not cells:
        raise SchemaError("/simplices", "scaffold has no simplices")
    try:
        return Scaffold(cells)
    except ValueError as e:
        raise SchemaError("/simplices", str(e)) from None


def witness_to_json(value: float, B, C) -> dict:
    return {"kind": "witness", "value": value, "B": chain_to_json(B), "C": chain_to_json(C)}


# ---------------------------------------------------------------------------
# OBJ export
# ---------------------------------------------------------------------------

def _xyz(p) -> tuple[float, float, float]:
    c = [float(x) for x in p[:3]]
    return tuple(c + [0.0] * (3 - len(c)))


def to_obj(d: Dipolyhedron | PolyChain) -> str:
    """Wavefront OBJ with separate "dipole" and "mass" groups.

    Triangles become faces, segments line elements, points point elements;
    tetrahedra are written as their four boundary triangles.
    """
    if isinstance(d, PolyChain):
        groups = [("dipole", [d])]
    else:
        groups = [("dipole", [p for _, p in d.dipole_parts]), ("mass", [p for _, p in d.mass_parts])]
    index: dict = {}
    verts: list[str] = []
    body: list[str] = []

    def vid(p) -> int:
        key = _xyz(p)
        if key not in index:
            index[key] = len(index) + 1
            verts.append("v {:.12g} {:.12g} {:.12g}".format(*key))
        return index[key]

    for name, chains in groups:
        body.append(f"g {name}")
        for p in chains:
            for s, _ in p.terms:
                ids = [vid(v) for v in s.vertices]
                if s.dim == 0:
                    body.append(f"p {ids[0]}")
                elif s.dim == 1:
                    body.append(f"l {ids[0]} {ids[1]}")
                elif s.dim == 2:
                    body.append(f"f {ids[0]} {ids[1]} {ids[2]}")
                else:
                    for _, f in s.boundary_faces():
                        if f.dim == 2:
                            body.append("f " + " ".join(str(vid(v)) for v in f.vertices))
    return "\n".join(["# dipolyhedron mesh"] + verts + body) + "\n"


__all__ = ["SchemaError", "ChainError", "chain_from_json", "chain_to_json", "poly_from_json",
           "poly_to_json", "dipolyhedron_from_json", "dipolyhedron_to_json", "dumps", "loads",
           "read_chain", "read_scaffold", "write_json", "witness_to_json", "to_obj"]
