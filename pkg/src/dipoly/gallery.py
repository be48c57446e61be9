"""Soap-film model gallery.

Each builder returns a :class:`GalleryModel` whose property checks have been
evaluated at build time; :func:`build` refuses to hand out a model whose
checks fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .coefficients import Group
from .dipolyhedra import Dipolyhedron, cone as cone_of, cone_weight_bound, soap_film
from .geom import Simplex, interiors_overlap
from .polychain import ChainError, PolyChain, canonicalize, support_equal

F = Fraction
Z2 = Group.Z2


class ModelCheckError(ChainError):
    pass


@dataclass
class GalleryModel:
    name: str
    D: Dipolyhedron
    checks: dict[str, bool] = field(default_factory=dict)
    values: dict[str, float] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def boundary(self) -> Dipolyhedron:
        return self.D.boundary()

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _chain(tris, group=Z2, dim=None, ambient=None) -> PolyChain:
    return canonicalize([(Simplex(tuple(t)), 1) for t in tris], group, dim, ambient)


def _square(o, a, b):
    """Two triangles of the parallelogram o, o+a, o+a+b, o+b."""
    p = tuple(x + y for x, y in zip(o, a))
    q = tuple(x + y + z for x, y, z in zip(o, a, b))
    r = tuple(x + y for x, y in zip(o, b))
    return [(o, p, q), (o, q, r)]


def _junction_clean(d: Dipolyhedron, junctions: PolyChain) -> bool:
    """No simplex of dD's dipole part meets the interior of a junction cell."""
    bd = d.boundary()
    cells = [s for _, p in bd.dipole_parts for s in p.support()]
    return not any(interiors_overlap(s, t) for s in cells for t in junctions.support())


def _unit_circle(t: Fraction) -> tuple[Fraction, Fraction]:
    return (1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

def dirac(p=F(3, 2)) -> GalleryModel:
    """mu_{e1}{p} on the line; its boundary is the point dipole delta{p}."""
    e1 = (F(1),)
    pt = PolyChain.simplex((p,), group=Group.Z)
    d = Dipolyhedron.mass_of(pt, e1)
    want = Dipolyhedron.dipole(pt, e1)
    return GalleryModel("dirac", d, {"boundary is delta{p}": d.boundary() == want})


def triple_junction(t=F(97, 56)) -> GalleryModel:
    """Three unit sheets around the segment (0,0,0)-(0,1,0), about 120 degrees apart."""
    c, s = _unit_circle(t)  # rational point near (cos 120, sin 120)
    dirs = [(F(1), F(0), F(0)), (c, F(0), s), (c, F(0), -s)]
    o, up = (F(0),) * 3, (F(0), F(1), F(0))
    sheets = [_chain(_square(o, u, up)) for u in dirs]
    tau = _chain([(o, up)])
    d = soap_film(sheets, [tau])
    bd = d.boundary()
    sheet_bd = sum((x.boundary() for x in sheets), PolyChain(1, 3, Z2))
    expected = Dipolyhedron.dipole(sheet_bd + tau) - Dipolyhedron.mass_of(tau.boundary())
    angles = [math.degrees(math.acos(float(sum(a * b for a, b in zip(u, w))) /
                                     math.sqrt(float(sum(x * x for x in u)) * float(sum(x * x for x in w)))))
              for u, w in [(dirs[0], dirs[1]), (dirs[1], dirs[2]), (dirs[2], dirs[0])]]
    return GalleryModel("triple-junction", d,
                        {"junction interior cancels mod 2": _junction_clean(d, tau),
                         "boundary = delta(sum dX + tau) - mu(d tau)": bd == expected,
                         "ddD = 0": bd.boundary().is_zero()},
                        {"angle_max_deviation_deg": max(abs(a - 120) for a in angles)},
                        {"junctions": tau, "sheets": sheets})


def cone(half=1, height=1) -> GalleryModel:
    """Cone from the origin over the square with corners (+-h, +-h, height)."""
    h, z = F(half), F(height)
    pts = [(h, h, z), (-h, h, z), (-h, -h, z), (h, -h, z)]
    gamma = canonicalize([(Simplex((pts[i], pts[(i + 1) % 4])), 1) for i in range(4)], Group.Z, 1, 3)
    apex = (F(0),) * 3
    d = cone_of(gamma, apex)
    w, bound = d.weight(), cone_weight_bound(gamma, apex)
    return GalleryModel("cone", d,
                        {"boundary is delta gamma": d.boundary() == Dipolyhedron.dipole(gamma),
                         "W <= (r/2) M(gamma)": w <= bound * (1 + 1e-12)},
                        {"weight": w, "bound": bound})


def moebius(n: int = 12, radius=2, width=F(1, 2)) -> GalleryModel:
    """MOD2 mass chain mu X over a triangulated Moebius band X."""
    if n < 5:
        raise ValueError("moebius needs at least 5 strips")
    centers, offsets = [], []
    for i in range(n):
        phi_half = math.pi * i / (2 * n)  # half of the half-angle: phi = pi*i/n
        t = F(math.tan(phi_half)).limit_denominator(1000)
        cphi, sphi = _unit_circle(t)  # (cos phi, sin phi), theta = 2 phi
        cth, sth = cphi * cphi - sphi * sphi, 2 * sphi * cphi
        centers.append((radius * cth, radius * sth, F(0)))
        offsets.append((width * cphi * cth, width * cphi * sth, width * sphi))
    a = [tuple(p - q for p, q in zip(c, o)) for c, o in zip(centers, offsets)]
    b = [tuple(p + q for p, q in zip(c, o)) for c, o in zip(centers, offsets)]
    tris = []
    for i in range(n):
        j = (i + 1) % n
        a1, b1 = (a[j], b[j]) if j else (b[0], a[0])  # the half twist
        tris += [(a[i], b[i], b1), (a[i], b1, a1)]
    x = _chain(tris, Z2, 2, 3)
    d = Dipolyhedron.mass_of(x)
    bd = d.boundary()
    rim = x.boundary()
    adj: dict = {}
    for s in rim.support():
        for v in s.vertices:
            adj.setdefault(v, []).append(s)
    seen, stack = set(), [rim.support()[0]] if rim.terms else []
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        for v in s.vertices:
            stack.extend(adj[v])
    band = set(x.support())
    in_band = all(any(all(t.contains_point(v) for v in s.vertices) for t in band) for s in bd.support())
    return GalleryModel("moebius", d,
                        {"boundary = delta X - mu dX": bd == Dipolyhedron.dipole(x) - Dipolyhedron.mass_of(rim),
                         "boundary supported in the band": in_band,
                         "single boundary circle of 2n edges": len(rim) == 2 * n and len(seen) == 2 * n},
                        {"band_area": x.mass(), "rim_length": rim.mass()})


def partial_wire() -> GalleryModel:
    """Film whose boundary is a cycle supported in a proper arc of the wire.

    The wire is the boundary of the unit square X1.  Its right edge is a
    triple junction where X1 meets two cones X2, X3 over a triangular loop.
    """
    o = F(0)
    p00, p10, p11, p01 = (o, o, o), (F(1), o, o), (F(1), F(1), o), (o, F(1), o)
    tip = (F(2), F(1, 2), o)
    x1 = _chain([(p00, p10, p11), (p00, p11, p01)])
    loop = [(p10, p11), (p11, tip), (tip, p10)]
    x2 = _chain([((F(3, 2), F(1, 2), F(1, 2)),) + e for e in loop])
    x3 = _chain([((F(3, 2), F(1, 2), F(-1, 2)),) + e for e in loop])
    tau = _chain([(p10, p11)])
    arc = _chain([(p11, p01), (p01, p00), (p00, p10)])
    d = soap_film([x1, x2, x3], [tau])
    bd = d.boundary()
    want = Dipolyhedron.dipole(arc) - Dipolyhedron.mass_of(arc.boundary())
    on_arc = all(any(all(a.contains_point(v) for v in s.vertices) for a in arc.support())
                 for s in bd.support())
    wire = x1.boundary()
    return GalleryModel("partial-wire", d,
                        {"boundary = delta S - mu dS": bd == want,
                         "ddD = 0": bd.boundary().is_zero(),
                         "boundary inside the wire arc": on_arc,
                         "arc is proper": not support_equal(arc, wire)},
                        extra={"arc": arc, "wire": wire, "junctions": tau})


TETRA = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


def tetrahedral_point() -> GalleryModel:
    """Cone over the tetrahedral 1-skeleton: four junction curves meet at the origin."""
    o = (F(0),) * 3
    vs = [tuple(F(c) for c in v) for v in TETRA]
    tris = [(o, vs[i], vs[j]) for i in range(4) for j in range(i + 1, 4)]
    spokes = _chain([(o, v) for v in vs])
    d = soap_film([_chain(tris)], [spokes])
    cosines = {sum(a * b for a, b in zip(vs[i], vs[j])) / 3 for i in range(4) for j in range(i + 1, 4)}
    skeleton = _chain([(vs[i], vs[j]) for i in range(4) for j in range(i + 1, 4)])
    bd = d.boundary()
    return GalleryModel("tetrahedral-point", d,
                        {"junction interiors cancel mod 2": _junction_clean(d, spokes),
                         "dipole boundary is the 1-skeleton": bd.S == Dipolyhedron.dipole(skeleton),
                         "junction mass cancels at the centre": all(
                             not s.contains_point(o) for _, p in bd.mass_parts for s in p.support()),
                         "spoke angle arccos(-1/3)": cosines == {F(-1, 3)}},
                        {"spoke_angle_deg": math.degrees(math.acos(-1 / 3))})


def double_bubble() -> GalleryModel:
    """Two unit cubes sharing the wall x = 1; closed film with dD = 0."""
    o = F(0)
    e = [(F(1), o, o), (o, F(1), o), (o, o, F(1))]
    faces = []
    for x0 in (0, 1):
        base = (F(x0), o, o)
        for axis in range(3):
            a, b = [e[i] for i in range(3) if i != axis]
            for side in (0, 1):
                corner = tuple(c + side * d for c, d in zip(base, e[axis]))
                if axis == 0 and F(x0 + side) == 1 and x0 == 1:
                    continue  # the wall is listed once
                faces.append(_chain(_square(corner, a, b)))
    wall_pts = [(F(1), o, o), (F(1), F(1), o), (F(1), F(1), F(1)), (F(1), o, F(1))]
    loop = _chain([(wall_pts[i], wall_pts[(i + 1) % 4]) for i in range(4)])
    d = soap_film(faces, [loop])
    s_part = d.S
    t_chain = d.T.mass_chain()
    ds = s_part.boundary().dipole_chain()
    return GalleryModel("double-bubble", d,
                        {"closed: dD = 0": d.boundary().is_zero(),
                         "|T| = |dS|": support_equal(t_chain, ds)},
                        {"sheet_area": d.weight(), "junction_length": d.mass()},
                        {"junctions": loop})


MODELS: dict[str, Callable[[], GalleryModel]] = {
    "dirac": dirac,
    "triple-junction": triple_junction,
    "cone": cone,
    "moebius": moebius,
    "partial-wire": partial_wire,
    "tetrahedral-point": tetrahedral_point,
    "double-bubble": double_bubble,
}


def build(name: str, **params) -> GalleryModel:
    if name not in MODELS:
        raise KeyError(f"unknown model {name!r}; choose from {', '.join(sorted(MODELS))}")
    model = MODELS[name](**params)
    failed = [k for k, ok in model.checks.items() if not ok]
    if failed:
        raise ModelCheckError(f"model {name} fails: {'; '.join(failed)}")
    return model


# ---------------------------------------------------------------------------
# staircase sequences for the semicontinuity experiment
# ---------------------------------------------------------------------------

def staircase_path(i: int, group: Group = Z2) -> PolyChain:
    """Monotone staircase from (0,0) to (1,1) with 2^i steps."""
    if i < 0:
        raise ValueError("steps must be nonnegative")
    m = 2 ** i
    pts = [(F(0), F(0))]
    for a in range(m):
        pts.append((F(a + 1, m), F(a, m)))
        pts.append((F(a + 1, m), F(a + 1, m)))
    return canonicalize([(Simplex((pts[j], pts[j + 1])), 1) for j in range(len(pts) - 1)], group, 1, 2)


def diagonal(group: Group = Z2) -> PolyChain:
    return PolyChain.simplex((0, 0), (1, 1), group=group)


def staircase(i: int, kind: str = "dipole", group: Group = Z2) -> tuple[Dipolyhedron, Dipolyhedron]:
    """(D_i, D): staircase and diagonal as dipole curves, or as mass chains when kind='mass'."""
    wrap = Dipolyhedron.dipole if kind == "dipole" else Dipolyhedron.mass_of
    if kind not in ("dipole", "mass"):
        raise ValueError("kind must be 'dipole' or 'mass'")
    return wrap(staircase_path(i, group)), wrap(diagonal(group))
