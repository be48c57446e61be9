"""Dipole chains, mass chains and dipolyhedra D = S + T.

A dipole k-cell is stored as a k-simplex tagged with a direction v, a mass
k-cell as a (k-1)-simplex tagged with v.  Cells with different directions are
distinct basis elements.  The boundary law is

    d(delta sigma) = delta(d sigma)
    d(mu tau)      = delta tau - mu(d tau)

which is exact on the tags; limits of prisms are only needed for norm
estimates (see :mod:`dipoly.natural_norm`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .coefficients import Group
from .geom import HalfSpace, Point, Simplex, as_point, clip, project as project_simplex
from .polychain import ChainError, PLMap, PolyChain, canonicalize, pushforward as push_chain

Direction = tuple[Fraction, ...]

E4: Direction = (Fraction(0), Fraction(0), Fraction(0), Fraction(1))


def _direction(v) -> Direction:
    return E4 if v is None else as_point(v)


@dataclass(frozen=True, eq=False)
class Dipolyhedron:
    """k-dimensional dipolyhedron with group coefficients.

    ``dipole_parts`` maps directions to k-chains, ``mass_parts`` maps directions
    to (k-1)-chains.  Use :meth:`build` to construct; it drops zero parts.
    """

    dim: int
    ambient: int
    group: Group
    dipole_parts: tuple[tuple[Direction, PolyChain], ...] = ()
    mass_parts: tuple[tuple[Direction, PolyChain], ...] = ()

    @classmethod
    def build(cls, dim: int, ambient: int, group: Group,
              dipole: Mapping[Direction, PolyChain] | None = None,
              mass: Mapping[Direction, PolyChain] | None = None) -> "Dipolyhedron":
        dip, mas = [], []
        for v, p in sorted((dipole or {}).items()):
            if p.is_zero():
                continue
            if (p.dim, p.ambient, p.group) != (dim, ambient, group):
                raise ChainError(f"dipole part has (k={p.dim}, n={p.ambient}, {p.group.value}); "
                                 f"expected (k={dim}, n={ambient}, {group.value})")
            dip.append((v, p))
        for v, p in sorted((mass or {}).items()):
            if p.is_zero():
                continue
            if (p.dim, p.ambient, p.group) != (dim - 1, ambient, group):
                raise ChainError(f"mass part of a {dim}-dipolyhedron must be carried by "
                                 f"{dim - 1}-cells, got k={p.dim}")
            mas.append((v, p))
        return cls(dim, ambient, group, tuple(dip), tuple(mas))

    @classmethod
    def zero(cls, dim: int, ambient: int, group: Group = Group.Z2) -> "Dipolyhedron":
        return cls(dim, ambient, group)

    @classmethod
    def dipole(cls, p: PolyChain, direction=None) -> "Dipolyhedron":
        """delta P for a polyhedral k-chain P."""
        return cls.build(p.dim, p.ambient, p.group, dipole={_direction(direction): p})

    @classmethod
    def mass_of(cls, p: PolyChain, direction=None) -> "Dipolyhedron":
        """mu P: a (k+1)-dimensional mass chain carried by the k-chain P."""
        return cls.build(p.dim + 1, p.ambient, p.group, mass={_direction(direction): p})

    # -- parts ------------------------------------------------------------
    @property
    def directions(self) -> list[Direction]:
        return sorted({v for v, _ in self.dipole_parts} | {v for v, _ in self.mass_parts})

    def dipole_chain(self, direction=None) -> PolyChain:
        v = _direction(direction)
        for w, p in self.dipole_parts:
            if w == v:
                return p
        return PolyChain(self.dim, self.ambient, self.group)

    def mass_chain(self, direction=None) -> PolyChain:
        v = _direction(direction)
        for w, p in self.mass_parts:
            if w == v:
                return p
        return PolyChain(max(self.dim - 1, 0), self.ambient, self.group)

    @property
    def S(self) -> "Dipolyhedron":
        return Dipolyhedron(self.dim, self.ambient, self.group, self.dipole_parts, ())

    @property
    def T(self) -> "Dipolyhedron":
        return Dipolyhedron(self.dim, self.ambient, self.group, (), self.mass_parts)

    # -- arithmetic -------------------------------------------------------
    def _compatible(self, other: "Dipolyhedron"):
        if (self.dim, self.ambient, self.group) != (other.dim, other.ambient, other.group):
            raise ChainError(
                f"incompatible dipolyhedra: (k={self.dim}, n={self.ambient}, {self.group.value}) vs "
                f"(k={other.dim}, n={other.ambient}, {other.group.value})")

    def __add__(self, other: "Dipolyhedron") -> "Dipolyhedron":
        self._compatible(other)
        dip = dict(self.dipole_parts)
        for v, p in other.dipole_parts:
            dip[v] = dip[v] + p if v in dip else p
        mas = dict(self.mass_parts)
        for v, p in other.mass_parts:
            mas[v] = mas[v] + p if v in mas else p
        return Dipolyhedron.build(self.dim, self.ambient, self.group, dip, mas)

    def __neg__(self) -> "Dipolyhedron":
        return Dipolyhedron(self.dim, self.ambient, self.group,
                            tuple((v, -p) for v, p in self.dipole_parts),
                            tuple((v, -p) for v, p in self.mass_parts))

    def __sub__(self, other: "Dipolyhedron") -> "Dipolyhedron":
        return self + (-other)

    def scale(self, n) -> "Dipolyhedron":
        return Dipolyhedron.build(self.dim, self.ambient, self.group,
                                  {v: p.scale(n) for v, p in self.dipole_parts},
                                  {v: p.scale(n) for v, p in self.mass_parts})

    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.dipole_parts and not self.mass_parts

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dipolyhedron):
            return NotImplemented
        if (self.dim, self.ambient, self.group) != (other.dim, other.ambient, other.group):
            return self.is_zero() and other.is_zero()
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        ns = sum(len(p) for _, p in self.dipole_parts)
        nt = sum(len(p) for _, p in self.mass_parts)
        return (f"Dipolyhedron(k={self.dim}, n={self.ambient}, {self.group.value}, "
                f"{ns} dipole cells, {nt} mass cells)")

    def map_parts(self, fn, dim: int | None = None, ambient: int | None = None) -> "Dipolyhedron":
        """Apply a PolyChain -> PolyChain map to every part."""
        return Dipolyhedron.build(self.dim if dim is None else dim,
                                  self.ambient if ambient is None else ambient, self.group,
                                  {v: fn(p) for v, p in self.dipole_parts},
                                  {v: fn(p) for v, p in self.mass_parts})

    # -- functionals ------------------------------------------------------
    def weight(self) -> float:
        return math.fsum(p.mass() for _, p in self.dipole_parts)

    def mass(self) -> float:
        return math.fsum(p.mass() for _, p in self.mass_parts)

    def energy(self) -> float:
        return self.weight() + self.mass()

    def support(self) -> tuple[Simplex, ...]:
        return tuple(s for _, p in self.dipole_parts + self.mass_parts for s in p.support())

    def boundary(self) -> "Dipolyhedron":
        k = self.dim
        if k == 0:
            return Dipolyhedron(0, self.ambient, self.group)
        dip: dict[Direction, PolyChain] = {}
        mas: dict[Direction, PolyChain] = {}
        for v, p in self.dipole_parts:
            dip[v] = p.boundary()
        for v, t in self.mass_parts:
            # d(mu tau) = delta tau - mu(d tau)
            dip[v] = dip[v] + t if v in dip else t
            if k >= 2:
                mas[v] = -t.boundary()
        return Dipolyhedron.build(k - 1, self.ambient, self.group, dip, mas)


# ---------------------------------------------------------------------------
# functionals as functions
# ---------------------------------------------------------------------------

def boundary(d: Dipolyhedron) -> Dipolyhedron:
    return d.boundary()


def weight(d: Dipolyhedron) -> float:
    return d.weight()


def mass(d: Dipolyhedron) -> float:
    return d.mass()


def energy(d: Dipolyhedron) -> float:
    return d.energy()


# ---------------------------------------------------------------------------
# intersections, slices, projections
# ---------------------------------------------------------------------------

def clip_chain(p: PolyChain, h: HalfSpace) -> PolyChain:
    if h.axis > p.ambient:
        raise ChainError(f"half space axis {h.axis} outside R^{p.ambient}")
    return canonicalize(((piece, c) for s, c in p.terms for piece in clip(s, h)),
                        p.group, p.dim, p.ambient)


def intersect_halfspace(d: Dipolyhedron, h: HalfSpace) -> Dipolyhedron:
    return d.map_parts(lambda p: clip_chain(p, h))


@dataclass(frozen=True)
class Cube:
    """Open axis-aligned box prod (lo_i, hi_i)."""

    lo: Point
    hi: Point

    def __post_init__(self):
        lo, hi = as_point(self.lo), as_point(self.hi)
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("cube needs lo < hi in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def halfspaces(self) -> list[HalfSpace]:
        out = []
        for i, (a, b) in enumerate(zip(self.lo, self.hi), start=1):
            out.append(HalfSpace(i, a, "upper"))
            out.append(HalfSpace(i, b, "lower"))
        return out


def intersect_cube(d: Dipolyhedron, q: Cube) -> Dipolyhedron:
    for h in q.halfspaces():
        d = intersect_halfspace(d, h)
    return d


def slice(d: Dipolyhedron, h: HalfSpace) -> Dipolyhedron:  # noqa: A001 - matches the math name
    """D_s = d(D cap H) - (dD) cap H."""
    return intersect_halfspace(d, h).boundary() - intersect_halfspace(d.boundary(), h)


def slice_chain(p: PolyChain, h: HalfSpace) -> PolyChain:
    return clip_chain(p, h).boundary() - clip_chain(p.boundary(), h)


def project_chain(p: PolyChain, axes: Sequence[int]) -> PolyChain:
    return p.map_simplices(lambda s: project_simplex(s, axes))


def project(d: Dipolyhedron, axes: Sequence[int], part: str = "both") -> Dipolyhedron:
    """Orthogonal projection onto a coordinate plane; degenerate images vanish.

    ``part`` selects which part is projected ("both", "dipole" or "mass"); the
    other part is dropped.
    """
    if part not in ("both", "dipole", "mass"):
        raise ValueError(f"part must be 'both', 'dipole' or 'mass', got {part!r}")
    dip = {v: project_chain(p, axes) for v, p in d.dipole_parts} if part != "mass" else {}
    mas = {v: project_chain(p, axes) for v, p in d.mass_parts} if part != "dipole" else {}
    return Dipolyhedron.build(d.dim, d.ambient, d.group, dip, mas)


def pushforward(f: PLMap, d: Dipolyhedron) -> Dipolyhedron:
    return d.map_parts(lambda p: push_chain(f, p), ambient=f.target_ambient)


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def cone(gamma: PolyChain, apex: Sequence, direction=None) -> Dipolyhedron:
    """delta of the cone from ``apex`` over a polygonal 1-cycle."""
    a = as_point(apex)
    if gamma.dim != 1:
        raise ChainError("cone needs a 1-chain")
    if gamma.is_zero():
        raise ChainError("cone over the zero chain (degenerate polygon)")
    if not gamma.boundary().is_zero():
        raise ChainError("cone needs a cycle")
    tris = []
    for s, c in gamma.terms:
        if s.contains_point(a):
            raise ChainError(f"apex {a} lies on the curve")
        t = Simplex((a,) + s.vertices)
        if t.is_degenerate:
            raise ChainError("degenerate cone: apex collinear with a curve segment")
        tris.append((t, c))
    return Dipolyhedron.dipole(canonicalize(tris, gamma.group, 2, gamma.ambient), direction)


def cone_radius(gamma: PolyChain, apex: Sequence) -> float:
    a = as_point(apex)
    return max(math.sqrt(sum((x - y) ** 2 for x, y in zip(v, a)))
               for s in gamma.support() for v in s.vertices)


def cone_weight_bound(gamma: PolyChain, apex: Sequence) -> float:
    """(r/2) M(gamma) with r the largest apex-to-vertex distance."""
    return cone_radius(gamma, apex) / 2 * gamma.mass()


class JunctionParityError(ChainError):
    pass


def soap_film(sheets: Iterable[PolyChain], junctions: Iterable[PolyChain],
              group: Group = Group.Z2, direction=None) -> Dipolyhedron:
    """D(X) = sum delta X_j + sum mu tau_j.

    Every junction must be covered by an odd number of sheet boundaries so the
    mod 2 boundary residue of the sheets cancels against delta tau.
    """
    sheets = [p.with_group(group) for p in sheets]
    junctions = [p.with_group(group) for p in junctions]
    if not sheets:
        raise ChainError("soap film needs at least one sheet")
    k, n = sheets[0].dim, sheets[0].ambient
    residue = PolyChain(k - 1, n, Group.Z2)
    for x in sheets:
        residue = residue + x.with_group(Group.Z2).boundary()
    for j in junctions:
        residue = residue + j.with_group(Group.Z2)
    from .geom import interiors_overlap

    for j in junctions:
        for tau in j.support():
            for r in residue.support():
                if interiors_overlap(tau, r):
                    raise JunctionParityError(
                        f"junction cell {tau.vertices} is not covered by an odd number of sheets")
    v = _direction(direction)
    dip = PolyChain(k, n, group)
    for x in sheets:
        dip = dip + x
    mas = PolyChain(k - 1, n, group)
    for j in junctions:
        mas = mas + j
    return Dipolyhedron.build(k, n, group, {v: dip}, {v: mas})
