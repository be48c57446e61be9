"""Polyhedral chains with group coefficients in canonical (non-overlapping) form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .coefficients import Group
from .geom import Point, Simplex, as_point, barycentric, cut, facet_hyperplanes, _local_fn, refine

Term = tuple[Simplex, object]


class ChainError(ValueError):
    pass


def canonicalize(terms: Iterable[tuple[Simplex, object]], group: Group,
                 dim: int | None = None, ambient: int | None = None) -> "PolyChain":
    """Reduce a formal sum of simplices to canonical non-overlapping form."""
    acc: dict[Simplex, object] = {}
    for s, g in terms:
        if not isinstance(s, Simplex):
            s = Simplex(tuple(s))
        if dim is None:
            dim = s.dim
        if ambient is None:
            ambient = s.ambient
        if s.dim != dim:
            raise ChainError(f"mixed dimensions: {s.dim} vs {dim}")
        if s.ambient != ambient:
            raise ChainError(f"mixed ambient dimensions: {s.ambient} vs {ambient}")
        g = group.coerce(g)
        if g == 0 or s.is_degenerate:
            continue
        key, sign = s.normalized()
        if sign < 0:
            g = group.neg(g)
        acc[key] = group.add(acc[key], g) if key in acc else g
    if dim is None or ambient is None:
        raise ChainError("cannot infer dimension of an empty formal sum")
    live = sorted(((s, g) for s, g in acc.items() if g != 0), key=lambda t: t[0].vertices)
    if not live:
        return PolyChain(dim, ambient, group)
    out: dict[Simplex, object] = {}
    for piece, tags in refine([(s, i) for i, (s, _) in enumerate(live)]):
        total = group.zero
        for i, sign in tags:
            g = live[i][1]
            total = group.add(total, g if sign > 0 else group.neg(g))
        key, sign = piece.normalized()
        if sign < 0:
            total = group.neg(total)
        out[key] = group.add(out[key], total) if key in out else total
    return PolyChain(dim, ambient, group, tuple(sorted(((s, g) for s, g in out.items() if g != 0), key=lambda t: t[0].vertices)))


@dataclass(frozen=True, eq=False)
class PolyChain:
    """A polyhedral k-chain in R^n; ``terms`` is assumed canonical.

    Build chains through :meth:`from_terms` (or arithmetic), which canonicalizes.
    """

    dim: int
    ambient: int
    group: Group
    terms: tuple[Term, ...] = ()

    @classmethod
    def from_terms(cls, terms: Iterable, group: Group = Group.Z,
                   dim: int | None = None, ambient: int | None = None) -> "PolyChain":
        return canonicalize(terms, group, dim, ambient)

    @classmethod
    def zero(cls, dim: int, ambient: int, group: Group = Group.Z) -> "PolyChain":
        return cls(dim, ambient, group)

    @classmethod
    def simplex(cls, *vertices, coeff=1, group: Group = Group.Z) -> "PolyChain":
        s = Simplex(tuple(vertices))
        return canonicalize([(s, coeff)], group, s.dim, s.ambient)

    # -- arithmetic -------------------------------------------------------
    def _compatible(self, other: "PolyChain"):
        if not isinstance(other, PolyChain):
            raise TypeError(f"expected PolyChain, got {type(other).__name__}")
        if (self.dim, self.ambient, self.group) != (other.dim, other.ambient, other.group):
            raise ChainError(
                f"incompatible chains: (k={self.dim}, n={self.ambient}, {self.group.value}) vs "
                f"(k={other.dim}, n={other.ambient}, {other.group.value})")

    def __add__(self, other: "PolyChain") -> "PolyChain":
        self._compatible(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        return canonicalize(self.terms + other.terms, self.group, self.dim, self.ambient)

    def __neg__(self) -> "PolyChain":
        g = self.group
        return PolyChain(self.dim, self.ambient, g, tuple((s, g.neg(c)) for s, c in self.terms))

    def __sub__(self, other: "PolyChain") -> "PolyChain":
        return self + (-other)

    def scale(self, n) -> "PolyChain":
        g = self.group
        return canonicalize(((s, g.mul(n, c)) for s, c in self.terms), g, self.dim, self.ambient)

    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyChain):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except ChainError:
            return False

    __hash__ = None

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"PolyChain(k={self.dim}, n={self.ambient}, {self.group.value}, {len(self.terms)} terms)"

    def with_group(self, group: Group) -> "PolyChain":
        return canonicalize(((s, group.coerce(c)) for s, c in self.terms), group, self.dim, self.ambient)

    # -- operations -------------------------------------------------------
    def boundary(self) -> "PolyChain":
        if self.dim == 0 or not self.terms:
            return PolyChain(max(self.dim - 1, 0), self.ambient, self.group)
        g = self.group
        faces = []
        for s, c in self.terms:
            neg = g.neg(c)
            for sign, f in s.boundary_faces():
                faces.append((f, c if sign > 0 else neg))
        return canonicalize(faces, g, self.dim - 1, self.ambient)

    def mass(self) -> float:
        g = self.group
        return math.fsum(g.norm(c) * s.measure() for s, c in self.terms)

    def translate(self, v: Sequence) -> "PolyChain":
        w = as_point(v)
        if len(w) != self.ambient:
            raise ChainError(f"translation vector of length {len(w)} in R^{self.ambient}")
        return canonicalize(((s.translate(w), c) for s, c in self.terms), self.group, self.dim, self.ambient)

    def support(self) -> tuple[Simplex, ...]:
        """Closed simplices whose union is |P|."""
        return tuple(s for s, _ in self.terms)

    def indicator(self) -> "PolyChain":
        """Z2 chain with coefficient 1 on every canonical simplex (the support as a chain)."""
        return PolyChain(self.dim, self.ambient, Group.Z2, tuple((s, 1) for s, _ in self.terms))

    def map_simplices(self, fn: Callable[[Simplex], Simplex | None], dim: int | None = None,
                      ambient: int | None = None) -> "PolyChain":
        """Apply fn termwise (None drops the term) and canonicalize."""
        out = []
        for s, c in self.terms:
            img = fn(s)
            if img is not None:
                out.append((img, c))
        return canonicalize(out, self.group, self.dim if dim is None else dim,
                            self.ambient if ambient is None else ambient)


def support_equal(a: PolyChain, b: PolyChain) -> bool:
    """|a| == |b| as point sets (same-dimensional chains)."""
    return (a.indicator() - b.indicator()).is_zero() if a.dim == b.dim else False


def boundary(p: PolyChain) -> PolyChain:
    return p.boundary()


def mass(p: PolyChain) -> float:
    return p.mass()


def translate(p: PolyChain, v: Sequence) -> PolyChain:
    return p.translate(v)


def support(p: PolyChain) -> tuple[Simplex, ...]:
    return p.support()


# ---------------------------------------------------------------------------
# piecewise-linear maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PLMap:
    """Piecewise-linear map: affine on each full-dimensional source simplex."""

    simplices: tuple[Simplex, ...]
    images: dict = field(default_factory=dict)

    def __post_init__(self):
        simplices = tuple(s if isinstance(s, Simplex) else Simplex(tuple(s)) for s in self.simplices)
        if not simplices:
            raise ChainError("a PL map needs at least one source simplex")
        n = simplices[0].ambient
        for s in simplices:
            if s.dim != n or s.ambient != n or s.is_degenerate:
                raise ChainError("PL map source simplices must be nondegenerate and full-dimensional")
        images = {as_point(k): as_point(v) for k, v in self.images.items()}
        for s in simplices:
            for v in s.vertices:
                if v not in images:
                    raise ChainError(f"no image for source vertex {v}")
        dims = {len(v) for v in images.values()}
        if len(dims) != 1:
            raise ChainError("image points must share one ambient dimension")
        object.__setattr__(self, "simplices", simplices)
        object.__setattr__(self, "images", images)

    @classmethod
    def from_function(cls, simplices: Sequence[Simplex], fn: Callable[[Point], Sequence]) -> "PLMap":
        verts = {v for s in simplices for v in Simplex(tuple(s.vertices)).vertices}
        return cls(tuple(simplices), {v: as_point(fn(v)) for v in verts})

    @property
    def source_ambient(self) -> int:
        return self.simplices[0].ambient

    @property
    def target_ambient(self) -> int:
        return len(next(iter(self.images.values())))

    def _locate(self, p: Point) -> Simplex | None:
        for s in self.simplices:
            if s.contains_point(p):
                return s
        return None

    def _affine(self, s: Simplex, p: Point) -> Point:
        lam = barycentric(s, p)
        imgs = [self.images[v] for v in s.vertices]
        return tuple(sum(l * im[i] for l, im in zip(lam, imgs)) for i in range(len(imgs[0])))

    def __call__(self, p: Sequence) -> Point:
        q = as_point(p)
        s = self._locate(q)
        if s is None:
            raise ChainError(f"point {q} outside the PL map's source complex")
        return self._affine(s, q)

    def image_pieces(self, sigma: Simplex) -> list[Simplex]:
        """Images of sigma's pieces, each piece inside a single source simplex."""
        lo, hi = sigma.bbox()
        cutters = []
        seen = set()
        for s in self.simplices:
            slo, shi = s.bbox()
            if any(a > d or b < c for a, b, c, d in zip(lo, hi, slo, shi)):
                continue
            for hp, _ in facet_hyperplanes(s):
                if hp not in seen:
                    seen.add(hp)
                    cutters.append(_local_fn(hp, tuple(range(self.source_ambient))))
        pieces = [sigma.vertices]
        for f in cutters:
            pieces = [q for p in pieces for q in cut(p, f)]
        out = []
        for p in pieces:
            piece = Simplex._make(p)
            if piece.dim > 0 and piece.is_degenerate:
                continue
            host = self._locate(piece.centroid())
            if host is None or not all(host.contains_point(v) for v in p):
                raise ChainError("chain support escapes the PL map's source complex")
            out.append(Simplex._make(tuple(self._affine(host, v) for v in p)))
        return out


def pushforward(f: PLMap, p: PolyChain) -> PolyChain:
    if p.ambient != f.source_ambient:
        raise ChainError(f"chain in R^{p.ambient}, map defined on R^{f.source_ambient}")
    out = []
    for s, c in p.terms:
        for img in f.image_pieces(s):
            out.append((img, c))
    return canonicalize(out, p.group, p.dim, f.target_ambient)
