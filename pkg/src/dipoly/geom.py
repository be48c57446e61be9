"""Exact rational geometry kernel.

Oriented simplices with rational vertices, Hausdorff measure, clipping by
axis-aligned half spaces, common refinement of overlapping simplices and
orthogonal projection onto coordinate planes.  All predicates are exact;
only measures are evaluated in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Hashable, Iterable, Sequence

Point = tuple[Fraction, ...]

MAX_AMBIENT = 4


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def as_point(coords: Iterable) -> Point:
    return tuple(to_fraction(c) for c in coords)


# ---------------------------------------------------------------------------
# small exact linear algebra
# ---------------------------------------------------------------------------

def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return Fraction(1)
    out = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            out = -out
        p = m[col][col]
        out *= p
        for r in range(col + 1, n):
            f = m[r][col]
            if f:
                f = f / p
                row_c = m[col]
                m[r] = [a - f * b for a, b in zip(m[r], row_c)]
    return out


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[tuple[Fraction, ...]], list[int]]:
    """Reduced row echelon form; returns nonzero rows and pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncol = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [a / p for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncol: int) -> list[tuple[Fraction, ...]]:
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncol) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncol
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction] | None:
    """Solve a square system exactly; None when singular."""
    n = len(a)
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def _sub(p: Point, q: Point) -> Point:
    return tuple(a - b for a, b in zip(p, q))


# ---------------------------------------------------------------------------
# simplices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Simplex:
    """Oriented simplex; orientation is carried by the vertex order."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        if not verts:
            raise ValueError("a simplex needs at least one vertex")
        n = len(verts[0])
        if n < 1 or n > MAX_AMBIENT or any(len(v) != n for v in verts):
            raise ValueError(f"inconsistent ambient dimension in {self.vertices!r}")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def _make(cls, verts: tuple[Point, ...]) -> "Simplex":
        obj = object.__new__(cls)
        object.__setattr__(obj, "vertices", verts)
        return obj

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def ambient(self) -> int:
        return len(self.vertices[0])

    @cached_property
    def edges(self) -> list[Point]:
        v0 = self.vertices[0]
        return [_sub(v, v0) for v in self.vertices[1:]]

    @cached_property
    def gram_det(self) -> Fraction:
        e = self.edges
        return det([[sum(a * b for a, b in zip(x, y)) for y in e] for x in e])

    @property
    def is_degenerate(self) -> bool:
        return self.dim > 0 and self.gram_det == 0

    def measure(self) -> float:
        k = self.dim
        if k == 0:
            return 1.0
        g = self.gram_det
        if g <= 0:
            return 0.0
        return math.sqrt(g) / math.factorial(k)

    @cached_property
    def plane(self) -> tuple:
        """Hashable key of the affine hull: (direction rref, pivots, offset)."""
        rows, pivots = rref(self.edges) if self.dim else ([], [])
        x = list(self.vertices[0])
        for row, p in zip(rows, pivots):
            f = x[p]
            if f:
                x = [a - f * b for a, b in zip(x, row)]
        return (tuple(rows), tuple(pivots), tuple(x))

    @property
    def pivots(self) -> tuple[int, ...]:
        return self.plane[1]

    def local(self, p: Point) -> Point:
        return tuple(p[i] for i in self.pivots)

    @cached_property
    def orientation(self) -> int:
        """Sign of the simplex inside its own plane (local pivot coordinates)."""
        if self.dim == 0:
            return 1
        piv = self.pivots
        d = det([[e[i] for i in piv] for e in self.edges])
        return 1 if d > 0 else -1 if d < 0 else 0

    def normalized(self) -> tuple["Simplex", int]:
        """Sorted-vertex representative and the permutation sign."""
        verts = self.vertices
        order = sorted(range(len(verts)), key=lambda i: verts[i])
        return Simplex._make(tuple(verts[i] for i in order)), _perm_sign(order)

    def boundary_faces(self) -> list[tuple[int, "Simplex"]]:
        if self.dim == 0:
            return []
        verts = self.vertices
        return [((-1) ** i, Simplex._make(verts[:i] + verts[i + 1:])) for i in range(len(verts))]

    def translate(self, v: Sequence) -> "Simplex":
        w = as_point(v)
        return Simplex._make(tuple(tuple(a + b for a, b in zip(p, w)) for p in self.vertices))

    def centroid(self) -> Point:
        n = len(self.vertices)
        return tuple(sum(c) / n for c in zip(*self.vertices))

    def bbox(self) -> tuple[Point, Point]:
        cols = list(zip(*self.vertices))
        return tuple(min(c) for c in cols), tuple(max(c) for c in cols)

    def contains_point(self, p: Point, strict: bool = False) -> bool:
        """Closed (or relatively open) containment test."""
        bary = barycentric(self, p)
        if bary is None:
            return False
        if strict:
            return all(b > 0 for b in bary)
        return all(b >= 0 for b in bary)


def _perm_sign(order: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def barycentric(s: Simplex, p: Point) -> list[Fraction] | None:
    """Barycentric coordinates of p with respect to s, or None if p is off its plane."""
    if s.dim == 0:
        return [Fraction(1)] if p == s.vertices[0] else None
    rows, pivots, offset = s.plane
    x = list(p)
    for row, piv in zip(rows, pivots):
        f = x[piv]
        if f:
            x = [a - f * b for a, b in zip(x, row)]
    if tuple(x) != offset:
        return None
    y0 = s.local(s.vertices[0])
    cols = [s.local(e) for e in s.edges]
    a = [[cols[j][i] for j in range(len(cols))] for i in range(len(pivots))]
    rhs = [a_ - b_ for a_, b_ in zip(s.local(p), y0)]
    lam = solve(a, rhs)
    if lam is None:
        return None
    return [1 - sum(lam)] + lam


def relative_orientation(a: Simplex, b: Simplex) -> int:
    """+1 if two simplices of one plane are equally oriented, -1 otherwise."""
    return a.orientation * b.orientation


# ---------------------------------------------------------------------------
# half spaces and clipping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfSpace:
    """{x : x[axis] < threshold} (side="lower") or {x : x[axis] > threshold}.

    ``axis`` is 1-based.  ``closed`` turns the strict inequality into a weak one;
    the complement of an open half space is closed.
    """

    axis: int
    threshold: Fraction
    side: str = "lower"
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "threshold", to_fraction(self.threshold))
        if self.side not in ("lower", "upper"):
            raise ValueError(f"side must be 'lower' or 'upper', got {self.side!r}")
        if self.axis < 1:
            raise ValueError("axis is 1-based")

    def complement(self) -> "HalfSpace":
        return HalfSpace(self.axis, self.threshold,
                         "upper" if self.side == "lower" else "lower", not self.closed)

    def value(self, p: Point) -> Fraction:
        d = p[self.axis - 1] - self.threshold
        return d if self.side == "lower" else -d

    def contains(self, p: Point) -> bool:
        v = self.value(p)
        return v <= 0 if self.closed else v < 0


def cut(verts: tuple[Point, ...], f: Callable[[Point], Fraction]) -> list[tuple[Point, ...]]:
    """Split a simplex by the zero set of an affine function via edge bisection.

    Every returned piece has all vertex values of one sign (zero allowed) and
    inherits the orientation of the input.
    """
    vals = [f(v) for v in verts]
    n = len(verts)
    for i in range(n):
        vi = vals[i]
        if vi == 0:
            continue
        for j in range(i + 1, n):
            vj = vals[j]
            if (vi < 0 < vj) or (vj < 0 < vi):
                t = vi / (vi - vj)
                m = tuple(a + t * (b - a) for a, b in zip(verts[i], verts[j]))
                left = verts[:j] + (m,) + verts[j + 1:]
                right = verts[:i] + (m,) + verts[i + 1:]
                return cut(left, f) + cut(right, f)
    return [verts]


def clip(s: Simplex, h: HalfSpace) -> list[Simplex]:
    """Triangulation of s intersected with h, orientations inherited from s."""
    if s.dim == 0:
        return [s] if h.contains(s.vertices[0]) else []
    out = []
    for piece in cut(s.vertices, h.value):
        vals = [h.value(p) for p in piece]
        if any(v > 0 for v in vals):
            continue
        if not h.closed and all(v == 0 for v in vals):
            continue
        out.append(Simplex._make(piece))
    return out


def project(s: Simplex, axes: Iterable[int]) -> Simplex | None:
    """Orthogonal projection onto the coordinate plane spanned by ``axes`` (1-based).

    Coordinates off the plane are set to zero so the ambient space is kept.
    Returns None when the image is degenerate (the zero chain downstream).
    """
    keep = {a - 1 for a in axes}
    if any(a < 0 or a >= s.ambient for a in keep):
        raise ValueError(f"axes {sorted(a + 1 for a in keep)} outside R^{s.ambient}")
    zero = Fraction(0)
    img = Simplex._make(tuple(tuple(c if i in keep else zero for i, c in enumerate(p))
                              for p in s.vertices))
    return None if img.is_degenerate else img


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

Hyperplane = tuple[tuple[Fraction, ...], Fraction]


def _hyperplane_through(pts: Sequence[Point], k: int) -> Hyperplane:
    """Normalized local hyperplane a.y = b through k points of Q^k."""
    y0 = pts[0]
    rows = [_sub(p, y0) for p in pts[1:]]
    a = nullspace(rows, k)[0]
    lead = next(x for x in a if x != 0)
    a = tuple(x / lead for x in a)
    return a, sum(x * y for x, y in zip(a, y0))


@lru_cache(maxsize=1 << 16)
def facet_hyperplanes(s: Simplex) -> tuple[tuple[Hyperplane, int], ...]:
    """Facet hyperplanes in local coordinates with the sign of the interior side."""
    k = s.dim
    loc = [s.local(v) for v in s.vertices]
    out = []
    for i in range(k + 1):
        hp = _hyperplane_through(loc[:i] + loc[i + 1:], k)
        a, b = hp
        side = sum(x * y for x, y in zip(a, loc[i])) - b
        out.append((hp, 1 if side > 0 else -1))
    return tuple(out)


def _local_fn(hp: Hyperplane, pivots: Sequence[int]) -> Callable[[Point], Fraction]:
    a, b = hp
    pairs = [(x, p) for x, p in zip(a, pivots) if x != 0]

    def f(v: Point) -> Fraction:
        return sum(x * v[p] for x, p in pairs) - b

    return f


def _projections(loc: Sequence[Point], axis: Sequence[Fraction]) -> tuple[Fraction, Fraction]:
    vals = [sum(x * y for x, y in zip(axis, v) if x) for v in loc]
    return min(vals), max(vals)


def _cross3(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def interiors_overlap(a: Simplex, b: Simplex) -> bool:
    """Exact test whether two k-simplices share interior points (k-dim overlap)."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if a.plane != b.plane:
        return a.dim == 0 and a.vertices == b.vertices
    k = a.dim
    if k == 0:
        return True
    if k <= 3:
        axes = [hp[0] for hp, _ in facet_hyperplanes(a)] + [hp[0] for hp, _ in facet_hyperplanes(b)]
        if k == 3:
            ea = [a.local(e) for e in _all_edges(a)]
            eb = [b.local(e) for e in _all_edges(b)]
            for u in ea:
                for v in eb:
                    c = _cross3(u, v)
                    if any(c):
                        axes.append(c)
        loc_a = [a.local(v) for v in a.vertices]
        loc_b = [b.local(v) for v in b.vertices]
        for ax in axes:
            lo_a, hi_a = _projections(loc_a, ax)
            lo_b, hi_b = _projections(loc_b, ax)
            if max(lo_a, lo_b) >= min(hi_a, hi_b):
                return False
        return True
    pieces = [a.vertices]
    facets = facet_hyperplanes(b)
    for hp, _ in facets:
        f = _local_fn(hp, a.pivots)
        pieces = [q for p in pieces for q in cut(p, f)]
    for p in pieces:
        c = Simplex._make(p).centroid()
        if all(_local_fn(hp, a.pivots)(c) * side > 0 for hp, side in facets):
            return True
    return False


def _all_edges(s: Simplex) -> list[Point]:
    v = s.vertices
    return [_sub(v[j], v[i]) for i in range(len(v)) for j in range(i + 1, len(v))]


def _overlap_pairs(simplices: Sequence[Simplex]) -> list[tuple[int, int]]:
    """Candidate pairs via a sweep over the first local coordinate, then exact tests."""
    boxes = []
    for s in simplices:
        loc = [s.local(v) for v in s.vertices]
        cols = list(zip(*loc))
        boxes.append((tuple(min(c) for c in cols), tuple(max(c) for c in cols)))
    order = sorted(range(len(simplices)), key=lambda i: boxes[i][0][0])
    active: list[int] = []
    pairs = []
    for i in order:
        lo_i, hi_i = boxes[i]
        active = [j for j in active if boxes[j][1][0] > lo_i[0]]
        for j in active:
            lo_j, hi_j = boxes[j]
            if all(max(x, y) < min(u, w) for x, y, u, w in zip(lo_i, lo_j, hi_i, hi_j)):
                if interiors_overlap(simplices[i], simplices[j]):
                    pairs.append((min(i, j), max(i, j)))
        active.append(i)
    return pairs


def refine(cells: Sequence[tuple[Simplex, Hashable]]) -> list[tuple[Simplex, list[tuple[Hashable, int]]]]:
    """Common refinement of same-dimension simplices.

    Returns pairwise non-overlapping simplices, each with the tags of the input
    cells covering it and the relative orientation (+1/-1) of each such cell.
    Degenerate inputs are dropped.  Non-overlapping inputs pass through unchanged.
    """
    if not cells:
        return []
    dims = {s.dim for s, _ in cells}
    if len(dims) != 1:
        raise ValueError(f"refine needs cells of one dimension, got {sorted(dims)}")
    ambients = {s.ambient for s, _ in cells}
    if len(ambients) != 1:
        raise ValueError(f"refine needs one ambient dimension, got {sorted(ambients)}")
    live = [(s, t) for s, t in cells if not s.is_degenerate]
    groups: dict[tuple, list[int]] = {}
    for i, (s, _) in enumerate(live):
        groups.setdefault(s.plane, []).append(i)
    out: list[tuple[Simplex, list[tuple[Hashable, int]]]] = []
    for idx in groups.values():
        if len(idx) == 1:
            s, t = live[idx[0]]
            out.append((s, [(t, 1)]))
            continue
        parent = {i: i for i in idx}

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in _overlap_pairs([live[i][0] for i in idx]):
            ra, rb = find(idx[a]), find(idx[b])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        clusters: dict[int, list[int]] = {}
        for i in idx:
            clusters.setdefault(find(i), []).append(i)
        for members in clusters.values():
            if len(members) == 1:
                s, t = live[members[0]]
                out.append((s, [(t, 1)]))
            else:
                out.extend(_refine_cluster([live[i] for i in members]))
    return out


def _affine_rank(pts: Sequence[Point]) -> int:
    if len(pts) <= 1:
        return 0
    return len(rref([_sub(p, pts[0]) for p in pts[1:]])[1])


def _pull(verts: list[Point], d: int, fns) -> list[tuple[Point, ...]]:
    """Pulling triangulation of the convex polytope conv(verts) of dimension d.

    Every face of the polytope lies on one of the hyperplanes ``fns``; the
    polytope is coned from its least vertex over its facets not containing it.
    """
    if d == 0:
        return [(verts[0],)]
    v0 = min(verts)
    out: list[tuple[Point, ...]] = []
    seen = set()
    for f in fns:
        vals = [f(v) for v in verts]
        if any(x > 0 for x in vals) and any(x < 0 for x in vals):
            continue
        on = [v for v, x in zip(verts, vals) if x == 0]
        key = frozenset(on)
        if v0 in key or key in seen or len(on) < d or _affine_rank(on) != d - 1:
            continue
        seen.add(key)
        out.extend((v0,) + t for t in _pull(sorted(on), d - 1, fns))
    return out


def _boxes_meet(a, b) -> bool:
    return all(max(x, y) < min(u, w) for x, y, u, w in zip(a[0], b[0], a[1], b[1]))


class _Polytope:
    """Convex k-polytope in a fixed k-plane: its vertices and the half-space
    constraints (local hyperplane, interior side) bounding it."""

    __slots__ = ("pts", "cons", "box")

    def __init__(self, pts, cons, pivots):
        self.pts = pts
        self.cons = cons
        self.box = (tuple(min(v[p] for v in pts) for p in pivots),
                    tuple(max(v[p] for v in pts) for p in pivots))


class _Overlay:
    def __init__(self, k: int, pivots: Sequence[int]):
        self.k, self.pivots = k, tuple(pivots)
        self._fns: dict = {}

    def fn(self, hp):
        if hp not in self._fns:
            self._fns[hp] = _local_fn(hp, self.pivots)
        return self._fns[hp]

    def make(self, pts, cons) -> _Polytope | None:
        """Polytope from a point superset of its vertices; None if not full-dimensional."""
        pts = sorted(set(pts))
        if len(pts) <= self.k or _affine_rank(pts) < self.k:
            return None
        keep = []
        for p in pts:
            normals = [hp[0] for hp, _ in cons if self.fn(hp)(p) == 0]
            if len(normals) >= self.k and len(rref(normals)[1]) == self.k:
                keep.append(p)
        return _Polytope(tuple(keep), cons, self.pivots)

    def halves(self, poly: _Polytope, hp, side: int):
        """(part on the interior side of (hp, side), part on the other side)."""
        f = self.fn(hp)
        vals = [f(p) for p in poly.pts]
        if all(v * side >= 0 for v in vals):
            return poly, None
        if all(v * side <= 0 for v in vals):
            return None, poly
        pos = [(p, v) for p, v in zip(poly.pts, vals) if v * side > 0]
        neg = [(p, v) for p, v in zip(poly.pts, vals) if v * side < 0]
        zero = [p for p, v in zip(poly.pts, vals) if v == 0]
        cross = []
        for p, vp in pos:
            for q, vq in neg:
                t = vp / (vp - vq)
                cross.append(tuple(a + t * (b - a) for a, b in zip(p, q)))
        inner = self.make([p for p, _ in pos] + zero + cross, poly.cons + ((hp, side),))
        outer = self.make([p for p, _ in neg] + zero + cross, poly.cons + ((hp, -side),))
        return inner, outer

    def split(self, poly: _Polytope, facets):
        """Part of poly inside the convex cell with the given facets, and the rest."""
        inside, outside = poly, []
        for hp, side in facets:
            inside, out = self.halves(inside, hp, side)
            if out is not None:
                outside.append(out)
            if inside is None:
                break
        return inside, outside

    def triangulate(self, poly: _Polytope) -> list[tuple[Point, ...]]:
        """Positively oriented simplices of a pulling triangulation."""
        fns = [self.fn(hp) for hp in dict.fromkeys(hp for hp, _ in poly.cons)]
        out = []
        for t in _pull(list(poly.pts), self.k, fns):
            v0 = t[0]
            if det([[v[p] - v0[p] for p in self.pivots] for v in t[1:]]) < 0:
                t = (t[1], t[0]) + t[2:]
            out.append(t)
        return out


def _refine_cluster(members: list[tuple[Simplex, Hashable]]):
    """Overlay of coplanar simplices, one member at a time.

    Regions stay convex polytopes while they are cut and are triangulated once
    at the end, which keeps the number of output simplices small.
    """
    first = members[0][0]
    k, pivots = first.dim, first.pivots
    if k == 0:
        return [(first, [(t, 1) for _, t in members])]
    ov = _Overlay(k, pivots)
    cur: list[tuple[_Polytope, frozenset]] = []
    for m, (s, _) in enumerate(members):
        facets = tuple(facet_hyperplanes(s))
        poly = ov.make(s.vertices, facets)
        remainder = [poly]
        nxt = []
        for region, ms in cur:
            inside = None
            if _boxes_meet(region.box, poly.box):
                inside, outside = ov.split(region, facets)
            if inside is None:
                nxt.append((region, ms))
                continue
            nxt.extend((q, ms) for q in outside)
            nxt.append((inside, ms | {m}))
            rem = []
            for r in remainder:
                if not _boxes_meet(r.box, region.box):
                    rem.append(r)
                    continue
                r_in, r_out = ov.split(r, region.cons)
                rem.extend([r] if r_in is None else r_out)
            remainder = rem
        nxt.extend((r, frozenset({m})) for r in remainder)
        cur = nxt
    out = []
    for region, ms in cur:
        tags = [(members[j][1], members[j][0].orientation) for j in sorted(ms)]
        for t in ov.triangulate(region):
            out.append((Simplex._make(t), tags))
    return out
