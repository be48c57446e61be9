"""Experiment drivers: Fubini quadrature, Cartan decay tables, semicontinuity."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

from .dipolyhedra import Dipolyhedron, slice as slice_dipolyhedron
from .geom import HalfSpace, Simplex, clip
from .natural_norm import (DegenerateDirectionWarning, cartan_residual, cauchy_bound, cauchy_gap)
from .polychain import PolyChain, canonicalize

REL_TOL = 1e-6


# ---------------------------------------------------------------------------
# Fubini
# ---------------------------------------------------------------------------

def slice_values(d: Dipolyhedron, axis: int, s) -> tuple[float, float, float]:
    """(W(S_s), M(T_s), E(D_s)) for the slice at x_axis = s."""
    ds = slice_dipolyhedron(d, HalfSpace(axis, Fraction(s), "lower"))
    return ds.weight(), ds.mass(), ds.energy()


def _generic_slice_chain(p: PolyChain, axis: int, s: Fraction) -> PolyChain:
    """Slice of a chain at a height s carrying no vertex.

    There d(P cap H) - (dP) cap H is exactly the set of faces of the clipped
    cells that lie in the plane x_axis = s.
    """
    g, k = p.group, p.dim
    if k == 0:
        return PolyChain(0, p.ambient, g)
    h = HalfSpace(axis, s, "lower")
    terms = []
    for simplex, c in p.terms:
        for piece in clip(simplex, h):
            for sign, face in piece.boundary_faces():
                if all(v[axis - 1] == s for v in face.vertices):
                    terms.append((face, g.mul(sign, c)))
    return canonicalize(terms, g, k - 1, p.ambient) if terms else PolyChain(k - 1, p.ambient, g)


def generic_slice_values(d: Dipolyhedron, axis: int, s) -> tuple[float, float, float]:
    """slice_values for s strictly between vertex heights; D_s = delta(S_s) - mu(P_s) for T = mu P."""
    s = Fraction(s)
    w = math.fsum(_generic_slice_chain(p, axis, s).mass() for _, p in d.dipole_parts)
    m = math.fsum(_generic_slice_chain(p, axis, s).mass() for _, p in d.mass_parts)
    return w, m, w + m


def _breakpoints(d: Dipolyhedron, axis: int) -> list[Fraction]:
    return sorted({v[axis - 1] for s in d.support() for v in s.vertices})


def _lagrange(xs: Sequence[float], ys: Sequence[float], x: float) -> float:
    total = 0.0
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        w = 1.0
        for j, xj in enumerate(xs):
            if j != i:
                w *= (x - xj) / (xi - xj)
        total += w * yi
    return total


class _Integrand:
    """s -> slice values, reconstructed exactly as a piecewise polynomial.

    Between consecutive vertex coordinates every slice functional is a
    polynomial of degree <= k-1 in s.  It is fitted from k exact slices per
    interval and confirmed at one further exact slice.
    """

    def __init__(self, d: Dipolyhedron, axis: int):
        self.d, self.axis = d, axis
        self.breaks = _breakpoints(d, axis)
        self._break_set = set(self.breaks)
        self.exact_evaluations = 0
        self._cache: dict[Fraction, tuple[float, float, float]] = {}
        self.pieces = []
        deg = max(d.dim - 1, 0)
        for a, b in zip(self.breaks, self.breaks[1:]):
            nodes = [a + (b - a) * Fraction(i + 1, deg + 3) for i in range(deg + 2)]
            vals = [self.exact(x) for x in nodes]
            fit, check = nodes[:-1], nodes[-1]
            for c in range(3):
                pred = _lagrange([float(x) for x in fit], [v[c] for v in vals[:-1]], float(check))
                scale = max(1.0, abs(vals[-1][c]))
                if abs(pred - vals[-1][c]) > 1e-9 * scale:
                    raise ArithmeticError(f"slice functional is not polynomial on ({a}, {b})")
            self.pieces.append((a, b, [float(x) for x in fit], vals[:-1]))

    def exact(self, s: Fraction) -> tuple[float, float, float]:
        if s not in self._cache:
            self.exact_evaluations += 1
            slicer = slice_values if s in self._break_set else generic_slice_values
            self._cache[s] = slicer(self.d, self.axis, s)
        return self._cache[s]

    def __call__(self, s: Fraction) -> tuple[float, float, float]:
        if not self.breaks or s < self.breaks[0] or s > self.breaks[-1]:
            return (0.0, 0.0, 0.0)
        if s in self.breaks:
            return self.exact(s)
        for i, (a, b, _, _) in enumerate(self.pieces):
            if a < s < b:
                return self.piece_value(i, s)
        raise AssertionError("unreachable")

    def piece_value(self, i: int, s) -> tuple[float, float, float]:
        """Value of the i-th polynomial piece, also at its endpoints (one-sided limits)."""
        _, _, xs, vals = self.pieces[i]
        return tuple(_lagrange(xs, [v[c] for v in vals], float(s)) for c in range(3))

    def trapezoid(self, nodes: Sequence[Fraction]) -> tuple[float, float, float]:
        """Composite trapezoid rule over the nodes refined by the breakpoints.

        Each subinterval lies inside one polynomial piece and uses that piece's
        one-sided values, so jumps at vertex heights are not smeared.
        """
        pts = sorted(set(nodes) | set(self.breaks))
        acc: list[list[float]] = [[], [], []]
        i = 0
        for u, w in zip(pts, pts[1:]):
            while i < len(self.pieces) and self.pieces[i][1] <= u:
                i += 1
            if i == len(self.pieces) or not self.pieces[i][0] <= u:
                continue
            fu, fw = self.piece_value(i, u), self.piece_value(i, w)
            h = float(w - u)
            for c in range(3):
                acc[c].append((fu[c] + fw[c]) * h / 2)
        return tuple(math.fsum(a) for a in acc)


@dataclass
class FubiniReport:
    axis: int
    step: float
    integral_weight: float
    integral_mass: float
    integral_energy: float
    weight: float
    mass: float
    energy: float
    margins: dict = field(default_factory=dict)
    ok: bool = True
    nodes: int = 0
    exact_slices: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def fubini(d: Dipolyhedron, axis: int = 1, step=Fraction(1, 1000), tol: float = REL_TOL) -> FubiniReport:
    """Trapezoid quadrature of s -> W(S_s), M(T_s), E(D_s) against W, M, E.

    ``step`` is relative to the coordinate extent of |D|; the interval is the
    extent padded by one step on each side.
    """
    step = Fraction(step)
    if step <= 0:
        raise ValueError("step must be positive")
    if not 1 <= axis <= d.ambient:
        raise ValueError(f"axis {axis} outside 1..{d.ambient}")
    w, m, e = d.weight(), d.mass(), d.energy()
    f = _Integrand(d, axis)
    if len(f.breaks) < 2:
        ints, n = (0.0, 0.0, 0.0), 0
    else:
        lo, hi = f.breaks[0], f.breaks[-1]
        h = (hi - lo) * step
        n = int(math.ceil(1 / step)) + 2
        ints = f.trapezoid([lo - h + i * h for i in range(n + 1)])
    margins = {"weight": w - ints[0], "mass": m - ints[1], "energy": e - ints[2]}
    ok = all(v >= -tol * max(e, 1e-300) for v in margins.values()) if e > 0 else all(
        v >= 0 for v in margins.values())
    return FubiniReport(axis, float(step), ints[0], ints[1], ints[2], w, m, e, margins, ok,
                        n + 1 if n else 0, f.exact_evaluations)


# ---------------------------------------------------------------------------
# Cartan
# ---------------------------------------------------------------------------

@dataclass
class CartanRow:
    j: int
    gap: float
    bound: float
    residual: float | None = None

    @property
    def within_bound(self) -> bool:
        return self.gap <= self.bound * (1 + 1e-12) + 1e-300


@dataclass
class CartanReport:
    rows: list[CartanRow]
    ratios: list[float]
    degenerate: bool
    ok: bool

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) | {"within_bound": r.within_bound} for r in self.rows],
                "ratios": self.ratios, "degenerate": self.degenerate, "ok": self.ok}


def cartan_table(tau: Simplex, v: Sequence, js: Sequence[int], sigma: PolyChain | None = None,
                 scaffold=None) -> CartanReport:
    """cauchy_gap, its bound and (optionally) the Cartan residual for each j."""
    rows, degenerate = [], False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateDirectionWarning)
        for j in js:
            _, gap = cauchy_gap(tau, v, j)
            res = cartan_residual(sigma, v, j, scaffold) if sigma is not None else None
            rows.append(CartanRow(j, gap, cauchy_bound(tau, v, j), res))
        degenerate = any(issubclass(w.category, DegenerateDirectionWarning) for w in caught)
    if degenerate:
        warnings.warn("direction is tangent to the cell: degenerate prism", DegenerateDirectionWarning,
                      stacklevel=2)
    ratios = [a.gap / b.gap for a, b in zip(rows, rows[1:]) if b.gap > 0]
    ok = all(r.within_bound for r in rows)
    if not degenerate and rows and rows[0].gap > 0:
        ok = ok and all(1.9 <= r <= 2.1 for r in ratios)
    res = [r.residual for r in rows if r.residual is not None]
    if res and any(x > 0 for x in res):
        ok = ok and all(b <= a * (1 + 1e-12) for a, b in zip(res, res[1:]))
    return CartanReport(rows, ratios, degenerate, ok)


# ---------------------------------------------------------------------------
# lower semicontinuity
# ---------------------------------------------------------------------------

@dataclass
class LscRow:
    i: int
    flat_distance: float
    regime: str
    weight: float
    mass: float


@dataclass
class LscReport:
    kind: str
    rows: list[LscRow]
    limit_weight: float
    limit_mass: float
    margin: float
    decreasing: bool
    ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def lsc(steps: Sequence[int], kind: str = "dipole", constant: bool = False) -> LscReport:
    """Staircase sequence D_i against its diagonal limit D.

    Reports the scaffold flat distance E_flat(D_i - D) on the resolution-2^i
    grid and the semicontinuity margin liminf W(D_i) - W(D) (M for the mass
    analogue), with the last row standing in for the liminf.
    """
    from .flatnorm import Scaffold, energy_flat
    from .gallery import staircase

    if not steps:
        raise ValueError("resolution range is empty")
    rows = []
    limit = None
    for i in steps:
        d_i, d = staircase(i, kind)
        if constant:
            d_i = d
        limit = d
        res = energy_flat(d_i - d, Scaffold.grid(2 ** i))
        rows.append(LscRow(i, res.value, res.regime, d_i.weight(), d_i.mass()))
    lim_w, lim_m = limit.weight(), limit.mass()
    seq = [r.weight if kind == "dipole" else r.mass for r in rows]
    margin = min(seq) - (lim_w if kind == "dipole" else lim_m)
    dist = [r.flat_distance for r in rows]
    decreasing = all(b < a for a, b in zip(dist, dist[1:]))
    ok = margin >= -1e-6 * max(seq) and (decreasing or constant or len(rows) == 1)
    if constant:
        ok = ok and all(x == 0 for x in dist)
    return LscReport(kind, rows, lim_w, lim_m, margin, decreasing, ok)
