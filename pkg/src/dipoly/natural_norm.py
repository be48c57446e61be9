"""Multicells, witness upper bounds for the r-natural norm, prism approximants.

The r-natural norm is an infimum over decompositions

    P = sum_j [S^j] + dC,    cost = sum_j ||S^j||_j + |C|^{nat_{r-1}}

with no known finite algorithm.  Here a decomposition is supplied as a
:class:`NaturalWitness` and its cost is evaluated after checking, exactly,
that it really decomposes P.  The result is an upper bound on the norm.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .coefficients import Group
from .geom import Point, Simplex, as_point
from .polychain import ChainError, PolyChain, canonicalize


class DegenerateDirectionWarning(UserWarning):
    pass


class InvalidWitness(ChainError):
    def __init__(self, message: str, residual: PolyChain):
        super().__init__(message)
        self.residual = residual


def _norm(v: Sequence[Fraction]) -> float:
    return math.sqrt(sum(x * x for x in v))


@dataclass(frozen=True)
class Multicell:
    """sigma^j generated by a cell and vectors v_1..v_j, with a coefficient."""

    generator: Simplex
    vectors: tuple[Point, ...] = ()
    coeff: object = 1
    group: Group = Group.Z

    def __post_init__(self):
        vecs = tuple(as_point(v) for v in self.vectors)
        if any(len(v) != self.generator.ambient for v in vecs):
            raise ValueError("multicell vectors must live in the generator's ambient space")
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "coeff", self.group.coerce(self.coeff))

    @property
    def order(self) -> int:
        return len(self.vectors)


def expand(m: Multicell) -> PolyChain:
    """The 2^j-term chain sigma^j = sigma^{j-1} - T_{v_j} sigma^{j-1}."""
    g = m.group
    terms: list[tuple[Simplex, int]] = [(m.generator, 1)]
    for v in m.vectors:
        terms = terms + [(s.translate(v), -c) for s, c in terms]
    return canonicalize(((s, g.mul(c, m.coeff)) for s, c in terms), g,
                        m.generator.dim, m.generator.ambient)


def multicell_norm(m: Multicell) -> float:
    """|a| M(sigma^0) ||v_1|| ... ||v_j||."""
    out = m.group.norm(m.coeff) * m.generator.measure()
    for v in m.vectors:
        out *= _norm(v)
    return out


@dataclass(frozen=True)
class NaturalWitness:
    level: int
    multicells: tuple[Multicell, ...] = ()
    filling: PolyChain | None = None
    filling_witness: "NaturalWitness | None" = None

    def __post_init__(self):
        object.__setattr__(self, "multicells", tuple(self.multicells))
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        if any(m.order > self.level for m in self.multicells):
            raise ValueError(f"a level-{self.level} witness may use multicells of order <= {self.level}")
        if self.level == 0 and self.filling is not None:
            raise ValueError("a level-0 witness has no filling")
        if self.filling_witness is not None and self.filling_witness.level != self.level - 1:
            raise ValueError("filling witness must sit one level below")


def witness_chain(w: NaturalWitness, dim: int, ambient: int, group: Group) -> PolyChain:
    total = PolyChain(dim, ambient, group)
    for m in w.multicells:
        total = total + expand(m)
    if w.filling is not None:
        total = total + w.filling.boundary()
    return total


def trivial_witness(p: PolyChain, level: int) -> NaturalWitness:
    return NaturalWitness(level, tuple(Multicell(s, (), c, p.group) for s, c in p.terms))


def boundary_witness(w: NaturalWitness, p: PolyChain) -> NaturalWitness:
    """Witness for dP at level r+1 induced by a witness for P: S^j = 0, C = P."""
    return NaturalWitness(w.level + 1, (), p, w if w.level >= 0 else None)


def witness_value(w: NaturalWitness, p: PolyChain) -> float:
    """Cost of a valid decomposition of p; an upper bound on |p|^{nat_r}."""
    if w.level == 0:
        return p.mass()
    residual = p - witness_chain(w, p.dim, p.ambient, p.group)
    if not residual.is_zero():
        raise InvalidWitness(f"witness does not decompose the chain ({len(residual)} residual cells)",
                             residual)
    value = math.fsum(multicell_norm(m) for m in w.multicells)
    if w.filling is not None:
        if w.filling_witness is None:
            value += w.filling.mass()
        else:
            value += witness_value(w.filling_witness, w.filling)
    return value


# ---------------------------------------------------------------------------
# prisms and mass-cell approximants
# ---------------------------------------------------------------------------

def _lift(tau: Simplex, n: int) -> Simplex:
    if tau.ambient == n:
        return tau
    if n != tau.ambient + 1:
        raise ValueError(f"direction in R^{n} for a cell in R^{tau.ambient}")
    zero = Fraction(0)
    return Simplex._make(tuple(p + (zero,) for p in tau.vertices))


def prism_terms(tau: Simplex, w: Sequence) -> list[tuple[Simplex, int]]:
    """Oriented orbit of tau under translation by t*w, 0 <= t <= 1.

    Orientation is chosen so that d(orbit tau) = tau - T_w tau - orbit(d tau).
    """
    w = as_point(w)
    tau = _lift(tau, len(w))
    a = tau.vertices
    b = tuple(tuple(x + y for x, y in zip(p, w)) for p in a)
    k = len(a) - 1
    return [(Simplex._make(a[:i + 1] + b[i:]), (-1) ** (i + 1)) for i in range(k + 1)]


def prism(p: PolyChain, w: Sequence, group: Group | None = None) -> PolyChain:
    """Orbit chain of a polyhedral chain (degenerate prisms vanish)."""
    g = group or p.group
    w = as_point(w)
    terms = []
    for s, c in p.terms:
        for t, sign in prism_terms(s, w):
            terms.append((t, g.mul(sign, g.coerce(c))))
    return canonicalize(terms, g, p.dim + 1, len(w))


def _is_transverse(tau: Simplex, v: Point) -> bool:
    return not Simplex._make(_lift(tau, len(v)).vertices + (tuple(x + y for x, y in zip(_lift(tau, len(v)).vertices[0], v)),)).is_degenerate


def prism_approximant(tau: Simplex, v: Sequence, j: int) -> PolyChain:
    """2^j (tau x 2^-j v) with rational coefficients."""
    v = as_point(v)
    if not any(v) or not _is_transverse(tau, v):
        warnings.warn("direction is tangent to the cell: degenerate prism", DegenerateDirectionWarning,
                      stacklevel=2)
        return PolyChain(tau.dim + 1, len(v), Group.Q)
    w = tuple(x / 2 ** j for x in v)
    base = PolyChain(tau.dim, tau.ambient, Group.Q, ((tau.normalized()[0], Fraction(tau.normalized()[1])),))
    return prism(base, w).scale(Fraction(2) ** j)


def cauchy_gap(tau: Simplex, v: Sequence, j: int) -> tuple[NaturalWitness, float]:
    """1-natural witness for approximant(j+1) - approximant(j) and its value.

    With h = 2^{-j-1} v the difference equals 2^j [(tau x h) - T_h (tau x h)],
    a single 1-multicell chain generated by the half prism.
    """
    v = as_point(v)
    if not any(v) or not _is_transverse(tau, v):
        warnings.warn("direction is tangent to the cell: degenerate prism", DegenerateDirectionWarning,
                      stacklevel=2)
        w = NaturalWitness(1)
        return w, 0.0
    h = tuple(x / 2 ** (j + 1) for x in v)
    base = PolyChain(tau.dim, tau.ambient, Group.Q, ((tau.normalized()[0], Fraction(tau.normalized()[1])),))
    half = prism(base, h)
    scale = Fraction(2) ** j
    cells = tuple(Multicell(s, (h,), scale * c, Group.Q) for s, c in half.terms)
    w = NaturalWitness(1, cells)
    target = prism_approximant(tau, v, j + 1) - prism_approximant(tau, v, j)
    return w, witness_value(w, target)


def cauchy_bound(tau: Simplex, v: Sequence, j: int) -> float:
    """||v||^2 M(tau) 2^-j / 4."""
    return _norm(as_point(v)) ** 2 * tau.measure() * 2.0 ** (-j) / 4


def lie_approximant(sigma: PolyChain, v: Sequence, j: int) -> PolyChain:
    """2^j (sigma - T_{2^-j v} sigma) over Q."""
    w = tuple(x / 2 ** j for x in as_point(v))
    s = sigma.with_group(Group.Q)
    return (s - s.translate(w)).scale(Fraction(2) ** j)


def cartan_approximant(sigma: PolyChain, v: Sequence, j: int) -> PolyChain:
    """Level-j approximant of mu_v d sigma + d mu_v sigma."""
    w = tuple(x / 2 ** j for x in as_point(v))
    s = sigma.with_group(Group.Q)
    return (prism(s.boundary(), w) + prism(s, w).boundary()).scale(Fraction(2) ** j)


def cartan_residual_chain(sigma: PolyChain, v: Sequence, j: int) -> PolyChain:
    return lie_approximant(sigma, v, j) - cartan_approximant(sigma, v, j)


def cartan_residual(sigma: PolyChain, v: Sequence, j: int, scaffold=None) -> float:
    """Scaffold flat norm of the level-j Cartan residual (mass if no scaffold)."""
    r = cartan_residual_chain(sigma, v, j)
    if r.is_zero():
        return 0.0
    if scaffold is None:
        return r.mass()
    from .flatnorm import flat_poly

    return flat_poly(r, scaffold).value
