"""Random rational instances and an independent integration oracle for tests."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction as F

from dipoly.coefficients import Group
from dipoly.dipolyhedra import E4, Dipolyhedron
from dipoly.geom import Simplex
from dipoly.polychain import PolyChain, canonicalize

DENOMS = (1, 2, 3, 5, 7)


def rand_rational(rng: random.Random, lo=-3, hi=3) -> F:
    d = rng.choice(DENOMS)
    return F(rng.randint(lo * d, hi * d), d)


def rand_point(rng, n, lo=-3, hi=3):
    return tuple(rand_rational(rng, lo, hi) for _ in range(n))


def rand_simplex(rng, k, n, lo=-3, hi=3) -> Simplex:
    while True:
        s = Simplex(tuple(rand_point(rng, n, lo, hi) for _ in range(k + 1)))
        if not s.is_degenerate:
            return s


def rand_coeff(rng, g: Group):
    if g is Group.Z2:
        return 1
    if g is Group.Z:
        return rng.choice([-2, -1, 1, 1, 2, 3])
    return F(rng.choice([-3, -1, 1, 2, 5]), rng.choice([1, 2, 3]))


def rand_chain(rng, k, n, g: Group, terms=None, **kw) -> PolyChain:
    terms = terms if terms is not None else rng.randint(1, 3)
    return canonicalize([(rand_simplex(rng, k, n, **kw), rand_coeff(rng, g)) for _ in range(terms)], g, k, n)


def rand_direction(rng):
    return rng.choice([E4, (F(1), F(0), F(0), F(0)), (F(0), F(1, 2), F(1), F(0))])


def rand_dipolyhedron(rng, k, n, g: Group, directions=1, **kw) -> Dipolyhedron:
    d = Dipolyhedron.zero(k, n, g)
    for _ in range(directions):
        v = rand_direction(rng)
        d = d + Dipolyhedron.dipole(rand_chain(rng, k, n, g, **kw), v)
        if k >= 1 and rng.random() < 0.7:
            d = d + Dipolyhedron.mass_of(rand_chain(rng, k - 1, n, g, **kw), v)
    return d


# ---------------------------------------------------------------------------
# integration oracle: integrals of polynomial k-forms over formal sums
# ---------------------------------------------------------------------------

def _det(m):
    m = [list(r) for r in m]
    n = len(m)
    out = F(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return F(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            out = -out
        out *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for j in range(c, n):
                m[r][j] -= f * m[c][j]
    return out


class Form:
    """omega = sum_I (a_I + b_I.x + (c_I.x)(e_I.x)) dx_I with rational data."""

    def __init__(self, rng, k, n, degree=2):
        self.k, self.n = k, n
        self.parts = []
        for I in itertools.combinations(range(n), k):
            a = rand_rational(rng)
            b = tuple(rand_rational(rng) for _ in range(n)) if degree >= 1 else (F(0),) * n
            c = tuple(rand_rational(rng) for _ in range(n)) if degree >= 2 else (F(0),) * n
            e = tuple(rand_rational(rng) for _ in range(n)) if degree >= 2 else (F(0),) * n
            self.parts.append((I, a, b, c, e))

    def integrate_simplex(self, verts) -> F:
        k = self.k
        if k == 0:
            (p,) = verts
            return sum(a + _dot(b, p) + _dot(c, p) * _dot(e, p) for _, a, b, c, e in self.parts)
        edges = [tuple(q - p for p, q in zip(verts[0], v)) for v in verts[1:]]
        total = F(0)
        for I, a, b, c, e in self.parts:
            vol = _det([[row[i] for i in I] for row in edges]) / math.factorial(k)
            if vol == 0:
                continue
            g = [_dot(c, v) for v in verts]
            h = [_dot(e, v) for v in verts]
            quad = sum(g[i] * h[j] * (2 if i == j else 1)
                       for i in range(k + 1) for j in range(k + 1)) / ((k + 1) * (k + 2))
            lin = sum(_dot(b, v) for v in verts) / (k + 1)
            total += vol * (a + lin + quad)
        return total

    def integrate(self, terms) -> F:
        return sum(F(c) * self.integrate_simplex(tuple(s.vertices if isinstance(s, Simplex) else s))
                   for s, c in terms)


def _dot(u, v):
    return sum(x * y for x, y in zip(u, v))


def oracle_boundary(terms):
    """Formal boundary: drop vertex i with sign (-1)^i."""
    out = []
    for s, c in terms:
        vs = s.vertices if isinstance(s, Simplex) else s
        for i in range(len(vs)):
            out.append((vs[:i] + vs[i + 1:], c * (-1) ** i))
    return out


def exterior_derivative(form: Form) -> "Form":
    """d of a form with affine coefficients (quadratic parts must be absent)."""
    k, n = form.k, form.n
    out = Form.__new__(Form)
    out.k, out.n = k + 1, n
    acc: dict = {}
    for I, a, b, c, e in form.parts:
        if any(c) and any(e):
            raise ValueError("exterior_derivative supports affine coefficients only")
        for j in range(n):
            if b[j] == 0 or j in I:
                continue
            J = tuple(sorted(I + (j,)))
            sign = (-1) ** sum(1 for i in I if i < j)
            acc[J] = acc.get(J, F(0)) + sign * b[j]
    zero = (F(0),) * n
    out.parts = [(J, v, zero, zero, zero) for J, v in acc.items()]
    return out


def rngs():
    """Hypothesis strategy of seeded ``random.Random`` instances."""
    from hypothesis import strategies as st

    return st.integers(0, 2 ** 31 - 1).map(random.Random)


def rand_scaffold_values(rng, count, g: Group, density=0.5):
    return [rand_coeff(rng, g) if rng.random() < density else 0 for _ in range(count)]


def rand_scaffold_dipolyhedron(rng, K, k, g: Group, directions=1) -> Dipolyhedron:
    """Random dipolyhedron whose cells are cells of the scaffold ``K``."""
    d = Dipolyhedron.zero(k, K.ambient, g)
    for v in rng.sample([E4, (F(1), F(0), F(0), F(0)), (F(0), F(1, 2), F(1), F(0))], directions):
        s = K.chain(k, rand_scaffold_values(rng, K.count(k), g), g)
        t = K.chain(k - 1, rand_scaffold_values(rng, K.count(k - 1), g), g) if k >= 1 else None
        d = d + Dipolyhedron.build(k, K.ambient, g, {v: s}, {v: t} if t is not None else {})
    return d


# ---------------------------------------------------------------------------
# brute-force Z2 energy oracle (independent of the solver's matrices)
# ---------------------------------------------------------------------------

def _incidence_bits(K, k, offset):
    """Row bitmask of the faces of each k-cell, faces indexed from ``offset``."""
    out = []
    for s in K.cells(k):
        m = 0
        for _, f in s.boundary_faces():
            m ^= 1 << (offset + K.index(k - 1, f.normalized()[0]))
        out.append(m)
    return out


def z2_energy_oracle(d, K) -> float:
    """min E(B) + E(C) over D = B + dC on K, Z2 coefficients, by enumeration."""
    import numpy as np

    k = d.dim
    n_k, n_lo = K.count(k), K.count(k - 1) if k >= 1 else 0
    w_rows = list(K.measures(k)) + (list(K.measures(k - 1)) if n_lo else [])
    cols = _incidence_bits(K, k + 1, 0) if K.count(k + 1) else []
    w_cols = list(K.measures(k + 1)) if cols else []
    lower = _incidence_bits(K, k, n_k) if n_lo else [0] * n_k
    cols += [(1 << i) ^ lower[i] for i in range(n_k)]
    w_cols += list(K.measures(k))
    nrows = len(w_rows)
    if nrows > 64 or len(cols) > 26:
        raise ValueError("instance too large for the brute-force oracle")
    tables = []
    for c in range(0, nrows, 8):
        w = w_rows[c:c + 8]
        tables.append(np.array([math.fsum(w[b] for b in range(len(w)) if t >> b & 1) for t in range(256)]))

    def half(cs, ws):
        masks, costs = np.zeros(1, dtype=np.uint64), np.zeros(1)
        for m, w in zip(cs, ws):
            masks = np.concatenate([masks, masks ^ np.uint64(m)])
            costs = np.concatenate([costs, costs + w])
        return masks, costs

    total = 0.0
    a = len(cols) // 2
    lo_m, lo_c = half(cols[:a], w_cols[:a])
    hi_m, hi_c = half(cols[a:], w_cols[a:])
    for v in d.directions:
        p = 0
        for i, x in enumerate(K.embed_chain(d.dipole_chain(v), k)):
            p |= int(x) << i
        if n_lo:
            for i, x in enumerate(K.embed_chain(d.mass_chain(v), k - 1)):
                p |= int(x) << (n_k + i)
        best = math.inf
        for hm, hc in zip(hi_m, hi_c):
            r = lo_m ^ hm ^ np.uint64(p)
            cost = lo_c + hc
            for c, tab in enumerate(tables):
                cost = cost + tab[((r >> np.uint64(8 * c)) & np.uint64(255)).astype(np.int64)]
            best = min(best, float(cost.min()))
        total += best
    return total
