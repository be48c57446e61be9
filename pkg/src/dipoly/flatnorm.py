"""Scaffold-restricted flat norms M_flat^K and E_flat^K.

The infimum over all decompositions is replaced by an infimum over chains of
a finite simplicial complex K (the scaffold).  Every reported value is the
energy of an explicit decomposition that has been re-checked with exact chain
arithmetic, so it is a certified upper bound on the unrestricted flat norm.

Solver regimes: linear programming (HiGHS) for Q, LP relaxation plus rounding
for Z, and for Z2 exhaustive enumeration on small problems, mixed-integer
branch and bound (HiGHS) on medium ones and a rounded integer lift beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import permutations, product
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .coefficients import Group
from .dipolyhedra import Dipolyhedron, Direction, intersect_halfspace, slice as slice_dipolyhedron
from .geom import HalfSpace, Simplex, as_point, relative_orientation
from .polychain import ChainError, PolyChain, canonicalize

EXHAUSTIVE_MAX = 24
MILP_MAX = 4000
FEAS_TOL = 1e-9


class EmbeddingError(ChainError):
    pass


# ---------------------------------------------------------------------------
# scaffold
# ---------------------------------------------------------------------------

class Scaffold:
    """Finite simplicial complex with signed incidence matrices and cell measures."""

    def __init__(self, simplices: Iterable[Simplex]):
        cells: dict[int, dict[Simplex, None]] = {}
        stack = []
        for s in simplices:
            if not isinstance(s, Simplex):
                s = Simplex(tuple(s))
            if s.is_degenerate:
                raise ValueError(f"degenerate scaffold simplex {s.vertices}")
            stack.append(s.normalized()[0])
        ambient = {s.ambient for s in stack}
        if len(ambient) != 1:
            raise ValueError("scaffold simplices must share one ambient dimension")
        self.ambient = ambient.pop()
        while stack:
            s = stack.pop()
            bucket = cells.setdefault(s.dim, {})
            if s in bucket:
                continue
            bucket[s] = None
            stack.extend(f for _, f in s.boundary_faces())
        self.top_dim = max(cells)
        self._cells = {k: sorted(v, key=lambda s: s.vertices) for k, v in cells.items()}
        self._index = {k: {s: i for i, s in enumerate(v)} for k, v in self._cells.items()}
        self._by_plane: dict[int, dict[tuple, list[int]]] = {}
        self._bmat: dict[int, sparse.csr_matrix] = {}
        self._meas: dict[int, np.ndarray] = {}

    # -- builders ---------------------------------------------------------
    @classmethod
    def grid(cls, m: int, dim: int = 2, ambient: int | None = None,
             lo: Sequence = None, size=1) -> "Scaffold":
        """Kuhn triangulation of the cube lo + [0, size]^dim at resolution m."""
        ambient = ambient or dim
        lo = as_point(lo or (0,) * ambient)
        h = Fraction(size) / m
        tops = []
        for corner in product(range(m), repeat=dim):
            for perm in permutations(range(dim)):
                cur = list(corner)
                verts = [tuple(cur)]
                for axis in perm:
                    cur[axis] += 1
                    verts.append(tuple(cur))
                pts = tuple(tuple(lo[i] + (h * v[i] if i < dim else 0) for i in range(ambient)) for v in verts)
                tops.append(Simplex._make(pts))
        return cls(tops)

    @classmethod
    def from_chains(cls, *chains) -> "Scaffold":
        simplices = []
        for c in chains:
            if isinstance(c, Dipolyhedron):
                for _, p in c.dipole_parts + c.mass_parts:
                    simplices.extend(p.support())
            else:
                simplices.extend(c.support())
        return cls(simplices)

    # -- access -----------------------------------------------------------
    def cells(self, k: int) -> list[Simplex]:
        return self._cells.get(k, [])

    def count(self, k: int) -> int:
        return len(self._cells.get(k, []))

    def index(self, k: int, s: Simplex) -> int | None:
        return self._index.get(k, {}).get(s)

    def measures(self, k: int) -> np.ndarray:
        if k not in self._meas:
            self._meas[k] = np.array([s.measure() for s in self.cells(k)], dtype=float)
        return self._meas[k]

    def boundary_matrix(self, k: int) -> sparse.csr_matrix:
        """Signed incidence of k-cells in (k-1)-cells, shape (N_{k-1}, N_k)."""
        if k not in self._bmat:
            rows, cols, vals = [], [], []
            if k >= 1:
                idx = self._index.get(k - 1, {})
                for j, s in enumerate(self.cells(k)):
                    for sign, f in s.boundary_faces():
                        rows.append(idx[f])
                        cols.append(j)
                        vals.append(sign)
            shape = (self.count(k - 1) if k >= 1 else 0, self.count(k))
            self._bmat[k] = sparse.csr_matrix((vals, (rows, cols)), shape=shape, dtype=np.int64)
        return self._bmat[k]

    def check_complex(self) -> bool:
        """d_k o d_{k+1} == 0 for every k."""
        for k in range(1, self.top_dim):
            prod_ = self.boundary_matrix(k) @ self.boundary_matrix(k + 1)
            if prod_.count_nonzero():
                return False
        return True

    def _plane_index(self, k: int) -> dict[tuple, list[int]]:
        if k not in self._by_plane:
            d: dict[tuple, list[int]] = {}
            for i, s in enumerate(self.cells(k)):
                d.setdefault(s.plane, []).append(i)
            self._by_plane[k] = d
        return self._by_plane[k]

    def decompose(self, s: Simplex) -> list[tuple[int, int]]:
        """Express a simplex as a signed sum of scaffold cells [(index, sign)]."""
        k = s.dim
        key, sign = s.normalized()
        i = self.index(k, key)
        if i is not None:
            return [(i, sign)]
        cand = self._plane_index(k).get(s.plane, [])
        parts = []
        for i in cand:
            c = self.cells(k)[i]
            if all(s.contains_point(v) for v in c.vertices):
                parts.append((i, relative_orientation(c, s)))
        if parts:
            check = canonicalize([(s, 1)] + [(self.cells(k)[i], -o) for i, o in parts],
                                 Group.Z, k, s.ambient)
            if check.is_zero():
                return parts
        raise EmbeddingError(f"{k}-simplex {s.vertices} is not a union of scaffold cells")

    def embed_chain(self, p: PolyChain, k: int | None = None) -> list:
        k = p.dim if k is None else k
        g = p.group
        if p.ambient != self.ambient:
            raise EmbeddingError(f"chain in R^{p.ambient}, scaffold in R^{self.ambient}")
        out = [g.zero] * self.count(k)
        for s, c in p.terms:
            for i, sign in self.decompose(s):
                out[i] = g.add(out[i], c if sign > 0 else g.neg(c))
        return out

    def chain(self, k: int, values: Sequence, group: Group) -> PolyChain:
        terms = [(self.cells(k)[i], v) for i, v in enumerate(values) if v != 0]
        if not terms:
            return PolyChain(k, self.ambient, group)
        return canonicalize(terms, group, k, self.ambient)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {"kind": "scaffold", "ambient": self.ambient,
                "simplices": {str(k): [[[Group.Q.format(c) for c in v] for v in s.vertices]
                                       for s in self.cells(k)]
                              for k in sorted(self._cells)}}

    @classmethod
    def from_json(cls, doc: dict) -> "Scaffold":
        simplices = []
        for _k, lst in doc["simplices"].items():
            for verts in lst:
                simplices.append(Simplex(tuple(tuple(Fraction(c) for c in v) for v in verts)))
        return cls(simplices)


# ---------------------------------------------------------------------------
# generic L1 problem: minimize wx.|x| + wr.|p - M x|
# ---------------------------------------------------------------------------

@dataclass
class _Problem:
    M: sparse.csr_matrix
    p: list
    wx: np.ndarray
    wr: np.ndarray
    group: Group

    @property
    def n(self) -> int:
        return self.M.shape[1]

    def residual(self, x: Sequence) -> list:
        g = self.group
        r = list(self.p)
        coo = self.M.tocoo()
        for i, j, a in zip(coo.row, coo.col, coo.data):
            if x[j] != 0:
                r[i] = g.add(r[i], g.neg(g.mul(int(a), x[j])))
        return r

    def value(self, x: Sequence, r: Sequence) -> float:
        g = self.group
        return math.fsum([w * g.norm(v) for w, v in zip(self.wx, x) if v != 0] +
                         [w * g.norm(v) for w, v in zip(self.wr, r) if v != 0])


def _lp(prob: _Problem, p_float: np.ndarray) -> tuple[np.ndarray, float]:
    n, m = prob.n, prob.M.shape[0]
    A = sparse.hstack([prob.M, -prob.M, sparse.identity(m), -sparse.identity(m)]).tocsr()
    c = np.concatenate([prob.wx, prob.wx, prob.wr, prob.wr])
    res = linprog(c, A_eq=A, b_eq=p_float, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return res.x[:n] - res.x[n:2 * n], float(res.fun)


def _solve_real(prob: _Problem) -> tuple[list, float]:
    p_float = np.array([float(v) for v in prob.p], dtype=float)
    x, relax = _lp(prob, p_float)
    if prob.group is Group.Z:
        return [int(round(v)) for v in x], relax
    return [Fraction(float(v)).limit_denominator(10 ** 6) if abs(v) > FEAS_TOL else Fraction(0)
            for v in x], relax


def _bitmasks(M: np.ndarray, words: int) -> np.ndarray:
    """Pack the 0/1 columns of M into (n, words) uint64 row bitmasks."""
    out = np.zeros((M.shape[1], words), dtype=np.uint64)
    for j in range(M.shape[1]):
        for i in np.flatnonzero(M[:, j]):
            out[j, i // 64] |= np.uint64(1) << np.uint64(i % 64)
    return out


def _subset_table(masks: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """XOR masks and weight sums of every subset, subset s at index s."""
    xs = np.zeros((1, masks.shape[1]), dtype=np.uint64)
    cs = np.zeros(1)
    for m, c in zip(masks, w):
        xs = np.concatenate([xs, xs ^ m])
        cs = np.concatenate([cs, cs + c])
    return xs, cs


def _solve_z2_exhaustive(prob: _Problem) -> list:
    """Meet-in-the-middle enumeration of all 2^n mod-2 choices."""
    n, m = prob.n, prob.M.shape[0]
    if n == 0:
        return []
    M = (abs(prob.M.toarray()) % 2).astype(np.int64)
    words = max(1, -(-m // 64))
    cols = _bitmasks(M, words)
    p = _bitmasks((np.array(prob.p, dtype=np.int64) % 2)[:, None], words)[0]
    # weighted popcount by 16-bit lookup
    wr = np.concatenate([np.asarray(prob.wr, dtype=float), np.zeros(words * 64 - m)])
    bits = ((np.arange(2 ** 16)[:, None] >> np.arange(16)) & 1).astype(float)
    tables = [bits @ wr[16 * b:16 * b + 16] for b in range(-(-m // 16))]
    lo_n = n // 2
    lo_x, lo_c = _subset_table(cols[:lo_n], prob.wx[:lo_n])
    hi_x, hi_c = _subset_table(cols[lo_n:], prob.wx[lo_n:])
    lo_x = lo_x ^ p
    block = max(1, 2 ** 20 // len(lo_x))
    best, arg = math.inf, (0, 0)
    for start in range(0, len(hi_x), block):
        r = hi_x[start:start + block, None, :] ^ lo_x[None, :, :]
        cost = hi_c[start:start + block, None] + lo_c[None, :]
        r16 = r.astype("<u8", copy=False).view(np.uint16)
        for b, tab in enumerate(tables):
            cost += tab[r16[:, :, b]]
        flat = int(np.argmin(cost))
        i, j = divmod(flat, cost.shape[1])
        if cost[i, j] < best - 1e-12:
            best, arg = float(cost[i, j]), (start + i, j)
    hi, lo = arg
    return [lo >> t & 1 for t in range(lo_n)] + [hi >> t & 1 for t in range(n - lo_n)]


def _solve_z2_milp(prob: _Problem) -> list:
    """Branch and bound on |M| x + r - 2 z = p with x, r binary and 0 <= z <= (deg + 1) / 2.

    Mod 2 the signs of M are irrelevant; dropping them keeps every coefficient
    nonnegative and z tightly bounded, which HiGHS handles reliably (the signed
    lift with loose z bounds produced wrong "optimal" points).
    """
    n, m = prob.n, prob.M.shape[0]
    Mabs = abs(prob.M).astype(float)
    deg = np.asarray(Mabs.sum(axis=1)).ravel()
    A = sparse.hstack([Mabs, sparse.identity(m), -2 * sparse.identity(m)]).tocsc()
    p = np.array(prob.p, dtype=float) % 2
    c = np.concatenate([prob.wx, prob.wr, np.zeros(m)])
    ub = np.concatenate([np.ones(n + m), np.floor((deg + 1) / 2)])
    res = milp(c, constraints=LinearConstraint(A, p, p), integrality=np.ones(n + 2 * m),
               bounds=Bounds(np.zeros(n + 2 * m), ub), options={"disp": False})
    if res.x is None:
        raise RuntimeError(f"MILP solver failed: {res.message}")
    return [int(round(v)) % 2 for v in res.x[:n]]


def _solve_z2_lift(prob: _Problem) -> tuple[list, float]:
    lifted = _Problem(prob.M, [int(v) for v in prob.p], prob.wx, prob.wr, Group.Z)
    x, relax = _solve_real(lifted)
    return [v % 2 for v in x], relax


def _solve(prob: _Problem, method: str | None = None) -> tuple[list, str, float | None]:
    g = prob.group
    relax = None
    if g is Group.Z2:
        method = method or ("exhaustive" if prob.n <= EXHAUSTIVE_MAX
                            else "branch-and-bound" if prob.n <= MILP_MAX else "lp-lift")
        if method == "exhaustive":
            if prob.n > EXHAUSTIVE_MAX + 4:
                raise ValueError(f"exhaustive search over {prob.n} binary variables refused")
            x = _solve_z2_exhaustive(prob)
        elif method == "branch-and-bound":
            x = _solve_z2_milp(prob)
        elif method == "lp-lift":
            x, relax = _solve_z2_lift(prob)
        else:
            raise ValueError(f"unknown Z2 method {method!r}")
    else:
        method = "lp" if g is Group.Q else "lp-round"
        x, relax = _solve_real(prob) if prob.n else ([], 0.0)
    return x, method, relax


def _certified(prob: _Problem, x: list) -> tuple[list, list, float]:
    """Exact residual and value; falls back to the trivial witness if it is cheaper."""
    g = prob.group
    x = [g.coerce(v) for v in x]
    r = prob.residual(x)
    val = prob.value(x, r)
    zero = [g.zero] * prob.n
    triv = prob.value(zero, prob.p)
    if triv < val:
        return zero, list(prob.p), triv
    return x, r, val


# ---------------------------------------------------------------------------
# M_flat on polyhedral chains
# ---------------------------------------------------------------------------

@dataclass
class FlatResult:
    value: float
    B: PolyChain
    C: PolyChain
    regime: str
    relaxation: float | None = None


def flat_poly(p: PolyChain, K: Scaffold, method: str | None = None) -> FlatResult:
    """min M(B) + M(C) subject to P = B + dC, B and C chains of K."""
    k, g = p.dim, p.group
    pv = K.embed_chain(p)
    prob = _Problem(K.boundary_matrix(k + 1) if K.count(k + 1) else sparse.csr_matrix((K.count(k), 0), dtype=np.int64),
                    pv, K.measures(k + 1) if K.count(k + 1) else np.zeros(0), K.measures(k), g)
    x, regime, relax = _solve(prob, method)
    x, r, val = _certified(prob, x)
    B = K.chain(k, r, g)
    C = K.chain(k + 1, x, g) if K.count(k + 1) else PolyChain(k + 1, K.ambient, g)
    if not (B + C.boundary() - p).is_zero():
        raise AssertionError("flat witness failed exact verification")
    return FlatResult(math.fsum([B.mass(), C.mass()]), B, C, regime, relax)


# ---------------------------------------------------------------------------
# E_flat on dipolyhedra
# ---------------------------------------------------------------------------

@dataclass
class Decomposition:
    """D = B + dC with B a k- and C a (k+1)-dipolyhedron."""

    B: Dipolyhedron
    C: Dipolyhedron

    @property
    def value(self) -> float:
        return self.B.energy() + self.C.energy()


@dataclass
class Verification:
    ok: bool
    residual: Dipolyhedron
    value: float

    def __bool__(self) -> bool:
        return self.ok


def verify_witness(d: Dipolyhedron, dec: Decomposition) -> Verification:
    """Exact check of D = B + dC and recomputation of E(B) + E(C)."""
    try:
        residual = d - dec.B - dec.C.boundary()
    except ChainError:
        return Verification(False, d, math.inf)
    return Verification(residual.is_zero(), residual, dec.value)


def trivial_decomposition(d: Dipolyhedron) -> Decomposition:
    return Decomposition(d, Dipolyhedron.zero(d.dim + 1, d.ambient, d.group))


@dataclass
class EnergyFlatResult:
    value: float
    decomposition: Decomposition
    regime: str
    relaxation: float | None = None


def _energy_problem(s_d: list, t_d: list, K: Scaffold, k: int, g: Group) -> _Problem:
    n_hi, n_k, n_lo = K.count(k + 1), K.count(k), K.count(k - 1) if k >= 1 else 0
    d_hi = K.boundary_matrix(k + 1) if n_hi else sparse.csr_matrix((n_k, 0), dtype=np.int64)
    d_k = K.boundary_matrix(k) if k >= 1 else sparse.csr_matrix((0, n_k), dtype=np.int64)
    top = sparse.hstack([d_hi, sparse.identity(n_k, dtype=np.int64)])
    bot = sparse.hstack([sparse.csr_matrix((n_lo, n_hi), dtype=np.int64), -d_k])
    M = sparse.vstack([top, bot]).tocsr().astype(np.int64)
    wx = np.concatenate([K.measures(k + 1) if n_hi else np.zeros(0), K.measures(k)])
    wr = np.concatenate([K.measures(k), K.measures(k - 1) if n_lo else np.zeros(0)])
    return _Problem(M, list(s_d) + list(t_d), wx, wr, g)


def energy_flat(d: Dipolyhedron, K: Scaffold, method: str | None = None) -> EnergyFlatResult:
    """Scaffold E_flat: min E(B) + E(C) over D = B + dC with B, C supported in K.

    Variables are s_B, t_B, s_C, t_C; the boundary law gives
    s_B + d s_C + t_C = s_D and t_B - d t_C = t_D.  Directions decouple.
    """
    k, g = d.dim, d.group
    if d.ambient != K.ambient:
        raise EmbeddingError(f"dipolyhedron in R^{d.ambient}, scaffold in R^{K.ambient}")
    n_hi, n_k, n_lo = K.count(k + 1), K.count(k), K.count(k - 1) if k >= 1 else 0
    B = Dipolyhedron.zero(k, d.ambient, g)
    C = Dipolyhedron.zero(k + 1, d.ambient, g)
    regimes, relax_total = set(), 0.0
    for v in d.directions:
        s_d = K.embed_chain(d.dipole_chain(v), k)
        t_d = K.embed_chain(d.mass_chain(v), k - 1) if k >= 1 else []
        prob = _energy_problem(s_d, t_d, K, k, g)
        x, regime, relax = _solve(prob, method)
        x, r, _ = _certified(prob, x)
        regimes.add(regime)
        if relax is not None:
            relax_total += relax
        s_c, t_c = x[:n_hi], x[n_hi:]
        s_b, t_b = r[:n_k], r[n_k:]
        B = B + Dipolyhedron.build(k, d.ambient, g, {v: K.chain(k, s_b, g)},
                                   {v: K.chain(k - 1, t_b, g)} if n_lo else {})
        C = C + Dipolyhedron.build(k + 1, d.ambient, g,
                                   {v: K.chain(k + 1, s_c, g)} if n_hi else {},
                                   {v: K.chain(k, t_c, g)})
    dec = Decomposition(B, C)
    check = verify_witness(d, dec)
    if not check.ok:
        raise AssertionError("energy witness failed exact verification")
    return EnergyFlatResult(check.value, dec, "+".join(sorted(regimes)) or "trivial",
                            relax_total if regimes & {"lp", "lp-round", "lp-lift"} else None)


# ---------------------------------------------------------------------------
# witnesses constructed from an optimal decomposition
# ---------------------------------------------------------------------------

def boundary_decomposition(dec: Decomposition) -> Decomposition:
    """dD = 0 + dB: decomposition of dD with value E(B)."""
    b = dec.B
    return Decomposition(Dipolyhedron.zero(b.dim - 1, b.ambient, b.group), b)


def dipole_part_decomposition(dec: Decomposition) -> Decomposition:
    """Decomposition of S from one of D: S = (S_B + S_*) + d S_C, S_* = delta t_C."""
    b, c = dec.B, dec.C
    s_star = Dipolyhedron.build(b.dim, b.ambient, b.group, dict(c.mass_parts))
    return Decomposition(b.S + s_star, c.S)


def halfspace_decomposition(dec: Decomposition, h: HalfSpace) -> Decomposition:
    """D cap H = (B cap H - C_s) + d(C cap H)."""
    b_h = intersect_halfspace(dec.B, h)
    c_s = slice_dipolyhedron(dec.C, h)
    return Decomposition(b_h - c_s, intersect_halfspace(dec.C, h))
