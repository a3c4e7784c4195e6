"""Discrete analysis on G_l: Laplacians, energy, harmonic extension, quadrature,
normal derivatives and the Green function.

Everything here is a direct finite computation on a :class:`GraphLevel` and is
used to check the closed-form recursions in :mod:`bubblediamond.coefficients`
from the outside.

Sign conventions: the Laplacian is the weak Laplacian of the energy with
respect to the self-similar probability measure, so for ``b = 1`` it is the
second derivative on [0, 1]; normal derivatives are outward (``-f'(0)`` at q1,
``f'(1)`` at q2).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .topology import Address, GraphLevel, Q1, Q2, build_graph, canonicalize, check_branching


def renormalization(b: int) -> Fraction:
    """The energy renormalization r = b/(2b+1)."""
    return Fraction(b, 2 * b + 1)


def laplacian_scale(b: int) -> Fraction:
    """The Laplacian scaling factor r/(b+2)."""
    return renormalization(b) / (b + 2)


def harmonic_matrices(b: int) -> dict[int, tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]]:
    """A_i mapping boundary values (f(q1), f(q2)) to (f(F_i q1), f(F_i q2))."""
    check_branching(b)
    hi = Fraction(b + 1, 2 * b + 1)
    lo = Fraction(b, 2 * b + 1)
    one, zero = Fraction(1), Fraction(0)
    mats = {i: ((hi, lo), (lo, hi)) for i in range(1, b + 1)}
    mats[b + 1] = ((one, zero), (hi, lo))
    mats[b + 2] = ((lo, hi), (zero, one))
    return mats


# Green function constants on a single cell: inverse of the Dirichlet energy
# matrix on the two junction points.
def green_constants(b: int) -> tuple[Fraction, Fraction]:
    r = renormalization(b)
    return r * r * (b + 1) / b, r * r


@dataclass(frozen=True, eq=False)
class SampledFunction:
    graph: GraphLevel
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.graph.vertices):
            raise ValueError("one value per vertex required")

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (Fraction, int)) for v in self.values)

    def __getitem__(self, p: Address | int):
        return self.values[_vertex_index(self.graph, p)]

    def as_dict(self) -> dict[Address, object]:
        return dict(zip(self.graph.vertices, self.values))

    @classmethod
    def from_callable(cls, graph: GraphLevel, fn: Callable[[Address], object]) -> "SampledFunction":
        return cls(graph, tuple(fn(v) for v in graph.vertices))

    @classmethod
    def constant(cls, graph: GraphLevel, c=Fraction(1)) -> "SampledFunction":
        return cls(graph, (c,) * len(graph.vertices))

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        _same_graph(self, other)
        return SampledFunction(self.graph, tuple(x + y for x, y in zip(self.values, other.values)))

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        _same_graph(self, other)
        return SampledFunction(self.graph, tuple(x - y for x, y in zip(self.values, other.values)))

    def scaled(self, c) -> "SampledFunction":
        return SampledFunction(self.graph, tuple(c * x for x in self.values))


def _vertex_index(g: GraphLevel, p: Address | int) -> int:
    if isinstance(p, int):
        if not 0 <= p < len(g.vertices):
            raise KeyError(p)
        return p
    try:
        return g.index[p]
    except KeyError:
        raise KeyError(f"{p} is not a vertex of G_{g.level} (b={g.b})") from None


def _same_graph(f: SampledFunction, g: SampledFunction) -> None:
    if f.graph is not g.graph and (f.graph.b, f.graph.level) != (g.graph.b, g.graph.level):
        raise ValueError("functions live on different graphs")


def graph_laplacian(f: SampledFunction, p: Address | int):
    """Neighbour average minus the value at p (degrees counted with multiplicity)."""
    g = f.graph
    i = _vertex_index(g, p)
    total = sum(m * f.values[j] for j, m in g.neighbors[i])
    deg = g.degrees[i]
    if isinstance(total, (int, Fraction)):
        return Fraction(total, 1) / deg - f.values[i]
    return total / deg - f.values[i]


def renormalized_laplacian(f: SampledFunction, p: Address | int):
    """Level-l approximation of the fractal Laplacian at an interior vertex.

    Equals 2 (r/(b+2))^{-l} times the neighbour-average Laplacian, i.e.
    (2/(b+1)) (r/(b+2))^{-l} times the neighbour-sum Laplacian.
    """
    g = f.graph
    i = _vertex_index(g, p)
    if i in g.boundary:
        raise ValueError("the pointwise Laplacian is only defined off the boundary")
    scale = laplacian_scale(g.b) ** (-g.level) * 2
    lap = graph_laplacian(f, i)
    if isinstance(lap, Fraction):
        return scale * lap
    return lap * _like(lap, scale)


def _like(x, c: Fraction):
    """Convert a Fraction constant into the scalar type of x."""
    if isinstance(x, float):
        return float(c)
    if isinstance(x, (int, Fraction)):
        return c
    return type(x)(c.numerator) / c.denominator


def laplacian_values(f: SampledFunction) -> dict[Address, object]:
    g = f.graph
    bd = set(g.boundary)
    return {v: renormalized_laplacian(f, i) for i, v in enumerate(g.vertices) if i not in bd}


def graph_energy(f: SampledFunction):
    g = f.graph
    total = sum(m * (f.values[i] - f.values[j]) ** 2 for (i, j), m in g.edges.items())
    scale = renormalization(g.b) ** (-g.level)
    return scale * total if isinstance(total, (int, Fraction)) else _like(total, scale) * total


def harmonic_extend(f: SampledFunction, target: GraphLevel | None = None) -> SampledFunction:
    """Energy-minimizing extension from G_l to G_{l+1}, one cell at a time."""
    g = f.graph
    b = g.b
    if target is None:
        target = build_graph(b, g.level + 1)
    elif (target.b, target.level) != (b, g.level + 1):
        raise ValueError("target graph must be the next level")
    hi = Fraction(b + 1, 2 * b + 1)
    lo = Fraction(b, 2 * b + 1)
    if not f.exact:
        hi, lo = _like(f.values[0], hi), _like(f.values[0], lo)
    out = [None] * len(target.vertices)
    tidx = target.index
    for v, val in zip(g.vertices, f.values):
        out[tidx[v]] = val
    for w, (i, j) in g.cells:
        u1, u2 = f.values[i], f.values[j]
        out[tidx[Address(w + (b + 1,), Q2)]] = hi * u1 + lo * u2
        out[tidx[Address(w + (b + 2,), Q1)]] = lo * u1 + hi * u2
    return SampledFunction(target, tuple(out))


def harmonic_function(graph: GraphLevel, u1, u2) -> SampledFunction:
    """The harmonic function with boundary values (u1, u2), sampled on *graph*."""
    f = SampledFunction(build_graph(graph.b, 0), (u1, u2))
    for lvl in range(1, graph.level + 1):
        f = harmonic_extend(f, graph if lvl == graph.level else None)
    if graph.level == 0:
        f = SampledFunction(graph, (u1, u2))
    return f


def quadrature(f: SampledFunction, g: SampledFunction | None = None):
    """Sum of w(x) f(x) g(x): the tent-function (piecewise harmonic) rule for the integral."""
    if g is None:
        vals = f.values
    else:
        _same_graph(f, g)
        vals = [x * y for x, y in zip(f.values, g.values)]
    w = f.graph.weights
    if all(isinstance(v, (int, Fraction)) for v in vals):
        return sum((wi * v for wi, v in zip(w, vals)), Fraction(0))
    first = vals[0]
    return sum(_like(first, wi) * v for wi, v in zip(w, vals))


def inner_boundary_neighbor(g: GraphLevel, q: int) -> int:
    """Index of x_l: the other end of the boundary cell at q."""
    if g.level < 1:
        raise ValueError("normal derivative needs level >= 1")
    b = g.b
    if q == Q1:
        addr = Address((b + 1,) * g.level, Q2)
    else:
        addr = Address((b + 2,) * g.level, Q1)
    return g.index[addr]


def _boundary_label(g: GraphLevel, q: Address | int) -> int:
    if isinstance(q, Address):
        if q == Address((), Q1):
            return Q1
        if q == Address((), Q2):
            return Q2
    elif q in (Q1, Q2):
        return q
    raise ValueError(f"{q} is not a boundary vertex")


def normal_derivative(f: SampledFunction, q: Address | int):
    """r^{-l} (f(q) - f(x_l)).  *q* is the boundary address or the label 1/2."""
    g = f.graph
    label = _boundary_label(g, q)
    qi = g.boundary[label - 1]
    xi = inner_boundary_neighbor(g, label)
    diff = f.values[qi] - f.values[xi]
    scale = renormalization(g.b) ** (-g.level)
    return scale * diff if isinstance(diff, (int, Fraction)) else _like(diff, scale) * diff


# -- Green function ------------------------------------------------------------

@lru_cache(maxsize=None)
def _unit_tents(b: int, depth: int) -> tuple[tuple[Address, ...], tuple, tuple]:
    """Level-1 tent functions of the two junctions, sampled on G_depth (depth >= 1)."""
    g1 = build_graph(b, 1)
    i1 = g1.index[Address((b + 1,), Q2)]
    i2 = g1.index[Address((b + 2,), Q1)]
    tents = []
    for target in (i1, i2):
        f = SampledFunction(g1, tuple(Fraction(int(k == target)) for k in range(len(g1))))
        for _ in range(depth - 1):
            f = harmonic_extend(f)
        tents.append(f.values)
    gd = build_graph(b, depth)
    return gd.vertices, tents[0], tents[1]


@dataclass(frozen=True, eq=False)
class GreenMatrix:
    graph: GraphLevel
    entries: tuple[tuple[Fraction, ...], ...]

    def __getitem__(self, key: tuple[Address | int, Address | int]) -> Fraction:
        p, q = key
        return self.entries[_vertex_index(self.graph, p)][_vertex_index(self.graph, q)]

    def as_dict(self) -> dict[tuple[Address, Address], Fraction]:
        vs = self.graph.vertices
        return {(vs[i], vs[j]): row[j] for i, row in enumerate(self.entries) for j in range(len(vs))}


def green_matrix(b: int, level: int) -> GreenMatrix:
    """G(p, q) for p, q in V_level.

    Each m-cell w contributes r^m sum_{x,y} g(x,y) psi_x psi_y over its two
    junction points (g = alpha on the diagonal, beta off it); only cells of
    depth m < level touch V_level, so the values are exact, not truncated.
    """
    check_branching(b)
    if level < 1:
        raise ValueError("green_matrix needs level >= 1")
    g = build_graph(b, level)
    n = len(g)
    G = [[Fraction(0)] * n for _ in range(n)]
    r = renormalization(b)
    alpha, beta = green_constants(b)
    cells_at = {0: [()]}
    for m in range(1, level):
        cells_at[m] = [w + (i,) for w in cells_at[m - 1] for i in range(1, b + 3)]
    for m in range(level):
        depth = level - m
        rel_vertices, t1, t2 = _unit_tents(b, depth)
        support = [(k, t1[k], t2[k]) for k in range(len(rel_vertices)) if t1[k] or t2[k]]
        rm = r ** m
        for w in cells_at[m]:
            glob = [g.index[canonicalize(Address(w + rel_vertices[k].word, rel_vertices[k].anchor), b)]
                    for k, _, _ in support]
            for (gi, (_, a1, a2)) in zip(glob, support):
                row = G[gi]
                u1 = rm * (alpha * a1 + beta * a2)
                u2 = rm * (beta * a1 + alpha * a2)
                for (gj, (_, c1, c2)) in zip(glob, support):
                    row[gj] += u1 * c1 + u2 * c2
    return GreenMatrix(g, tuple(tuple(row) for row in G))


def green_quadrature_squared(gm: GreenMatrix) -> Fraction:
    """sum_{p,q} w(p) w(q) G(p,q)^2 evaluated directly from a Green matrix."""
    w = gm.graph.weights
    total = Fraction(0)
    for wi, row in zip(w, gm.entries):
        if wi:
            total += wi * sum(wj * x * x for wj, x in zip(w, row) if x)
    return total


def green_quadrature_squared_selfsimilar(b: int, level: int) -> Fraction:
    """The same double sum as :func:`green_quadrature_squared`, by self-similarity.

    Both the vertex rule and the Green function split over first-level cells,
    so the double sum obeys a closed recursion in three quantities: the
    harmonic Gram matrix under the rule, the Green bilinear form on harmonic
    functions, and the double sum itself.  Cost is O(level * b^2).
    """
    check_branching(b)
    lam = Fraction(1, b + 2)
    r = renormalization(b)
    alpha, beta = green_constants(b)
    gmat = ((alpha, beta), (beta, alpha))
    A = harmonic_matrices(b)
    copies = range(1, b + 3)
    # psi_a o F_i as a harmonic vector (values at F_i q1, F_i q2); a = 0 -> p1, a = 1 -> p2
    psi = {}
    for i in copies:
        if i <= b:
            psi[i] = ((1, 0), (0, 1))
        elif i == b + 1:
            psi[i] = ((0, 1), (0, 0))
        else:
            psi[i] = ((0, 0), (1, 0))
    cols = {i: tuple((A[i][0][k], A[i][1][k]) for k in range(2)) for i in copies}

    def bil(u, M, v):
        return sum(u[s] * M[s][t] * v[t] for s in range(2) for t in range(2))

    H = ((Fraction(1, 2), Fraction(0)), (Fraction(0), Fraction(1, 2)))
    X = ((Fraction(0),) * 2,) * 2
    S = Fraction(0)
    for _ in range(level):
        Mi = {i: [[bil(psi[i][a], H, psi[i][c]) for c in range(2)] for a in range(2)] for i in copies}
        # harmonic-against-psi overlaps, needed for the Green form on harmonics
        Ci = {i: [[bil(cols[i][k], H, psi[i][a]) for a in range(2)] for k in range(2)] for i in copies}
        newS = Fraction(0)
        for i in copies:
            for i2 in copies:
                t = sum(gmat[a][c] * gmat[a2][c2] * Mi[i][a][a2] * Mi[i2][c][c2]
                        for a in range(2) for c in range(2) for a2 in range(2) for c2 in range(2))
                if i == i2:
                    t += 2 * r * sum(gmat[a][c] * bil(psi[i][a], X, psi[i][c])
                                     for a in range(2) for c in range(2))
                    t += r * r * S
                newS += t
        newX = [[Fraction(0)] * 2 for _ in range(2)]
        for k in range(2):
            for k2 in range(2):
                tot = Fraction(0)
                for i in copies:
                    for i2 in copies:
                        tot += sum(gmat[a][c] * Ci[i][k][a] * Ci[i2][k2][c]
                                   for a in range(2) for c in range(2))
                    tot += r * bil(cols[i][k], X, cols[i][k2])
                newX[k][k2] = tot * lam * lam
        newH = [[lam * sum(bil(cols[i][k], H, cols[i][k2]) for i in copies) for k2 in range(2)]
                for k in range(2)]
        S = newS * lam * lam
        X = tuple(tuple(row) for row in newX)
        H = tuple(tuple(row) for row in newH)
    return S


# -- sparse Dirichlet oracle ------------------------------------------------------

def _ld(x: Fraction) -> np.longdouble:
    return np.longdouble(x.numerator) / np.longdouble(x.denominator)


class DirichletOracle:
    """Floating-point finite-element solver for the Dirichlet problem on G_l.

    Solves  r^{-l} L u = -W f  on interior vertices with u = 0 on V_0 (L the
    multiplicity-weighted graph Laplacian matrix, W the vertex masses), which
    is the discrete weak form of  Delta u = f.  Independent of every closed
    form in the package; used as a convergence oracle.

    Vectors are long doubles; each double-precision LU solve is followed by
    iterative refinement with long-double residuals, which keeps round-off
    well below the discretization error at the levels used for probing.
    """

    def __init__(self, graph: GraphLevel, refinements: int = 3):
        self.graph = g = graph
        self.refinements = refinements
        n = len(g)
        rows, cols, vals = [], [], []
        for (i, j), m in g.edges.items():
            rows += [i, j, i, j]
            cols += [j, i, i, j]
            vals += [-m, -m, m, m]
        K = sp.csr_matrix((np.array(vals, float), (rows, cols)), shape=(n, n))
        K.sum_duplicates()
        K.sort_indices()
        self.scale = _ld(renormalization(g.b) ** (-g.level))
        self.K = K  # unscaled integer stiffness
        self.w = np.array([_ld(x) for x in g.weights], dtype=np.longdouble)
        bd = set(g.boundary)
        self.inner = np.array([i for i in range(n) if i not in bd])
        Kii = K[self.inner][:, self.inner].tocsr()
        Kii.sort_indices()
        self._Kii = Kii
        self._lu = spla.splu((Kii * float(self.scale)).tocsc())

    def _matvec(self, A: sp.csr_matrix, u: np.ndarray) -> np.ndarray:
        prod = A.data.astype(np.longdouble) * u[A.indices]
        out = np.add.reduceat(prod, A.indptr[:-1]) if len(prod) else np.zeros(A.shape[0], np.longdouble)
        empty = A.indptr[:-1] == A.indptr[1:]
        out[empty] = 0
        return out * self.scale

    def harmonic(self, u1, u2) -> np.ndarray:
        f = harmonic_function(self.graph, Fraction(u1), Fraction(u2))
        return np.array([_ld(Fraction(x)) for x in f.values], dtype=np.longdouble)

    def solve(self, f: np.ndarray) -> np.ndarray:
        """u with Delta u = f, u(q1) = u(q2) = 0."""
        rhs = -(self.w * f)[self.inner]
        ui = self._lu.solve(rhs.astype(float)).astype(np.longdouble)
        for _ in range(self.refinements):
            res = rhs - self._matvec(self._Kii, ui)
            ui = ui + self._lu.solve(res.astype(float))
        u = np.zeros(len(self.graph), dtype=np.longdouble)
        u[self.inner] = ui
        return u

    def flux(self, u: np.ndarray, lap: np.ndarray, label: int) -> np.longdouble:
        """Discrete Gauss-Green normal derivative at q_label, given Delta u = lap."""
        q = self.graph.boundary[label - 1]
        lo, hi = self.K.indptr[q], self.K.indptr[q + 1]
        row = (self.K.data[lo:hi].astype(np.longdouble) * u[self.K.indices[lo:hi]]).sum()
        return row * self.scale + self.w[q] * lap[q]

    def integrate(self, f: np.ndarray, g: np.ndarray | None = None) -> np.longdouble:
        return np.dot(self.w, f if g is None else f * g)


def discrete_tables(b: int, level: int, jmax: int) -> dict[str, list[float]]:
    """Finite-level approximations of every closed-form sequence, from sparse solves.

    Returns junction values ``near``/``far`` (f_{j1} at the junction next to
    q1 / next to q2), inner products ``a``/``b``, and monomial data
    ``alpha``, ``beta``, ``eta``, ``gamma``.
    """
    g = build_graph(b, level)
    orc = DirichletOracle(g)
    i_near = g.index[Address((b + 1,), Q2)]
    i_far = g.index[Address((b + 2,), Q1)]
    f01 = orc.harmonic(1, 0)
    f02 = orc.harmonic(0, 1)
    out: dict[str, list] = {k: [] for k in ("near", "far", "a", "b", "alpha", "beta", "eta", "gamma")}
    u = f01
    for j in range(jmax + 1):
        if j:
            u = orc.solve(u)
        out["near"].append(u[i_near])
        out["far"].append(u[i_far])
        out["a"].append(orc.integrate(u, f01))
        out["b"].append(orc.integrate(u, f02))
    q2 = g.boundary[1]
    for key_val, key_der, start in (("alpha", "eta", np.ones(len(g), np.longdouble)), ("beta", "gamma", -f02)):
        P = start
        lap = np.zeros(len(g), np.longdouble)
        for j in range(jmax + 1):
            if j:
                lap = P
                u = orc.solve(P)
                # add c f02 so that the outward normal derivative at q1 vanishes
                c = orc.flux(u, lap, Q1)
                P = u + c * f02
            out[key_val].append(P[q2])
            out[key_der].append(orc.flux(P, lap, Q2))
    return out
