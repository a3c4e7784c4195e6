"""Polynomials stored by their boundary Laplacian jets.

A polynomial of degree j is ``sum_{m<=j} sum_k c[m][k] f_{mk}`` with
``c[m][k] = Delta^m f(q_k)``.  Every operation here acts on that (j+1) x 2
array; vertex values are produced by pushing the jet down the cell tree with

    Delta^m (f o F_i) = rho^m (Delta^m f) o F_i,     rho = r/(b+2).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from ._rational import decimal_str, frac_str, to_mpf
from .calculus import SampledFunction
from .coefficients import MonomialTables, MultiharmonicTables, rho
from .topology import GraphLevel, build_graph, check_branching

Row = tuple  # (coefficient of f_{m1}, coefficient of f_{m2})


@dataclass(frozen=True)
class PolySpec:
    b: int
    coeffs: tuple[Row, ...]

    def __post_init__(self):
        check_branching(self.b)
        if not self.coeffs:
            raise ValueError("a PolySpec needs at least one row")
        for row in self.coeffs:
            if len(row) != 2:
                raise ValueError("each row holds the two coefficients (k=1, k=2)")

    @classmethod
    def zero(cls, b: int, degree: int = 0) -> "PolySpec":
        return cls(b, ((Fraction(0), Fraction(0)),) * (degree + 1))

    @classmethod
    def from_rows(cls, b: int, rows: Sequence[Sequence]) -> "PolySpec":
        return cls(b, tuple((Fraction(c1), Fraction(c2)) for c1, c2 in rows))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, key: tuple[int, int]):
        m, k = key
        if k not in (1, 2):
            raise KeyError(k)
        if m > self.degree:
            return Fraction(0)
        return self.coeffs[m][k - 1]

    def padded(self, degree: int) -> "PolySpec":
        if degree <= self.degree:
            return self
        zero = self.coeffs[0][0] * 0
        return PolySpec(self.b, self.coeffs + ((zero, zero),) * (degree - self.degree))

    def trimmed(self) -> "PolySpec":
        rows = list(self.coeffs)
        while len(rows) > 1 and not any(rows[-1]):
            rows.pop()
        return PolySpec(self.b, tuple(rows))

    def is_zero(self) -> bool:
        return not any(c for row in self.coeffs for c in row)

    def _combine(self, other: "PolySpec", op: Callable) -> "PolySpec":
        if self.b != other.b:
            raise ValueError("specs belong to different branching parameters")
        n = max(self.degree, other.degree)
        x, y = self.padded(n), other.padded(n)
        return PolySpec(self.b, tuple((op(r[0], s[0]), op(r[1], s[1])) for r, s in zip(x.coeffs, y.coeffs)))

    def __add__(self, other: "PolySpec") -> "PolySpec":
        return self._combine(other, lambda u, v: u + v)

    def __sub__(self, other: "PolySpec") -> "PolySpec":
        return self._combine(other, lambda u, v: u - v)

    def __neg__(self) -> "PolySpec":
        return self.scaled(-1)

    def scaled(self, c) -> "PolySpec":
        return PolySpec(self.b, tuple((c * r[0], c * r[1]) for r in self.coeffs))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolySpec) or self.b != other.b:
            return NotImplemented
        return self.trimmed().coeffs == other.trimmed().coeffs

    def __hash__(self):
        return hash((self.b, self.trimmed().coeffs))

    def to_json(self) -> list[list[str]]:
        return [[frac_str(c1), frac_str(c2)] for c1, c2 in self.coeffs]


def multiharmonic_basis(b: int, j: int, k: int) -> PolySpec:
    """The unit jet e_{jk}, i.e. f_{jk}."""
    if j < 0 or k not in (1, 2):
        raise ValueError("need j >= 0 and k in {1, 2}")
    rows = [(Fraction(0), Fraction(0))] * (j + 1)
    rows[j] = (Fraction(1), Fraction(0)) if k == 1 else (Fraction(0), Fraction(1))
    return PolySpec(b, tuple(rows))


def constant(b: int, c=Fraction(1)) -> PolySpec:
    return PolySpec(b, ((Fraction(c), Fraction(c)),))


def monomial_to_fbasis(b: int, j: int, k: int, tables: MonomialTables) -> PolySpec:
    """Jet of P_{jk}: Delta^m P_{jk} = P_{(j-m)k}, so the q2 column holds alpha or beta."""
    if tables.b != b:
        raise ValueError("tables computed for a different b")
    if j > tables.jmax:
        raise IndexError(f"monomial tables cover degree {tables.jmax}, need {j}")
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    zero = Fraction(0)
    if k == 1:
        rows = [(Fraction(int(m == j)), tables.alpha[j - m]) for m in range(j + 1)]
    else:
        rows = [(zero, tables.beta[j - m]) for m in range(j + 1)]
    return PolySpec(b, tuple(rows))


def apply_laplacian(spec: PolySpec) -> PolySpec:
    """Drop row 0; the Laplacian of a harmonic jet is the zero jet."""
    if spec.degree == 0:
        return PolySpec.zero(spec.b)
    return PolySpec(spec.b, spec.coeffs[1:])


def green_shift(spec: PolySpec) -> PolySpec:
    """The Dirichlet solution h of Delta h = spec: prepend a zero row."""
    zero = spec.coeffs[0][0] * 0
    return PolySpec(spec.b, ((zero, zero),) + spec.coeffs)


def inner(u: PolySpec, v: PolySpec, multi: MultiharmonicTables):
    """<u, v> from the inner products of the basis functions."""
    if not (u.b == v.b == multi.b):
        raise ValueError("specs and tables must share b")
    total = Fraction(0)
    for m, row in enumerate(u.coeffs):
        for k, c in enumerate(row, start=1):
            if not c:
                continue
            for m2, row2 in enumerate(v.coeffs):
                for k2, c2 in enumerate(row2, start=1):
                    if c2:
                        total += c * c2 * multi.inner(m, k, m2, k2)
    return total


# -- refinement ------------------------------------------------------------------

# Boundary points of each first-level child as (image of q1, image of q2).
# "q1"/"q2" are the parent boundary points, "p1"/"p2" the junctions next to q1/q2.
def child_ends(b: int) -> dict[int, tuple[str, str]]:
    ends = {i: ("p1", "p2") for i in range(1, b + 1)}
    ends[b + 1] = ("q1", "p1")
    ends[b + 2] = ("p2", "q2")
    return ends


@dataclass(frozen=True)
class CellFrame:
    word: tuple[int, ...]
    local_spec: PolySpec


class _Scalars:
    """Table entries (junction values and rho powers) in one scalar type."""

    def __init__(self, multi: MultiharmonicTables, degree: int, kind: str):
        if degree > multi.jmax:
            raise IndexError(f"multiharmonic tables cover degree {multi.jmax}, need {degree}")
        conv = {"exact": Fraction, "float": float, "mp": to_mpf}[kind]
        self.kind = kind
        self.near = [conv(x) for x in multi.near[: degree + 1]]
        self.far = [conv(x) for x in multi.far[: degree + 1]]
        rh = rho(multi.b)
        self.rho_pow = [conv(rh**m) for m in range(degree + 1)]
        self.zero = conv(Fraction(0))


def _point_value(rows, point: str, sc: _Scalars, shift: int):
    """Value of Delta^shift f at a first-level point, f given by its jet rows."""
    if point == "q1":
        return rows[shift][0]
    if point == "q2":
        return rows[shift][1]
    near_k = 0 if point == "p1" else 1
    total = sc.zero
    for m in range(len(rows) - shift):
        c1, c2 = rows[shift + m]
        nv, fv = sc.near[m], sc.far[m]
        if near_k == 0:
            total += c1 * nv + c2 * fv
        else:
            total += c1 * fv + c2 * nv
    return total


def _refine_rows(rows, ends: dict[int, tuple[str, str]], sc: _Scalars):
    out = []
    for i in sorted(ends):
        e1, e2 = ends[i]
        out.append(tuple(
            (sc.rho_pow[m] * _point_value(rows, e1, sc, m), sc.rho_pow[m] * _point_value(rows, e2, sc, m))
            for m in range(len(rows))))
    return out


def refine(frame: CellFrame, tables: MultiharmonicTables) -> list[CellFrame]:
    """The b+2 child frames of *frame*, in copy order 1..b+2."""
    spec = frame.local_spec
    sc = _Scalars(tables, spec.degree, "exact")
    kids = _refine_rows(spec.coeffs, child_ends(spec.b), sc)
    return [CellFrame(frame.word + (i + 1,), PolySpec(spec.b, rows)) for i, rows in enumerate(kids)]


class ConsistencyError(AssertionError):
    """Two cells sharing a vertex disagree on its value."""


def _close(x, y, kind: str) -> bool:
    if kind == "exact":
        return x == y
    scale = max(abs(x), abs(y), 1)
    tol = 1e-9 if kind == "float" else mpmath.mpf(10) ** (-(mpmath.mp.dps - 5))
    return abs(x - y) <= tol * scale


def sample(spec: PolySpec, level: int, tables: MultiharmonicTables, kind: str = "exact",
           graph: GraphLevel | None = None) -> SampledFunction:
    """Values of *spec* on V_level by repeated refinement.

    ``kind`` selects the scalar type: ``"exact"`` (Fraction), ``"float"``,
    or ``"mp"`` (mpmath at the current working precision).
    """
    b = spec.b
    if tables.b != b:
        raise ValueError("tables computed for a different b")
    g = graph if graph is not None else build_graph(b, level)
    if (g.b, g.level) != (b, level):
        raise ValueError("graph does not match b and level")
    sc = _Scalars(tables, spec.degree, kind)
    conv = {"exact": Fraction, "float": float, "mp": to_mpf}[kind]
    frames = [tuple(tuple(conv(c) for c in row) for row in spec.coeffs)]
    ends = child_ends(b)
    for _ in range(level):
        frames = [child for rows in frames for child in _refine_rows(rows, ends, sc)]
    values: list = [None] * len(g)
    for rows, (_, (i, j)) in zip(frames, g.cells):
        for idx, val in ((i, rows[0][0]), (j, rows[0][1])):
            prev = values[idx]
            if prev is None:
                values[idx] = val
            elif not _close(prev, val, kind):
                raise ConsistencyError(f"cells disagree at {g.vertices[idx]}: {prev} vs {val}")
    return SampledFunction(g, tuple(values))


def sample_csv(f: SampledFunction, exact: bool = False, digits: int = 17) -> str:
    """CSV ``word,x,y,value`` in vertex order; values exact or at *digits* significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["word", "x", "y", "value"])
    for v, (x, y), val in zip(f.graph.vertices, f.graph.coords, f.values):
        if exact:
            if not isinstance(val, (int, Fraction)):
                raise TypeError("exact output needs rational samples")
            sval = frac_str(val)
        else:
            sval = decimal_str(val, digits)
        w.writerow([str(v), repr(float(x)), repr(float(y)), sval])
    return buf.getvalue()
