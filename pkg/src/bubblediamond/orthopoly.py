"""Gram matrices of monomials, Gram-Schmidt, and the Green-operator recursion.

Index families
--------------
``"interleaved"``  P_{01}, P_{02}, P_{11}, P_{12}, ... (slot n holds P_{jk} with
                   n = 2j + k - 1); at b = 1 this reproduces shifted Legendre.
``"k1"``           P_{01}, P_{11}, P_{21}, ...
``"k2"``           P_{02}, P_{12}, P_{22}, ...

The Green image of P_{jk} is P_{(j+1)k} + alpha_{j+1} P_{02} (k = 1) or
P_{(j+1)2} + beta_{j+1} P_{02} (k = 2), so only the ``k2`` family is closed
under the Green operator with unit leading coefficient; the interleaved
family has a five-slot band and the ``k1`` family leaks out of its span.
Band structure is measured, never assumed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from ._rational import DEFAULT_PRECISION, frac_str, to_mpf
from .calculus import green_quadrature_squared_selfsimilar
from .coefficients import MonomialTables, monomial_tables
from .polyspace import PolySpec, green_shift, inner, monomial_to_fbasis
from .topology import check_branching

FAMILIES = ("interleaved", "k1", "k2")


class SymmetryError(AssertionError):
    """The closed-form inner products are not symmetric."""


class NotPositiveDefiniteError(AssertionError):
    """A Gram matrix failed the leading-minor test."""


def _need(tables: MonomialTables, idx: int) -> None:
    if idx > tables.jmax:
        raise IndexError(f"monomial tables cover index {tables.jmax}, need {idx}")


def _closed_form(j: int, k: int, j2: int, k2: int, t: MonomialTables) -> Fraction:
    """One of the four printed sums (the (2,1) case uses the alternative form)."""
    val = t.alpha if k == 1 else t.beta
    der = t.eta if k == 1 else t.gamma
    val2 = t.alpha if k2 == 1 else t.beta
    der2 = t.eta if k2 == 1 else t.gamma
    return sum((val[j - l] * der2[j2 + l + 1] - val2[j2 + l + 1] * der[j - l] for l in range(j + 1)),
               Fraction(0))


def monomial_inner(b: int, j: int, k: int, j2: int, k2: int, tables: MonomialTables,
                   check: bool = True) -> Fraction:
    """<P_{jk}, P_{j2 k2}> from boundary data alone.

    With ``check`` the swapped expression is evaluated too and the two must
    agree exactly.
    """
    if tables.b != b:
        raise ValueError("tables computed for a different b")
    _need(tables, j + j2 + 1)
    val = _closed_form(j, k, j2, k2, tables)
    if check:
        other = _closed_form(j2, k2, j, k, tables)
        if other != val:
            raise SymmetryError(f"<P{j}{k},P{j2}{k2}> = {val} but swapped form gives {other}")
    return val


def family_index(family: str, n: int) -> tuple[int, int]:
    """(j, k) of slot n in the given family."""
    if family == "interleaved":
        return n // 2, n % 2 + 1
    if family == "k1":
        return n, 1
    if family == "k2":
        return n, 2
    raise ValueError(f"unknown family {family!r}")


def tables_for(b: int, n: int, family: str = "interleaved") -> MonomialTables:
    """Monomial tables deep enough for Gram-Schmidt and Green images on n slots."""
    jtop = family_index(family, n - 1)[0] + 1
    return monomial_tables(b, 2 * jtop + 3)


@dataclass(frozen=True)
class GramMatrix:
    b: int
    n: int
    family: str
    entries: tuple[tuple[Fraction, ...], ...]

    def leading_minors(self) -> list[Fraction]:
        return _leading_minors(self.entries)


def _leading_minors(mat) -> list[Fraction]:
    """All leading principal minors by fraction-exact Gaussian elimination."""
    n = len(mat)
    a = [list(row) for row in mat]
    minors, det = [], Fraction(1)
    for i in range(n):
        piv = a[i][i]
        det *= piv
        minors.append(det)
        if piv == 0:
            minors.extend([Fraction(0)] * (n - i - 1))
            break
        for r in range(i + 1, n):
            f = a[r][i] / piv
            if f:
                for c in range(i, n):
                    a[r][c] -= f * a[i][c]
    return minors


def gram_matrix(b: int, n: int, tables: MonomialTables | None = None,
                family: str = "interleaved") -> GramMatrix:
    if n < 1:
        raise ValueError("n must be at least 1")
    tables = tables or tables_for(b, n, family)
    idx = [family_index(family, i) for i in range(n)]
    rows = []
    for i, (j, k) in enumerate(idx):
        rows.append(tuple(monomial_inner(b, j, k, j2, k2, tables) for (j2, k2) in idx))
    for i in range(n):
        for c in range(i):
            if rows[i][c] != rows[c][i]:
                raise SymmetryError(f"Gram entry ({i},{c}) not symmetric")
    gm = GramMatrix(b, n, family, tuple(rows))
    for i, m in enumerate(gm.leading_minors()):
        if m <= 0:
            raise NotPositiveDefiniteError(f"leading minor {i + 1} is {m}")
    return gm


@dataclass
class OrthogonalSequence:
    b: int
    family: str
    tables: MonomialTables
    monomials: list[PolySpec]
    mono_coeffs: list[list[Fraction]]  # p_j = sum_m mono_coeffs[j][m] P_m, unit diagonal
    specs: list[PolySpec]
    norm_sq: list[Fraction]
    s: list[Fraction] = field(default_factory=list)
    t: list[Fraction] = field(default_factory=list)
    t_measured: list[Fraction] = field(default_factory=list)
    bandwidth_report: list[dict[int, Fraction]] = field(default_factory=list)
    closed: list[bool] = field(default_factory=list)
    low_index_ok: list[bool] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.specs)

    def inner(self, u: PolySpec, v: PolySpec) -> Fraction:
        return inner(u, v, self.tables.multi)

    def band(self, j: int) -> list[int]:
        return sorted(self.bandwidth_report[j])

    def is_three_term(self, j: int) -> bool:
        """Green image of p_j is p_{j+1} + s p_j + t p_{j-1} in consecutive slots."""
        rep = self.bandwidth_report[j]
        return self.closed[j] and set(rep) <= {j - 1, j, j + 1} and rep.get(j + 1) == 1

    def to_json_dict(self) -> dict:
        return {
            "b": self.b,
            "family": self.family,
            "n": self.n,
            "specs": [s.to_json() for s in self.specs],
            "norm_sq": [frac_str(x) for x in self.norm_sq],
            "s": [frac_str(x) for x in self.s],
            "t": [frac_str(x) for x in self.t],
            "t_measured": [frac_str(x) for x in self.t_measured],
            "bandwidth_report": [{str(k): frac_str(v) for k, v in sorted(rep.items())}
                                 for rep in self.bandwidth_report],
            "closed": list(self.closed),
            "low_index_ok": list(self.low_index_ok),
            "three_term": [self.is_three_term(j) for j in range(len(self.bandwidth_report))],
            "families": {name: fam.to_json_dict() for name, fam in recursion_families(self).items()},
        }


def gram_schmidt(b: int, n: int, tables: MonomialTables | None = None,
                 family: str = "interleaved") -> OrthogonalSequence:
    """Classical Gram-Schmidt on the first n monomials of *family*, in exact arithmetic."""
    tables = tables or tables_for(b, n, family)
    gm = gram_matrix(b, n, tables, family)
    G = gm.entries
    mono = [monomial_to_fbasis(b, *family_index(family, i), tables) for i in range(n)]
    coeffs: list[list[Fraction]] = []
    norm_sq: list[Fraction] = []
    for j in range(n):
        c = [Fraction(0)] * n
        c[j] = Fraction(1)
        for l in range(j):
            # <P_j, p_l> through the Gram matrix
            proj = sum((coeffs[l][m] * G[j][m] for m in range(l + 1)), Fraction(0))
            f = proj / norm_sq[l]
            for m in range(l + 1):
                c[m] -= f * coeffs[l][m]
        nsq = sum((c[m] * c[m2] * G[m][m2] for m in range(j + 1) for m2 in range(j + 1)), Fraction(0))
        if nsq <= 0:
            raise ZeroDivisionError(f"p_{j} has non-positive norm {nsq}")
        coeffs.append(c)
        norm_sq.append(nsq)
    specs = []
    for c in coeffs:
        spec = PolySpec.zero(b)
        for m, cm in enumerate(c):
            if cm:
                spec = spec + mono[m].scaled(cm)
        specs.append(spec.trimmed())
    return OrthogonalSequence(b, family, tables, mono, coeffs, specs, norm_sq)


def recursion_coefficients(seq: OrthogonalSequence) -> OrthogonalSequence:
    """Expand each Green image in {p_l}; record the band, s_j and t_j.

    Only indices whose Green image fits in the computed span are processed.
    ``t`` is d_{j-1}^2 / d_j^2 as in the closed formula; ``t_measured`` is the
    actual coefficient of p_{j-1}.
    """
    n = seq.n
    seq.s, seq.t, seq.t_measured = [], [], []
    seq.bandwidth_report, seq.closed, seq.low_index_ok = [], [], []
    for j in range(n):
        if family_reach(seq.family, j) > n:
            break
        g = green_shift(seq.specs[j])
        dots = [seq.inner(g, p) for p in seq.specs]
        coef = {l: dots[l] / seq.norm_sq[l] for l in range(n) if dots[l]}
        recon = PolySpec.zero(seq.b)
        for l, c in coef.items():
            recon = recon + seq.specs[l].scaled(c)
        seq.closed.append(recon == g)
        seq.bandwidth_report.append(coef)
        seq.low_index_ok.append(all(dots[l] == 0 for l in range(n) if l + 2 < j))
        seq.s.append(dots[j] / seq.norm_sq[j])
        if j == 0:
            seq.t.append(Fraction(0))
            seq.t_measured.append(Fraction(0))
        else:
            seq.t.append(seq.norm_sq[j] / seq.norm_sq[j - 1])
            seq.t_measured.append(dots[j - 1] / seq.norm_sq[j - 1])
    return seq


def family_reach(family: str, j: int) -> int:
    """Number of slots needed to hold the Green image of slot j."""
    return j + 3 if family == "interleaved" else j + 2


def legendre(b: int, n: int, family: str = "interleaved") -> OrthogonalSequence:
    """Gram-Schmidt plus recursion data on n + 2 slots, so indices < n are complete."""
    seq = gram_schmidt(b, n + 2, family=family)
    return recursion_coefficients(seq)


@dataclass
class RecursionFamily:
    """Recursion data along a chain of slots of an orthogonal sequence.

    Position i of the chain is slot ``slots[i]``; ``prev``/``next`` refer to
    neighbouring chain positions.  ``t`` follows the closed formula (ratio of
    consecutive squared norms along the chain), ``t_measured`` is the actual
    coefficient of the previous element in the Green image.
    """

    name: str
    slots: list[int]
    s: list[Fraction]
    t: list[Fraction]
    t_measured: list[Fraction]
    three_term: list[bool]
    low_index_ok: list[bool]
    product_ok: list[bool]

    @property
    def is_three_term(self) -> bool:
        return bool(self.three_term) and all(self.three_term)

    def to_json_dict(self) -> dict:
        return {
            "slots": self.slots,
            "s": [frac_str(x) for x in self.s],
            "t": [frac_str(x) for x in self.t],
            "t_measured": [frac_str(x) for x in self.t_measured],
            "three_term": self.three_term,
            "low_index_ok": self.low_index_ok,
            "product_ok": self.product_ok,
        }


def family_recursion(seq: OrthogonalSequence, slots: list[int], name: str) -> RecursionFamily:
    """Check the three-term structure of the Green image along *slots*."""
    slots = [j for j in slots if j < len(seq.bandwidth_report)]
    fam = RecursionFamily(name, slots, [], [], [], [], [], [])
    prod = seq.norm_sq[slots[0]] if slots else None
    for i, j in enumerate(slots):
        rep = seq.bandwidth_report[j]
        prev = slots[i - 1] if i else None
        nxt = j + (slots[1] - slots[0] if len(slots) > 1 else 1)
        allowed = {j, nxt} | ({prev} if prev is not None else set())
        fam.three_term.append(seq.closed[j] and set(rep) <= allowed and rep.get(nxt) == 1)
        fam.s.append(rep.get(j, Fraction(0)))
        if prev is None:
            fam.t.append(Fraction(0))
            fam.t_measured.append(Fraction(0))
        else:
            fam.t.append(seq.norm_sq[j] / seq.norm_sq[prev])
            fam.t_measured.append(rep.get(prev, Fraction(0)))
            prod *= fam.t_measured[-1]
        fam.product_ok.append(prod == seq.norm_sq[j])
        g = green_shift(seq.specs[j])
        fam.low_index_ok.append(all(seq.inner(g, seq.specs[l]) == 0 for l in slots[: max(i - 2, 0)]))
    return fam


def recursion_families(seq: OrthogonalSequence) -> dict[str, RecursionFamily]:
    """The whole sequence as one chain, plus the two parity chains of the interleaved order."""
    done = len(seq.bandwidth_report)
    out = {seq.family: family_recursion(seq, list(range(done)), seq.family)}
    if seq.family == "interleaved":
        out["even"] = family_recursion(seq, list(range(0, done, 2)), "even")
        out["odd"] = family_recursion(seq, list(range(1, done, 2)), "odd")
    return out


@dataclass(frozen=True)
class NormalizedStep:
    j: int
    sqrt_t_next: mpmath.mpf
    s: mpmath.mpf
    sqrt_t: mpmath.mpf
    residual_exact: Fraction
    residual_mp: mpmath.mpf
    three_term: bool


def normalized_recursion(seq: OrthogonalSequence, family: RecursionFamily | None = None,
                         precision: int = DEFAULT_PRECISION) -> list[NormalizedStep]:
    """Orthonormal-form coefficients (sqrt t_next, s, sqrt t) along a chain, with residuals.

    The residual is the squared norm of
    g~ - sqrt(t_next) pi_next - s pi - sqrt(t) pi_prev,
    once exactly before square roots (where it equals
    d^2 |g - p_next - s p - t p_prev|^2) and once in mpmath with the rooted
    coefficients.  Positions whose band is not three-term are reported with
    ``three_term=False`` and a nonzero residual.
    """
    fam = family or recursion_families(seq)[seq.family]
    out = []
    with mpmath.workdps(precision):
        for i, j in enumerate(fam.slots):
            nxt = j + (fam.slots[1] - fam.slots[0] if len(fam.slots) > 1 else 1)
            if nxt >= seq.n:
                break
            prev = fam.slots[i - 1] if i else None
            t_next = seq.norm_sq[nxt] / seq.norm_sq[j]
            tj = fam.t[i]
            g = green_shift(seq.specs[j])
            resid = g - seq.specs[nxt] - seq.specs[j].scaled(fam.s[i])
            if prev is not None:
                resid = resid - seq.specs[prev].scaled(tj)
            exact = seq.inner(resid, resid) / seq.norm_sq[j]
            d = {k: 1 / mpmath.sqrt(to_mpf(seq.norm_sq[k])) for k in (j, nxt) + ((prev,) if prev is not None else ())}
            vecs = [(d[j], g), (-mpmath.sqrt(to_mpf(t_next)) * d[nxt], seq.specs[nxt]),
                    (-to_mpf(fam.s[i]) * d[j], seq.specs[j])]
            if prev is not None:
                vecs.append((-mpmath.sqrt(to_mpf(tj)) * d[prev], seq.specs[prev]))
            mp_res = mpmath.mpf(0)
            for c1, u in vecs:
                for c2, v in vecs:
                    mp_res += c1 * c2 * to_mpf(seq.inner(u, v))
            out.append(NormalizedStep(j, mpmath.sqrt(to_mpf(t_next)), to_mpf(fam.s[i]),
                                      mpmath.sqrt(to_mpf(tj)), exact, abs(mp_res), fam.three_term[i]))
    return out


def green_norm_squared(b: int, level: int) -> Fraction:
    check_branching(b)
    if isinstance(level, bool) or not isinstance(level, int) or level < 0:
        raise ValueError(f"level must be a non-negative integer, got {level!r}")
    return _green_norm_squared(b, level)


@lru_cache(maxsize=None)
def _green_norm_squared(b: int, level: int) -> Fraction:
    return green_quadrature_squared_selfsimilar(b, level)


def green_norm_estimate(b: int, level: int, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """sqrt of sum_{p,q} w(p) w(q) G(p,q)^2 over V_level."""
    if level < 2:
        raise ValueError("level must be at least 2")
    with mpmath.workdps(precision):
        return mpmath.sqrt(to_mpf(green_norm_squared(b, level)))
