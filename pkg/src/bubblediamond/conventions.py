"""Pick the reading of the coefficient recursions that survives independent checks.

Every :class:`Convention` bundle (2^6 of them) is scored on

exact stage
    * ``unit``: <P_{01}, P_{01}> = 1 from the closed-form inner products;
    * ``symmetry``: the closed form of <P_{jk}, P_{j'k'}> equals that of
      <P_{j'k'}, P_{jk}>;
    * ``hankel``: the closed form equals the inner product computed from the
      monomial jets and the multiharmonic inner products;
    * ``junction``: P_{j1}(p1) computed from the jet and the junction values
      equals rho^j alpha_j (the scaling identity of P_{j1} on the copy
      containing q1);

quadrature stage (optional)
    every probed table entry matches the sparse finite-element oracle of
    :mod:`bubblediamond.calculus` on two levels, with error not increasing
    and below a relative tolerance on the finer level.

Exactly one survivor is required; otherwise :class:`ConventionError` carries
the residual table.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .calculus import discrete_tables
from .coefficients import Convention, ConventionError, monomial_tables, rho
from .orthopoly import _closed_form
from .polyspace import inner, monomial_to_fbasis
from .topology import check_branching, vertex_count

EXACT_CHECKS = ("unit", "symmetry", "hankel", "junction")
QUAD_KEYS = ("a", "b", "near", "far", "alpha", "beta", "eta", "gamma")
VERTEX_BUDGET = 400_000
# Entries the finite-element oracle reproduces exactly show only round-off
# (observed <= 2e-13 at level 8); decay is judged above this floor.
ROUNDOFF_FLOOR = 1e-12


def all_conventions() -> list[Convention]:
    axes = Convention.AXES
    return [Convention(**dict(zip(axes, combo))) for combo in itertools.product(*axes.values())]


def auto_levels(b: int, finest: int = 8) -> tuple[int, int] | None:
    """The two probe levels (l-2, l): l <= finest and |V_l| within budget."""
    level = finest
    while level >= 3 and vertex_count(b, level) > VERTEX_BUDGET:
        level -= 1
    return (level - 2, level) if level >= 3 else None


@lru_cache(maxsize=None)
def _discrete(b: int, level: int, jmax: int) -> dict[str, tuple]:
    return {k: tuple(v) for k, v in discrete_tables(b, level, jmax).items()}


def _err(v: Fraction, approx) -> float:
    """|v - approx| without rounding v to double first."""
    return float(abs(np.longdouble(v.numerator) / np.longdouble(v.denominator) - approx))


def table_entry(mono, key: str, j: int) -> Fraction:
    multi = mono.multi
    return {
        "a": multi.a, "b": multi.b_, "near": multi.near, "far": multi.far,
        "alpha": mono.alpha, "beta": mono.beta, "eta": mono.eta, "gamma": mono.gamma,
    }[key][j]


def quadrature_errors(mono, levels: tuple[int, int], jmax: int) -> dict[tuple[str, int], tuple[float, float, float]]:
    """(value, error at coarse level, error at fine level) per probed entry."""
    coarse = _discrete(mono.b, levels[0], jmax)
    fine = _discrete(mono.b, levels[1], jmax)
    out = {}
    for key in QUAD_KEYS:
        for j in range(jmax + 1):
            v = table_entry(mono, key, j)
            out[key, j] = (float(v), _err(v, coarse[key][j]), _err(v, fine[key][j]))
    return out


def entry_ok(v: float, e_coarse: float, e_fine: float, rel_tol: float) -> bool:
    """Fine error below coarse error and within rel_tol, unless both sit at round-off."""
    floor = ROUNDOFF_FLOOR * max(abs(v), 1.0)
    if e_fine <= floor:
        return True
    return e_fine < e_coarse and e_fine <= rel_tol * abs(v)


def quadrature_ok(errs, rel_tol: float) -> bool:
    return all(entry_ok(*e, rel_tol) for e in errs.values())


@dataclass
class BundleScore:
    convention: Convention
    residuals: dict[str, Fraction | float] = field(default_factory=dict)
    error: str = ""
    quadrature: bool | None = None

    @property
    def exact_ok(self) -> bool:
        return not self.error and all(self.residuals.get(c) == 0 for c in EXACT_CHECKS)

    @property
    def ok(self) -> bool:
        return self.exact_ok and self.quadrature is not False


@dataclass
class ConventionReport:
    b: int
    convention: Convention
    scores: list[BundleScore]
    levels: tuple[int, int] | None

    def table(self) -> str:
        return format_table(self.scores)

    def as_dict(self) -> dict:
        return {
            "bundle": self.convention.as_dict(),
            "b": self.b,
            "candidates": len(self.scores),
            "survivors": sum(s.ok for s in self.scores),
            "quadrature_levels": list(self.levels) if self.levels else None,
        }


def format_table(scores: list[BundleScore]) -> str:
    head = ["eta_lead", "-1", "ab_sum", "init", "sum_seq", "pq"] + list(EXACT_CHECKS) + ["quad", "ok"]
    lines = ["\t".join(head)]
    for s in scores:
        c = s.convention
        cells = [c.eta_lead, str(c.minus_one), c.ab_summand, c.initial, c.sum_sequence, c.pq_scale]
        if s.error:
            cells += ["err"] * len(EXACT_CHECKS)
        else:
            cells += ["%.3g" % float(s.residuals.get(k, float("nan"))) for k in EXACT_CHECKS]
        cells += ["-" if s.quadrature is None else str(s.quadrature), str(s.ok)]
        lines.append("\t".join(cells))
    return "\n".join(lines)


@lru_cache(maxsize=None)
def _hankel_gram(b: int, jprobe: int, ab_summand: str, pq_scale: str) -> dict:
    """<P_u, P_v> from jets and multiharmonic inner products; depends on two axes only."""
    mono = monomial_tables(b, 2 * jprobe + 2, Convention(ab_summand=ab_summand, pq_scale=pq_scale))
    idx = [(j, k) for j in range(jprobe + 1) for k in (1, 2)]
    specs = {jk: monomial_to_fbasis(b, *jk, mono) for jk in idx}
    return {(u, v): inner(specs[u], specs[v], mono.multi) for u, v in itertools.product(idx, idx)}


def score_exact(b: int, conv: Convention, jprobe: int) -> BundleScore:
    score = BundleScore(conv)
    try:
        mono = monomial_tables(b, 2 * jprobe + 2, conv)
    except ZeroDivisionError as exc:
        score.error = str(exc)
        return score
    multi = mono.multi
    idx = [(j, k) for j in range(jprobe + 1) for k in (1, 2)]
    cf = {(u, v): _closed_form(*u, *v, mono) for u, v in itertools.product(idx, idx)}
    hankel = _hankel_gram(b, jprobe, conv.ab_summand, conv.pq_scale)
    score.residuals["unit"] = abs(cf[(0, 1), (0, 1)] - 1)
    score.residuals["symmetry"] = max(abs(cf[u, v] - cf[v, u]) for u, v in cf)
    score.residuals["hankel"] = max(abs(cf[key] - hankel[key]) for key in cf)
    rh = rho(b)
    junc = Fraction(0)
    for j in range(jprobe + 1):
        at_p1 = multi.near[j] + sum(mono.alpha[j - m] * multi.far[m] for m in range(j + 1))
        junc = max(junc, abs(at_p1 - rh**j * mono.alpha[j]))
    score.residuals["junction"] = junc
    return score


def resolve_conventions(b: int, jmax_probe: int = 3, quadrature_levels: tuple[int, int] | str | None = None,
                        quad_jmax: int = 3, rel_tol: float = 1e-2) -> ConventionReport:
    """Score every bundle; return the unique survivor or raise ConventionError.

    ``quadrature_levels`` is ``None`` (exact stage only), ``"auto"`` or an
    explicit pair of graph levels for the oracle comparison.
    """
    check_branching(b)
    if quadrature_levels is not None and quadrature_levels != "auto":
        quadrature_levels = tuple(quadrature_levels)
    return _resolve(b, jmax_probe, quadrature_levels, quad_jmax, rel_tol)


@lru_cache(maxsize=None)
def _resolve(b: int, jmax_probe: int, quadrature_levels, quad_jmax: int, rel_tol: float) -> ConventionReport:
    if jmax_probe < 2:
        raise ValueError("jmax_probe must be at least 2")
    levels = auto_levels(b) if quadrature_levels == "auto" else quadrature_levels
    scores = [score_exact(b, conv, jmax_probe) for conv in all_conventions()]
    if levels is not None:
        for s in scores:
            if s.error:
                continue
            mono = monomial_tables(b, max(quad_jmax, 2 * jmax_probe + 2), s.convention)
            errs = quadrature_errors(mono, levels, quad_jmax)
            s.quadrature = quadrature_ok(errs, rel_tol)
            worst = max(e_fine / abs(v) if v else e_fine for v, _, e_fine in errs.values())
            s.residuals["quad_rel"] = worst
    survivors = [s for s in scores if s.ok]
    if not survivors:
        raise ConventionError(f"no consistent convention for b={b}", format_table(scores))
    if len(survivors) > 1:
        raise ConventionError(f"ambiguous convention for b={b}: {len(survivors)} bundles survive",
                              format_table(scores))
    return ConventionReport(b, survivors[0].convention, scores, levels)
