"""Exact coefficient sequences of the multiharmonic and monomial bases.

Multiharmonic basis f_{jk}: Delta^m f_{jk}(q_n) = delta_{jm} delta_{kn}.  Its data are

* ``a[j] = <f_{j1}, f_{01}>`` and ``b_[j] = <f_{j1}, f_{02}>``,
* ``near[j] = f_{j1}(p1)`` and ``far[j] = f_{j1}(p2)`` where p1 is the junction
  next to q1 and p2 the junction next to q2 (mirror symmetry gives the k = 2
  values), and the rescaled ``p[j] = rho^j near[j]``, ``q[j] = rho^j far[j]``
  with ``rho = r/(b+2)``.

Monomials P_{jk}: Delta^m P_{jk}(q1) = delta_{mj} delta_{k1} and
d_n Delta^m P_{jk}(q1) = delta_{mj} delta_{k2}.  Their data are
``alpha[j] = P_{j1}(q2)``, ``beta[j] = P_{j2}(q2)``, ``eta[j] = d_n P_{j1}(q2)``,
``gamma[j] = d_n P_{j2}(q2)``.

The printed recursions admit several readings; :class:`Convention` names one
reading per ambiguous spot and :mod:`bubblediamond.conventions` selects the
one that agrees with independent checks.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

from ._rational import frac_str
from .topology import check_branching


@dataclass(frozen=True)
class Convention:
    """One reading of every ambiguous spot in the recursions.

    eta_lead
        ``"inner"``: the leading ``b_{j-1}`` of the eta recursion is the inner
        product b_{j-1}; ``"beta"``: it is beta_{j-1}.
    minus_one
        Value given to the index -1 term of the eta/gamma sums (0 or 1).
    ab_summand
        ``"printed"``: the second a/b equation carries ``(a_j + b_j)`` inside
        its sum; ``"summation"``: it carries ``(a_l + b_l)`` like the first.
    initial
        ``"printed"``: eta_0 = -1, gamma_0 = 1; ``"definition"``: the values
        forced by the boundary conditions, eta_0 = 0, gamma_0 = -1.
    sum_sequence
        Sequence multiplying alpha/beta in the eta/gamma sums: ``"alpha"`` as
        printed or the inner products ``"a"``.
    pq_scale
        ``"inverse"``: the p/q recursion produces rho^{-j} times the junction
        values; ``"direct"``: rho^{+j} times them.
    """

    eta_lead: str = "inner"
    minus_one: int = 1
    ab_summand: str = "summation"
    initial: str = "definition"
    sum_sequence: str = "a"
    pq_scale: str = "inverse"

    AXES = {
        "eta_lead": ("inner", "beta"),
        "minus_one": (0, 1),
        "ab_summand": ("printed", "summation"),
        "initial": ("printed", "definition"),
        "sum_sequence": ("alpha", "a"),
        "pq_scale": ("inverse", "direct"),
    }

    def __post_init__(self):
        for name, allowed in self.AXES.items():
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}")

    def as_dict(self) -> dict:
        return asdict(self)

    def label(self) -> str:
        return ",".join(f"{k}={v}" for k, v in self.as_dict().items())


DEFAULT_CONVENTION = Convention()


class ConventionError(RuntimeError):
    """Raised when the convention harness finds zero or several consistent readings."""

    def __init__(self, message: str, table: str = ""):
        super().__init__(message + ("\n" + table if table else ""))
        self.table = table


def rho(b: int) -> Fraction:
    return Fraction(b, (2 * b + 1) * (b + 2))


@dataclass(frozen=True)
class MultiharmonicTables:
    b: int
    jmax: int
    a: tuple[Fraction, ...]
    b_: tuple[Fraction, ...]
    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]
    near: tuple[Fraction, ...]
    far: tuple[Fraction, ...]
    convention: Convention = field(default=DEFAULT_CONVENTION)

    def inner(self, m: int, k: int, m2: int, k2: int) -> Fraction:
        """<f_{mk}, f_{m2 k2}>: depends only on m + m2 and on whether k == k2."""
        s = m + m2
        if s > self.jmax:
            raise IndexError(f"tables cover degree {self.jmax}, need {s}")
        return self.a[s] if k == k2 else self.b_[s]

    def junction(self, m: int, k: int, point: int) -> Fraction:
        """f_{mk} at junction p1 (point=1) or p2 (point=2)."""
        if m > self.jmax:
            raise IndexError(f"tables cover degree {self.jmax}, need {m}")
        return self.near[m] if point == k else self.far[m]

    def to_json_dict(self) -> dict:
        return {
            "b": self.b,
            "jmax": self.jmax,
            "a": [frac_str(x) for x in self.a],
            "b_": [frac_str(x) for x in self.b_],
            "p": [frac_str(x) for x in self.p],
            "q": [frac_str(x) for x in self.q],
            "near": [frac_str(x) for x in self.near],
            "far": [frac_str(x) for x in self.far],
        }


@dataclass(frozen=True)
class MonomialTables:
    b: int
    jmax: int
    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]
    eta: tuple[Fraction, ...]
    gamma: tuple[Fraction, ...]
    convention: Convention
    multi: MultiharmonicTables

    def to_json_dict(self) -> dict:
        return {
            "b": self.b,
            "jmax": self.jmax,
            "alpha": [frac_str(x) for x in self.alpha],
            "beta": [frac_str(x) for x in self.beta],
            "eta": [frac_str(x) for x in self.eta],
            "gamma": [frac_str(x) for x in self.gamma],
            "convention": self.convention.as_dict(),
        }


def _check_jmax(jmax) -> int:
    if isinstance(jmax, bool) or not isinstance(jmax, int) or jmax < 0:
        raise ValueError(f"jmax must be a non-negative integer, got {jmax!r}")
    return jmax


def multiharmonic_tables(b: int, jmax: int, convention: Convention = DEFAULT_CONVENTION) -> MultiharmonicTables:
    """Solve the coupled a/b and p/q recursions up to index *jmax*.

    For each j the p/q recursion uses only lower indices; a_j, b_j then solve
    a 2x2 linear system whose right side involves p_1..p_j, q_1..q_j.
    """
    # validate before the cache: True and 1 share a cache key
    check_branching(b)
    _check_jmax(jmax)
    return _multiharmonic_tables(b, jmax, convention)


@lru_cache(maxsize=None)
def _multiharmonic_tables(b: int, jmax: int, convention: Convention) -> MultiharmonicTables:
    return MultiharmonicTables(b, jmax, *_multiharmonic_core(b, jmax, convention.ab_summand, convention.pq_scale),
                               convention)


# Only two reading axes touch these tables; caching on them alone keeps the
# 64-bundle harness cheap.
@lru_cache(maxsize=None)
def _multiharmonic_core(b: int, jmax: int, ab_summand: str, pq_scale: str) -> tuple:
    B = Fraction(b)
    a = [(B + 1) / (2 + 4 * B)]
    bb = [B / (2 + 4 * B)]
    ph = [(B + 1) / (2 * B + 1)]
    qh = [B / (2 * B + 1)]
    nu1 = (2 * B**3 + 8 * B**2 + 7 * B + 2) / (2 * B + 1)
    nu2 = (2 * B**3 + 6 * B**2 + 6 * B + 2) / (2 * B + 1)
    up1 = (2 * B**3 + 4 * B**2 + 2 * B) / (2 * B + 1)
    up2 = (2 * B**3 + 6 * B**2 + 3 * B) / (2 * B + 1)
    for j in range(1, jmax + 1):
        pj = -sum(ph[j - l - 1] * ((B + 1) ** 2 * a[l] + B**2 * bb[l])
                  + B * (B + 1) * qh[j - l - 1] * (a[l] + bb[l]) for l in range(j)) - (B + 1) * bb[j - 1]
        qj = -sum(B * (B + 1) * ph[j - l - 1] * (a[l] + bb[l])
                  + qh[j - l - 1] * ((B + 1) ** 2 * a[l] + B**2 * bb[l]) for l in range(j)) - B * bb[j - 1]
        ph.append(pj / (2 * B + 1))
        qh.append(qj / (2 * B + 1))
        lead = Fraction((b + 2) ** (j + 1) * (2 * b + 1) ** (j + 1), b**j)
        s1 = (B + 1) * sum((a[l] + bb[l]) * ((B + 1) * ph[j - l] + B * qh[j - l]) for l in range(j))
        m11, m12 = lead - nu1, -nu2
        m21, m22 = -up1, lead - up2
        if ab_summand == "summation":
            s2 = (B + 1) * sum((a[l] + bb[l]) * (B * ph[j - l] + (B + 1) * qh[j - l]) for l in range(j))
        else:
            # (a_j + b_j) is an unknown; its coefficient moves to the left side
            c = (B + 1) * sum(B * ph[j - l] + (B + 1) * qh[j - l] for l in range(j))
            s2 = Fraction(0)
            m21 -= c
            m22 -= c
        det = m11 * m22 - m12 * m21
        if det == 0:
            raise ZeroDivisionError(f"singular a/b system at j={j} (b={b}, ab_summand={ab_summand})")
        a.append((s1 * m22 - m12 * s2) / det)
        bb.append((m11 * s2 - m21 * s1) / det)
    rh = rho(b)
    if pq_scale == "inverse":
        near = [rh**j * x for j, x in enumerate(ph)]
        far = [rh**j * x for j, x in enumerate(qh)]
    else:
        near = [x / rh**j for j, x in enumerate(ph)]
        far = [x / rh**j for j, x in enumerate(qh)]
    p = [rh**j * x for j, x in enumerate(near)]
    q = [rh**j * x for j, x in enumerate(far)]
    return tuple(a), tuple(bb), tuple(p), tuple(q), tuple(near), tuple(far)


def zeta(b: int, j: int) -> Fraction:
    B = Fraction(b)
    grow = Fraction((b + 2) ** (j - 1) * (2 * b + 1) ** (j - 1), b ** (j - 1))
    return (B + 1) ** 2 / ((B + 2) * (2 * B + 1) * (grow - 1))


def iota(b: int, j: int) -> Fraction:
    B = Fraction(b)
    grow = Fraction((b + 2) ** j * (2 * b + 1) ** j, b**j)
    return (B + 1) ** 2 / ((2 * B + 1) * (grow - 1))


def monomial_tables(b: int, jmax: int, convention: Convention | None = None) -> MonomialTables:
    """alpha, beta, eta, gamma up to index *jmax*.

    With ``convention=None`` the reading is chosen by the exact stage of the
    convention harness for this *b*.
    """
    check_branching(b)
    _check_jmax(jmax)
    if convention is None:
        from .conventions import resolve_conventions
        convention = resolve_conventions(b).convention
    return _monomial_tables(b, jmax, convention)


@lru_cache(maxsize=None)
def _monomial_tables(b: int, jmax: int, convention: Convention) -> MonomialTables:
    multi = multiharmonic_tables(b, jmax, convention)
    alpha, beta = _alpha_beta(b, jmax)
    seq = alpha if convention.sum_sequence == "alpha" else list(multi.a)

    def lower(i: int) -> Fraction:
        return Fraction(convention.minus_one) if i < 0 else seq[i]

    if convention.initial == "printed":
        eta, gamma = [Fraction(-1)], [Fraction(1)]
    else:
        eta, gamma = [Fraction(0)], [Fraction(-1)]
    for j in range(1, jmax + 1):
        lead = multi.b_[j - 1] if convention.eta_lead == "inner" else beta[j - 1]
        eta.append(lead + sum(alpha[j - l] * lower(l - 1) for l in range(j + 1)))
        gamma.append(sum(beta[j - l] * lower(l - 1) for l in range(j + 1)))
    return MonomialTables(b, jmax, alpha, beta, tuple(eta), tuple(gamma), convention, multi)


@lru_cache(maxsize=None)
def _alpha_beta(b: int, jmax: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """alpha and beta: independent of every reading axis."""
    alpha = [Fraction(1), Fraction(1, 2)][: jmax + 1]
    for j in range(2, jmax + 1):
        alpha.append(zeta(b, j) * sum(
            alpha[j - l] * (2 * alpha[l] + sum(alpha[l - lp] * alpha[lp] for lp in range(1, l + 1)))
            for l in range(1, j)))
    beta = [Fraction(-1)]
    for j in range(1, jmax + 1):
        beta.append(iota(b, j) * sum(beta[l] * alpha[lp] * alpha[j - l - lp]
                                     for l in range(j) for lp in range(j - l + 1)))
    return tuple(alpha), tuple(beta)


def tables_json(b: int, jmax: int, convention: Convention | None = None) -> dict:
    mono = monomial_tables(b, jmax, convention)
    out = mono.multi.to_json_dict()
    out.update(mono.to_json_dict())
    return out
