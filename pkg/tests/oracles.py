"""Independent oracles for the test suite.

``derived_tables`` recomputes every coefficient sequence directly from the
self-similar structure (Green function on the first-level junctions plus the
scaling of the Laplacian under the copy maps), without the closed-form
recursions used by the package.  The interval helpers give exact closed forms
for b = 1, where the fractal is [0, 1] with Lebesgue measure and the
Laplacian is d^2/dx^2.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

Fr = Fraction


@lru_cache(maxsize=None)
def derived_tables(b: int, jmax: int) -> dict[str, tuple[Fraction, ...]]:
    """near/far junction values, a/b inner products and alpha/beta/eta/gamma up to jmax."""
    B = Fr(b)
    r = B / (2 * B + 1)
    rho = r / (B + 2)
    lam = 1 / (B + 2)
    g_diag, g_off = r * r * (B + 1) / B, r * r
    near, far = [(B + 1) / (2 * B + 1)], [B / (2 * B + 1)]
    A, Bv = [(B + 1) / (2 + 4 * B)], [B / (2 + 4 * B)]
    # (image of q1, image of q2) for copies 1..b+2
    ends = [("p1", "p2")] * b + [("q1", "p1"), ("p2", "q2")]

    def val(s, k, pt):
        if pt in ("q1", "q2"):
            return Fr(int(s == 0 and int(pt[1]) == k))
        return near[s] if (pt == "p1") == (k == 1) else far[s]

    def ip(m, n, kp):
        return A[m] if n == kp else Bv[m]

    def restricted_inner(s, k, i, kp):
        # integral of f_{0 kp} against f_{sk} o F_i
        return sum(rho**m * val(s - m, k, ends[i][n - 1]) * ip(m, n, kp)
                   for m in range(s + 1) for n in (1, 2))

    for j in range(1, jmax + 1):
        s = j - 1
        # mass of f_{s1} seen by the tents at p1 and p2
        t1 = lam * (restricted_inner(s, 1, b, 2) + sum(restricted_inner(s, 1, i, 1) for i in range(b)))
        t2 = lam * (restricted_inner(s, 1, b + 1, 1) + sum(restricted_inner(s, 1, i, 2) for i in range(b)))
        near.append(-g_diag * t1 - g_off * t2)
        far.append(-g_off * t1 - g_diag * t2)

        def system(kp):
            cA = cB = c0 = Fr(0)
            for i in range(b + 2):
                for m in range(j + 1):
                    for n in (1, 2):
                        for n2 in (1, 2):
                            w = lam * rho**m * val(j - m, 1, ends[i][n - 1]) * val(0, kp, ends[i][n2 - 1])
                            if not w:
                                continue
                            if m == j:
                                if n == n2:
                                    cA += w
                                else:
                                    cB += w
                            else:
                                c0 += w * ip(m, n, n2)
            return cA, cB, c0

        a1, b1, r1 = system(1)
        a2, b2, r2 = system(2)
        m11, m12, m21, m22 = 1 - a1, -b1, -a2, 1 - b2
        det = m11 * m22 - m12 * m21
        A.append((r1 * m22 - m12 * r2) / det)
        Bv.append((m11 * r2 - m21 * r1) / det)

    alpha, beta, eta, gamma = [Fr(1)], [Fr(-1)], [Fr(0)], [Fr(-1)]
    for j in range(1, jmax + 1):
        alpha.append((near[j] + sum(alpha[j - m] * far[m] for m in range(1, j + 1))) / (rho**j - r))
        beta.append(sum(beta[j - m] * far[m] for m in range(1, j + 1)) / (r * rho**j - r))
        eta.append(Bv[j - 1] + alpha[j] + sum(alpha[j - m] * A[m - 1] for m in range(1, j + 1)))
        gamma.append(beta[j] + sum(beta[j - m] * A[m - 1] for m in range(1, j + 1)))
    return {"near": tuple(near), "far": tuple(far), "a": tuple(A), "b": tuple(Bv),
            "alpha": tuple(alpha), "beta": tuple(beta), "eta": tuple(eta), "gamma": tuple(gamma)}


# -- exact polynomials on [0, 1] ---------------------------------------------------
# coefficient lists, lowest degree first

def peval(p, x):
    out = Fr(0)
    for c in reversed(p):
        out = out * x + c
    return out


def padd(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def pscale(p, c):
    return [c * x for x in p]


def pmul(p, q):
    out = [Fr(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


def pint01(p):
    """Integral over [0, 1]."""
    return sum(Fr(c) / (i + 1) for i, c in enumerate(p))


def pderiv(p):
    return [i * c for i, c in enumerate(p)][1:] or [Fr(0)]


def dirichlet_solve(p):
    """u with u'' = p and u(0) = u(1) = 0."""
    u = [Fr(0), Fr(0)] + [Fr(c) / ((i + 1) * (i + 2)) for i, c in enumerate(p)]
    u[1] = -peval(u, 1)
    return u


def interval_f(j: int, k: int):
    """f_{jk} on [0, 1]: (d^2/dx^2)^m f_{jk} at q_n is delta_{jm} delta_{kn}."""
    u = [Fr(1), Fr(-1)] if k == 1 else [Fr(0), Fr(1)]
    for _ in range(j):
        u = dirichlet_solve(u)
    return u


def interval_monomial(j: int, k: int):
    """P_{jk} on [0, 1]: x^{2j}/(2j)! for k = 1 and -x^{2j+1}/(2j+1)! for k = 2."""
    n = 2 * j + k - 1
    p = [Fr(0)] * n + [Fr(1, math.factorial(n))]
    return p if k == 1 else pscale(p, -1)


def shifted_legendre(n: int):
    """Monic-free shifted Legendre P_n(2x - 1) with integer coefficients."""
    return [Fr((-1) ** (n + i) * math.comb(n, i) * math.comb(n + i, i)) for i in range(n + 1)]


def orthonormal_legendre_value(n: int, x: float) -> float:
    """sqrt(2n+1) P_n(2x-1), orthonormal on [0, 1]."""
    return math.sqrt(2 * n + 1) * float(peval(shifted_legendre(n), Fr(x)))


def b1_coordinate(addr) -> Fraction:
    """Position in [0, 1] of a vertex address for b = 1 (copies 1 middle, 2 left, 3 right)."""
    x = Fr(0) if addr.anchor == 1 else Fr(1)
    for i in reversed(addr.word):
        x = (x + {2: 0, 1: 1, 3: 2}[i]) / 3
    return x
