"""Exact spectral helpers: integer characteristic polynomials, Sturm
isolation of the largest real root, and entropy comparisons.

Polynomials are coefficient lists, highest degree first, over int or
Fraction.  Nonnegative integer transition matrices have their spectral
radius among the real roots, so the largest real root of the
characteristic polynomial is the Perron root.
"""
from __future__ import annotations

import math
from fractions import Fraction


def charpoly(matrix: list[list[int]]) -> list[int]:
    """det(xI - M) by the Berkowitz algorithm (division-free, exact)."""
    n = len(matrix)
    if n == 0:
        return [1]
    # Toeplitz vector accumulation; poly stored lowest-degree-last below.
    poly = [1, -matrix[0][0]]
    for k in range(1, n):
        a = matrix[k][k]
        row = matrix[k][:k]
        col = [matrix[idx][k] for idx in range(k)]
        sub = [matrix[r][:k] for r in range(k)]
        # entries t_m = row * sub^(m-2) * col
        ts = [1, -a]
        vec = col
        for _ in range(k):
            ts.append(-sum(r * v for r, v in zip(row, vec)))
            vec = [sum(sub[r][c] * vec[c] for c in range(k)) for r in range(k)]
        new = [0] * (k + 2)
        for i, c in enumerate(poly):
            for j, t in enumerate(ts):
                if i + j <= k + 1:
                    new[i + j] += c * t
        poly = new[: k + 2]
    return poly


def poly_eval(poly, x):
    acc = 0
    for c in poly:
        acc = acc * x + c
    return acc


def poly_derivative(poly):
    n = len(poly) - 1
    return [c * (n - i) for i, c in enumerate(poly[:-1])] or [0]


def poly_divmod(num, den):
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    while den and den[0] == 0:
        den = den[1:]
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    quot: list[Fraction] = []
    while len(num) >= len(den) and any(num):
        lead = num[0] / den[0]
        quot.append(lead)
        for i in range(len(den)):
            num[i] -= lead * den[i]
        num = num[1:]
    while num and num[0] == 0:
        num = num[1:]
    if not quot:
        quot = [Fraction(0)]
    return quot, num


def poly_divides(d, p) -> bool:
    """Exact divisibility of integer polynomials."""
    _, rem = poly_divmod(p, d)
    return not rem


def _sturm_chain(poly):
    chain = [[Fraction(c) for c in poly]]
    der = poly_derivative(poly)
    if any(der):
        chain.append([Fraction(c) for c in der])
    while len(chain[-1]) > 1:
        _, rem = poly_divmod(chain[-2], chain[-1])
        if not rem:
            break
        chain.append([-c for c in rem])
    return chain


def _variations(chain, x) -> int:
    signs = []
    for p in chain:
        v = poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _squarefree(poly):
    """poly / gcd(poly, poly'), over Fractions."""
    a = [Fraction(c) for c in poly]
    b = [Fraction(c) for c in poly_derivative(poly)]
    while b and any(b):
        _, r = poly_divmod(a, b)
        a, b = b, r
    if len(a) <= 1:
        return [Fraction(c) for c in poly]
    q, _ = poly_divmod(poly, a)
    return q


def largest_real_root(poly, tol=Fraction(1, 10**13)):
    """Largest real root of an integer polynomial as an exact bracket.

    Returns (lo, hi) Fractions with hi - lo <= tol containing the root,
    or None if the polynomial has no real root.  Sturm counts make the
    bisection exact; the polynomial is made squarefree first.
    """
    poly = [c for c in poly]
    while poly and poly[0] == 0:
        poly = poly[1:]
    if len(poly) <= 1:
        return None
    sf = _squarefree(poly)
    chain = _sturm_chain(sf)
    lead = abs(sf[0])
    bound = Fraction(1) + max(abs(c) for c in sf) / lead
    lo, hi = -bound, bound
    if _variations(chain, lo) - _variations(chain, hi) == 0:
        return None
    # push lo up while keeping at least one root in (lo, hi]
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _variations(chain, mid) - _variations(chain, hi) > 0:
            lo = mid
        else:
            hi = mid
    return (lo, hi)


def perron_root(matrix) -> tuple[list[int], Fraction, Fraction]:
    """Characteristic polynomial and an exact bracket of the Perron root."""
    poly = charpoly(matrix)
    bracket = largest_real_root(poly)
    if bracket is None or bracket[1] < 0:
        return poly, Fraction(0), Fraction(0)
    lo, hi = bracket
    if hi < 1:  # spectral radius of a nilpotent integer matrix
        return poly, Fraction(0), Fraction(0)
    return poly, lo, hi


def entropy_from_root(root: float) -> float:
    return math.log(root) if root > 1 else 0.0


def format_poly(poly) -> str:
    n = len(poly) - 1
    terms = []
    for i, c in enumerate(poly):
        if c == 0:
            continue
        d = n - i
        if d == 0:
            terms.append(f"{c:+d}")
        elif d == 1:
            terms.append(f"{c:+d}x")
        else:
            terms.append(f"{c:+d}x^{d}")
    return " ".join(terms) if terms else "0"
