"""Independent brute-force oracles used only by the test suite.

These deliberately avoid the library's barycentric fast path: polynomial
evaluation goes through coefficient vectors obtained by solving the
Vandermonde system with plain Gaussian elimination mod p.
"""

import itertools
from fractions import Fraction


def solve_mod(A, b, p):
    """Solve A x = b over F_p by Gaussian elimination; A square invertible."""
    n = len(A)
    M = [row[:] + [bv] for row, bv in zip(A, b)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if M[r][col] % p != 0)
        M[col], M[pivot] = M[pivot], M[col]
        inv = pow(M[col][col], p - 2, p)
        M[col] = [v * inv % p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                factor = M[r][col]
                M[r] = [(a - factor * b) % p for a, b in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def vandermonde_coeffs(values, p):
    """Coefficients of the unique degree-(k-1) polynomial through (i, values[i])."""
    k = len(values)
    A = [[pow(i, e, p) for e in range(k)] for i in range(k)]
    return solve_mod(A, list(values), p)


def poly_eval(coeffs, t, p):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * t + c) % p
    return acc


def vandermonde_lde_eval(data, k, m, point, p):
    """m-variate LDE via coefficient form: solve the full k^m x k^m system
    in the monomial basis, then evaluate the monomials at the point."""
    cells = list(itertools.product(range(k), repeat=m))
    exps = list(itertools.product(range(k), repeat=m))
    A = [[_monomial(cell, e, p) for e in exps] for cell in cells]
    coeffs = solve_mod(A, list(data), p)
    return sum(c * _monomial(point, e, p) for c, e in zip(coeffs, exps)) % p


def _monomial(point, exps, p):
    acc = 1
    for x, e in zip(point, exps):
        acc = acc * pow(x, e, p) % p
    return acc


def exhaustive_hybrid_distance(x, candidates, d1_masses, d2_masses):
    """min over candidates of max(d_D1, d_D2), exact Fractions."""
    best = None
    for cand in candidates:
        a = sum((m for m, (u, v) in zip(d1_masses, zip(x, cand)) if u != v), Fraction(0))
        b = sum((m for m, (u, v) in zip(d2_masses, zip(x, cand)) if u != v), Fraction(0))
        d = max(a, b)
        if best is None or d < best:
            best = d
    return best
