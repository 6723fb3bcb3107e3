"""Tiny exact linear algebra over Fraction (row reduction, solves, kernels)."""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence


def rref(rows: Sequence[Sequence]) -> tuple[list, list]:
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def solve(A, b):
    """Unique solution of the square system A x = b, or None when A is singular."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    red, piv = rref(aug)
    if piv != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def kernel(rows, ncols: int) -> list:
    """Basis of the right null space."""
    red, piv = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in zip(red, piv):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def primitive(v) -> tuple:
    """Scale a rational vector to the primitive integer vector on its ray."""
    v = [Fraction(x) for x in v]
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))
