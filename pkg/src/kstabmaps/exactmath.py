"""Exact rationals and small univariate/bivariate polynomials.

Rationals are plain ``fractions.Fraction`` values. Polynomials are immutable and
store only exact coefficients; nothing in here ever touches a float.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DegreeOverflow, InconsistentSamples

Rational = Fraction


def Q(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction. Floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not s:
            raise ValueError("empty rational string")
        return Fraction(s)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fmt(x) -> str:
    """Serialize a rational as "p/q" (or "p" when q = 1)."""
    x = Q(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _trim(coeffs: Iterable) -> tuple:
    c = [Q(a) for a in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial, coefficients listed from the constant term up."""

    coefficients: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _trim(self.coefficients))

    @classmethod
    def monomial(cls, c, d: int) -> "UniPoly":
        return cls((0,) * d + (c,))

    @property
    def degree(self) -> int:
        # the zero polynomial reports degree 0, is_zero tells them apart
        return max(len(self.coefficients) - 1, 0)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def coeff(self, i: int) -> Fraction:
        if 0 <= i < len(self.coefficients):
            return self.coefficients[i]
        return Fraction(0)

    @property
    def leading(self) -> Fraction:
        return self.coefficients[-1] if self.coefficients else Fraction(0)

    def __call__(self, x) -> Fraction:
        x = Q(x)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        other = _as_unipoly(other)
        n = max(len(self.coefficients), len(other.coefficients))
        return UniPoly(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return UniPoly(-c for c in self.coefficients)

    def __sub__(self, other):
        return self + (-_as_unipoly(other))

    def __rsub__(self, other):
        return _as_unipoly(other) - self

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            s = Q(other)
            return UniPoly(s * c for c in self.coefficients)
        if self.is_zero or other.is_zero:
            return UniPoly()
        out = [Fraction(0)] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = UniPoly((1,))
        for _ in range(e):
            out = out * self
        return out

    def divmod(self, other: "UniPoly"):
        """Polynomial long division over Q."""
        if other.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coefficients)
        dq = other.degree
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] / other.leading
            if c:
                quot[i - dq] = c
                for j, b in enumerate(other.coefficients):
                    rem[i - dq + j] -= c * b
        return UniPoly(quot), UniPoly(rem[:dq])

    def derivative(self) -> "UniPoly":
        return UniPoly(i * c for i, c in enumerate(self.coefficients) if i > 0)

    def compose_scale(self, s) -> "UniPoly":
        """p(s*x)."""
        s = Q(s)
        return UniPoly(c * s**i for i, c in enumerate(self.coefficients))

    def to_json(self) -> list:
        return [fmt(c) for c in self.coefficients]

    @classmethod
    def from_json(cls, data: Sequence) -> "UniPoly":
        return cls(Q(c) for c in data)

    def __str__(self) -> str:
        return poly_str(self, "x")


def _as_unipoly(x) -> UniPoly:
    return x if isinstance(x, UniPoly) else UniPoly((Q(x),))


def poly_str(p: UniPoly, var: str = "x") -> str:
    if p.is_zero:
        return "0"
    parts = []
    for i in range(p.degree, -1, -1):
        c = p.coeff(i)
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and c == 1:
            s = mono
        elif mono and c == -1:
            s = "-" + mono
        else:
            s = f"({fmt(c)})" if c.denominator != 1 else fmt(c)
            if mono:
                s += "*" + mono
        parts.append(s)
    return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class BiPoly:
    """Bivariate polynomial in (r, k); keys are (r-degree, k-degree)."""

    coefficients: Mapping = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), c in self.coefficients.items():
            c = Q(c)
            if c != 0:
                clean[(int(i), int(j))] = c
        object.__setattr__(self, "coefficients", dict(sorted(clean.items())))

    def __hash__(self):
        return hash(tuple(self.coefficients.items()))

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def r_degree(self) -> int:
        return max((i for i, _ in self.coefficients), default=0)

    @property
    def k_degree(self) -> int:
        return max((j for _, j in self.coefficients), default=0)

    def coeff(self, i: int, j: int) -> Fraction:
        return self.coefficients.get((i, j), Fraction(0))

    def __call__(self, r, k) -> Fraction:
        r, k = Q(r), Q(k)
        return sum((c * r**i * k**j for (i, j), c in self.coefficients.items()), Fraction(0))

    def in_k(self, r) -> UniPoly:
        """Specialize r and return a polynomial in k."""
        r = Q(r)
        out = [Fraction(0)] * (self.k_degree + 1)
        for (i, j), c in self.coefficients.items():
            out[j] += c * r**i
        return UniPoly(out)

    def __add__(self, other: "BiPoly") -> "BiPoly":
        out = dict(self.coefficients)
        for key, c in other.coefficients.items():
            out[key] = out.get(key, Fraction(0)) + c
        return BiPoly(out)

    def __neg__(self):
        return BiPoly({key: -c for key, c in self.coefficients.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, BiPoly):
            out: dict = {}
            for (i1, j1), a in self.coefficients.items():
                for (i2, j2), b in other.coefficients.items():
                    key = (i1 + i2, j1 + j2)
                    out[key] = out.get(key, Fraction(0)) + a * b
            return BiPoly(out)
        s = Q(other)
        return BiPoly({key: s * c for key, c in self.coefficients.items()})

    __rmul__ = __mul__

    def to_json(self) -> list:
        return [[i, j, fmt(c)] for (i, j), c in sorted(self.coefficients.items())]


def interpolate(samples: Sequence, degree: int) -> UniPoly:
    """Exact Newton interpolation through the first degree+1 samples.

    Any further samples are verification points: a mismatch raises
    InconsistentSamples instead of being averaged away.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    pts = [(Q(x), Q(y)) for x, y in samples]
    if len(pts) < degree + 1:
        raise ValueError(f"need at least {degree + 1} samples, got {len(pts)}")
    if len({x for x, _ in pts}) != len(pts):
        raise ValueError("sample arguments must be distinct")
    fit, extra = pts[: degree + 1], pts[degree + 1 :]
    xs = [x for x, _ in fit]
    table = [y for _, y in fit]
    newton = [table[0]]
    for level in range(1, len(fit)):
        table = [
            (table[i + 1] - table[i]) / (xs[i + level] - xs[i]) for i in range(len(table) - 1)
        ]
        newton.append(table[0])
    # expand the Newton form into the monomial basis, Horner style
    p = UniPoly((newton[-1],))
    for i in range(len(newton) - 2, -1, -1):
        p = p * UniPoly((-xs[i], 1)) + newton[i]
    for x, y in extra:
        got = p(x)
        if got != y:
            raise InconsistentSamples(
                f"sample at {fmt(x)} is {fmt(y)} but the degree-{degree} fit gives {fmt(got)}"
            )
    return p


def interpolate2d(grid: Mapping, r_args: Sequence, k_args: Sequence,
                  r_degree: int, k_degree: int) -> BiPoly:
    """Fit a bivariate polynomial on a tensor grid, one variable at a time.

    ``grid[(r, k)]`` holds the values; surplus grid lines in either direction
    act as verification samples exactly as in :func:`interpolate`.
    """
    rows = {}
    for r in r_args:
        rows[r] = interpolate([(k, grid[(r, k)]) for k in k_args], k_degree)
    out = {}
    for j in range(k_degree + 1):
        pj = interpolate([(r, rows[r].coeff(j)) for r in r_args], r_degree)
        for i, c in enumerate(pj.coefficients):
            out[(i, j)] = c
    return BiPoly(out)


def extract_e_coefficients(wtilde: BiPoly, n: int) -> list:
    """Split w~(r,k) = sum_i e_i(r) k^i; entry i of the result is e_i (index 0 is e_0)."""
    if wtilde.k_degree > n + 1:
        raise DegreeOverflow(f"k-degree {wtilde.k_degree} exceeds n+1 = {n + 1}")
    out = []
    for j in range(n + 2):
        deg = max((i for i, jj in wtilde.coefficients if jj == j), default=-1)
        out.append(UniPoly(wtilde.coeff(i, j) for i in range(deg + 1)))
    return out


def reassemble(es: Sequence) -> BiPoly:
    return BiPoly({(i, j): c for j, e in enumerate(es) for i, c in enumerate(e.coefficients)})


def leading_coefficient(p: UniPoly, expected_degree: int) -> Fraction:
    if not p.is_zero and p.degree > expected_degree:
        raise DegreeOverflow(f"degree {p.degree} exceeds expected {expected_degree}")
    return p.coeff(expected_degree)


def sign(x) -> int:
    x = Q(x)
    return (x > 0) - (x < 0)


def cauchy_bound(p: UniPoly) -> Fraction:
    """Every real root of p has absolute value below this bound."""
    if p.is_zero or p.degree == 0:
        return Fraction(0)
    lead = abs(p.leading)
    return 1 + max(abs(c) / lead for c in p.coefficients[:-1])
