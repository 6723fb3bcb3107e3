"""Stability invariants: slopes, DF (two routes), minimum norm (three routes),
J-functional, Chow weights, log DF and verdict aggregation.

Normalisations. The coefficient route works with Hilbert/weight coefficients
(a0 = L^n/n!, ...) and returns DF / (2 n!); the intersection route returns DF
itself. Twists enter the coefficients exactly like the canonical class:
a_q = -L^{n-1}.T / (2 (n-1)!), b_q = -Lc^n.T / (2 n!).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import factorial
from typing import Sequence

from .errors import DivisionByZero, MissingInput
from .exactmath import BiPoly, Q, UniPoly, cauchy_bound, extract_e_coefficients, fmt, sign
from .torictc import HilbertWeightData


@dataclass(frozen=True)
class TwistInput:
    KdotL: Fraction
    TdotL: Fraction
    Ln: Fraction
    n: int

    def __post_init__(self):
        for k in ("KdotL", "TdotL", "Ln"):
            object.__setattr__(self, k, Q(getattr(self, k)))
        if self.Ln <= 0:
            raise ValueError("L^n must be positive")


def twisted_slope(t: TwistInput) -> Fraction:
    return -(t.KdotL + t.TdotL) / t.Ln


def df_from_coefficients(d: HilbertWeightData) -> Fraction:
    """r^{2n} coefficient of e_{n+1}(r) divided by a0; equals DF / (2 n!)."""
    return (d.b0 * (d.a1 + d.a_q) - (d.b1 + d.b_q) * d.a0) / d.a0


def df_from_intersections(mu_p, Lnp1, LK, LT, n: int) -> Fraction:
    mu_p, Lnp1, LK, LT = Q(mu_p), Q(Lnp1), Q(LK), Q(LT)
    return Fraction(n, n + 1) * mu_p * Lnp1 + LK + LT


def coefficient_scale(n: int) -> int:
    """df_from_intersections = coefficient_scale(n) * df_from_coefficients."""
    return 2 * factorial(n)


def twist_from_intersections(TdotL, LT, n: int) -> tuple:
    """(a_q, b_q) for a twist with the given intersection numbers."""
    return -Q(TdotL) / (2 * factorial(n - 1)), -Q(LT) / (2 * factorial(n))


# ---------------------------------------------------------------- minimum norm

class NormRoute(str, Enum):
    INTERSECTION = "intersection"
    ODAKA = "odaka"
    B0 = "b0"


def _need(route, kw, *names):
    missing = [k for k in names if kw.get(k) is None]
    if missing:
        raise MissingInput(f"{route} route needs {', '.join(missing)}")
    return [Q(kw[k]) if k not in ("n", "r") else int(kw[k]) for k in names]


def minimum_norm(route, **kw) -> Fraction:
    """Minimum norm by one of three routes.

    intersection: LdotL = Lc^n.q^*L, Lnp1 = Lc^{n+1}
    odaka:        LE_L = (rL-E)^n.L, LE_E = (rL-E)^n.E
    b0:           b_tilde0, b0
    All routes also need n and r (the exponent).
    """
    route = NormRoute(route)
    if kw.get("r") is not None and int(kw["r"]) < 1:
        raise ValueError("r must be at least 1")
    if route is NormRoute.INTERSECTION:
        LdotL, Lnp1, n, r = _need(route.value, kw, "LdotL", "Lnp1", "n", "r")
        return LdotL - Fraction(n, r * (n + 1)) * Lnp1
    if route is NormRoute.ODAKA:
        A, B, n, r = _need(route.value, kw, "LE_L", "LE_E", "n", "r")
        return (A + Fraction(n, r) * B) / (n + 1)
    bt, b0, n, r = _need(route.value, kw, "b_tilde0", "b0", "n", "r")
    return Fraction(factorial(n), r) * (bt - n * b0)


# ---------------------------------------------------------------- J and log

def j_functional(gamma, Lnp1, LT, n: int) -> Fraction:
    return -Fraction(n, n + 1) * Q(gamma) * Q(Lnp1) + Q(LT)


def log_df(d: HilbertWeightData, DdotL, LD) -> Fraction:
    """Log DF (coefficient normalisation): the divisor enters like a twist."""
    if DdotL is None or LD is None:
        raise MissingInput("log DF needs D.L^{n-1} and Lc^n.D")
    da, db = twist_from_intersections(DdotL, LD, d.n)
    return df_from_coefficients(d.with_twist(d.a_q + da, d.b_q + db))


# ---------------------------------------------------------------- Chow weight

def chow_weight(wtilde: BiPoly, hhat: UniPoly, r) -> UniPoly:
    """Normalised Mumford weight w~(r, k) / h^(r) as a polynomial in k."""
    hr = hhat(r)
    if hr == 0:
        raise DivisionByZero(f"h^({fmt(r)}) = 0")
    return wtilde.in_k(r) * (1 / hr)


def chow_sign_threshold(wtilde: BiPoly, n: int) -> tuple:
    """(sign, r0): sign of the top k-coefficient e_{n+1}(r) for all r > r0.

    r0 is a Cauchy root bound of e_{n+1}, refined down to the last sign change
    among integers; sign 0 means e_{n+1} vanishes identically.
    """
    e = extract_e_coefficients(wtilde, n)[n + 1]
    if e.is_zero:
        return 0, 0
    s = sign(e.leading)
    bound = int(cauchy_bound(e)) + 1
    r0 = 0
    for r in range(bound, -1, -1):
        if sign(e(r)) != s:
            r0 = r
            break
    return s, r0


# ---------------------------------------------------------------- sweeps

def twist_sweep(base: HilbertWeightData, direction: tuple, t_range: Sequence) -> list:
    da, db = Q(direction[0]), Q(direction[1])
    out = []
    for t in t_range:
        t = Q(t)
        out.append((t, df_from_coefficients(base.with_twist(base.a_q + t * da, base.b_q + t * db))))
    return out


# ---------------------------------------------------------------- verdicts

class VerdictKind(str, Enum):
    DESTABILIZED = "DestabilizedBy"
    NONNEGATIVE = "NonNegativeOnSuppliedSet"
    UNIFORM = "UniformCertificate"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    index: int | None = None
    reason: str | None = None
    epsilon: Fraction | None = None
    source: str | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind.value}
        if self.index is not None:
            out["index"] = self.index
        if self.reason is not None:
            out["reason"] = self.reason
        if self.epsilon is not None:
            out["epsilon"] = fmt(self.epsilon)
        if self.source is not None:
            out["source"] = self.source
        return out


def uniform_certificate(epsilon, source: str) -> Verdict:
    """Only the theorem-backed threshold code may call this."""
    return Verdict(VerdictKind.UNIFORM, epsilon=Q(epsilon), source=source)


def verdict(reports: Sequence, epsilon=None) -> Verdict:
    """Aggregate (df, norm) pairs; finite evidence never yields a certificate."""
    eps = None if epsilon is None else Q(epsilon)
    for i, (df, norm) in enumerate(reports):
        df, norm = Q(df), Q(norm)
        if norm < 0:
            raise ValueError("minimum norms are nonnegative")
        if df < 0:
            return Verdict(VerdictKind.DESTABILIZED, i, "negative")
        if df == 0 and norm > 0:
            return Verdict(VerdictKind.DESTABILIZED, i, "zero_with_positive_norm")
        if eps is not None and df < eps * norm:
            return Verdict(VerdictKind.DESTABILIZED, i, "below_uniform_margin")
    return Verdict(VerdictKind.NONNEGATIVE)


@dataclass
class StabilityReport:
    df: Fraction
    minimum_norm: Fraction
    verdict: Verdict
    j_value: Fraction | None = None
    chow_poly: UniPoly | None = None
    routes: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "df": fmt(self.df),
            "minimum_norm": fmt(self.minimum_norm),
            "verdict": self.verdict.to_json(),
            "routes": {k: fmt(v) for k, v in sorted(self.routes.items())},
            "provenance": dict(sorted(self.provenance.items())),
        }
        if self.j_value is not None:
            out["j_value"] = fmt(self.j_value)
        if self.chow_poly is not None:
            out["chow_poly"] = self.chow_poly.to_json()
        return out
