"""DF of a fibration X -> B polarised by L_U + m L_B, expanded in m.

Symbols used in the tables:
  LU   pullback of the relatively ample bundle from the universal family
  LB   pullback of the base polarisation (L_B on X, the base configuration on the total space)
  KXB  relative canonical class of the fibration
  KB   canonical class of the base (relative to P^1 on the total space)
The X table has degree n, the test-configuration table degree n+1.

The Knudsen-Mumford determinant bundles are not modelled; they are called
"KM levels" in comments to keep them apart from the slope coefficients
lambda0, lambda1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping

from .errors import Inconclusive, LeadingTermNonzero, MissingInput
from .exactmath import Q, UniPoly, cauchy_bound, fmt, sign
from .intersect import IntersectionTable, MPoly, m_expansion, sym


@dataclass
class FibrationData:
    n: int
    b: int
    V: Fraction
    mu_fibre: Fraction
    x_table: IntersectionTable
    tc_table: IntersectionTable

    def __post_init__(self):
        self.V, self.mu_fibre = Q(self.V), Q(self.mu_fibre)
        if not 0 < self.b < self.n:
            raise ValueError("need 0 < b < n")
        if self.V <= 0:
            raise ValueError("fibre volume must be positive")
        if self.x_table.ambient_degree != self.n or self.tc_table.ambient_degree != self.n + 1:
            raise ValueError("table degrees must be n and n+1")


def delta(n: int, b: int, V) -> Fraction:
    V = Q(V)
    if V <= 0 or n <= b:
        raise ValueError("need V > 0 and n > b")
    return 1 / ((n - b + 1) * V)


def cm_degree(A, B, mu, n: int, b: int = 1) -> Fraction:
    """deg p^*L_CM over a curve: (n-b) mu A + (n-b+1) B.

    A is the total of L_U^{n-b+1}, B the total of K_{X/B}.L_U^{n-b}.
    """
    if b != 1:
        raise ValueError("the CM degree is a number only over a curve (b = 1)")
    if A is None or B is None or mu is None:
        raise MissingInput("cm_degree needs A, B and mu")
    return (n - b) * Q(mu) * Q(A) + (n - b + 1) * Q(B)


# ---------------------------------------------------------------- base numbers

@dataclass
class BaseNumbers:
    """Invariants of the base map recovered by the projection formula."""

    LBb: Fraction           # L_B^b on B
    KBLB: Fraction          # K_B . L_B^{b-1}
    TLB: Fraction           # T . L_B^{b-1}, T = delta p^*L_CM
    Lnp1: Fraction          # Lc_B^{b+1}
    LK: Fraction            # Lc_B^b . K_{B/P^1}
    LT: Fraction            # Lc_B^b . T
    delta: Fraction

    @property
    def mu_T(self) -> Fraction:
        return -(self.KBLB + self.TLB) / self.LBb

    def df(self, b: int) -> Fraction:
        return Fraction(b, b + 1) * self.mu_T * self.Lnp1 + self.LK + self.LT

    def to_json(self) -> dict:
        return {k: fmt(getattr(self, k)) for k in ("LBb", "KBLB", "TLB", "Lnp1", "LK", "LT", "delta")}


def base_numbers(data: FibrationData) -> BaseNumbers:
    n, b, V, mu = data.n, data.b, data.V, data.mu_fibre
    f = n - b
    X, T = data.x_table, data.tc_table
    LU, LB, KXB, KB = sym("LU"), sym("LB"), sym("KXB"), sym("KB")
    d = delta(n, b, V)
    LBb = X.evaluate(LB ** b * LU ** f) / V
    KBLB = X.evaluate(KB * LB ** (b - 1) * LU ** f) / V
    # c1 of the CM bundle pushed forward, paired with L_B^{b-1}
    cm_B = (f * mu * X.evaluate(LU ** (f + 1) * LB ** (b - 1))
            + (f + 1) * X.evaluate(KXB * LU ** f * LB ** (b - 1)))
    Lnp1 = T.evaluate(LB ** (b + 1) * LU ** f) / V
    LK = T.evaluate(KB * LB ** b * LU ** f) / V
    cm_T = f * mu * T.evaluate(LU ** (f + 1) * LB ** b) + (f + 1) * T.evaluate(KXB * LU ** f * LB ** b)
    return BaseNumbers(LBb, KBLB, d * cm_B, Lnp1, LK, d * cm_T, d)


# ---------------------------------------------------------------- expansions

def _polarisation():
    return sym("LU") + MPoly.var("m") * sym("LB")


def slope_polys(data: FibrationData) -> tuple:
    """(numerator, denominator) of mu(X, L_U + m L_B) as polynomials in m."""
    n = data.n
    LX = _polarisation()
    K = sym("KXB") + sym("KB")
    num = -m_expansion(K * LX ** (n - 1), data.x_table)
    den = m_expansion(LX ** n, data.x_table)
    return num, den


def slope_coefficients(n: int, b: int, mu_fibre, mu_base) -> tuple:
    """Closed-form (lambda0, lambda1) = ((n-b)/n mu_fibre, b/n mu_T(B, L_B))."""
    if mu_fibre is None or mu_base is None:
        raise MissingInput("slope coefficients need the fibre slope and the base twisted slope")
    return Fraction(n - b, n) * Q(mu_fibre), Fraction(b, n) * Q(mu_base)


def slope_expansion(data: FibrationData) -> dict:
    """lambda0, lambda1 of mu = lambda0 + lambda1/m + O(1/m^2), computed and displayed."""
    n, b = data.n, data.b
    num, den = slope_polys(data)
    lam0, lam1 = _laurent_series(num, den, 2)
    base = base_numbers(data)
    disp0, disp1 = slope_coefficients(n, b, data.mu_fibre, base.mu_T)
    return {"lambda0": lam0, "lambda1": lam1, "lambda0_formula": disp0, "lambda1_formula": disp1,
            "agree": lam0 == disp0 and lam1 == disp1}


def _laurent_series(num: UniPoly, den: UniPoly, count: int) -> list:
    """First ``count`` coefficients m^0, m^-1, ... of num/den (deg num <= deg den)."""
    d = den.degree
    # series of num/den in 1/m: solve coefficient by coefficient
    out = []
    rem = [num.coeff(i) for i in range(max(num.degree, d) + 1)]
    lead = den.leading
    for step in range(count):
        power = d - step
        c = rem[power] / lead if 0 <= power < len(rem) else Fraction(0)
        out.append(c)
        for j in range(d + 1):
            idx = power - d + j
            if 0 <= idx < len(rem):
                rem[idx] -= c * den.coeff(j)
    return out


@dataclass
class DFExpansion:
    numerator: UniPoly
    denominator: UniPoly
    quotient: UniPoly
    remainder: UniPoly
    b: int
    coeff_b_plus_1: Fraction
    coeff_b: Fraction
    base_df: Fraction
    expected_coeff_b: Fraction
    base: BaseNumbers | None = None
    checks: dict = field(default_factory=dict)

    @property
    def polynomial(self) -> UniPoly | None:
        """DF(m) as a polynomial when the division is exact."""
        return self.quotient if self.remainder.is_zero else None

    def __call__(self, m) -> Fraction:
        return self.numerator(m) / self.denominator(m)

    def to_json(self) -> dict:
        out = {
            "numerator": self.numerator.to_json(),
            "denominator": self.denominator.to_json(),
            "coeff_b_plus_1": fmt(self.coeff_b_plus_1),
            "coeff_b": fmt(self.coeff_b),
            "base_df": fmt(self.base_df),
            "expected_coeff_b": fmt(self.expected_coeff_b),
            "checks": dict(sorted(self.checks.items())),
        }
        if self.polynomial is not None:
            out["df_polynomial"] = self.polynomial.to_json()
        if self.base is not None:
            out["base"] = self.base.to_json()
        return out


def df_polys(data: FibrationData) -> tuple:
    """DF(m) = N(m) / D(m) with D = L_X^n."""
    n = data.n
    LX = _polarisation()
    K = sym("KXB") + sym("KB")
    negK = -m_expansion(K * LX ** (n - 1), data.x_table)
    Ln = m_expansion(LX ** n, data.x_table)
    top = m_expansion(LX ** (n + 1), data.tc_table)
    rel = m_expansion(K * LX ** n, data.tc_table)
    num = Fraction(n, n + 1) * negK * top + Ln * rel
    return num, Ln


def df_m_expansion(data: FibrationData, base_hwd=None, strict: bool = True) -> DFExpansion:
    """Expand DF of the fibred configuration; check the two top coefficients.

    ``base_hwd`` (HilbertWeightData of the base configuration) adds a cross
    check of base_df against the lattice-count route when the CM twist of
    the base vanishes.
    """
    n, b = data.n, data.b
    num, den = df_polys(data)
    quot, rem = num.divmod(den)
    if quot.degree > b + 1 and not quot.is_zero:
        raise LeadingTermNonzero(f"DF(m) grows like m^{quot.degree}")
    c1, c0 = quot.coeff(b + 1), quot.coeff(b)
    base = base_numbers(data)
    bdf = base.df(b)
    expected = data.V * comb(n, b) * bdf
    checks = {"top_vanishes": c1 == 0, "coeff_b_matches": c0 == expected}
    if base_hwd is not None and base.TLB == 0 and base.LT == 0:
        from .invariants import coefficient_scale, df_from_coefficients

        checks["base_matches_lattice_route"] = coefficient_scale(b) * df_from_coefficients(base_hwd) == bdf
    if strict and c1 != 0:
        raise LeadingTermNonzero(f"m^{b + 1} coefficient is {fmt(c1)}")
    return DFExpansion(num, den, quot, rem, b, c1, c0, bdf, expected, base, checks)


def propagate_instability(exp: DFExpansion) -> int:
    """Least integer m0 >= 1 with DF(m) < 0 for every integer m >= m0."""
    if exp.coeff_b >= 0:
        raise Inconclusive(f"coefficient of m^{exp.b} is {fmt(exp.coeff_b)} >= 0")
    return negative_from(exp.numerator, exp.denominator)


def negative_from(num: UniPoly, den: UniPoly | None = None) -> int:
    den = UniPoly((1,)) if den is None else den
    bound = int(max(cauchy_bound(num), cauchy_bound(den))) + 1
    for m in range(bound, 0, -1):
        dv = den(m)
        if dv == 0 or sign(num(m)) * sign(dv) >= 0:
            return m + 1
    return 1


# ---------------------------------------------------------------- split products

def split_product(n_base: int, base_x: Mapping, base_tc: Mapping,
                  fibre: Mapping, fibre_dim: int) -> tuple:
    """Kunneth tables for X = B x F and its configuration Bc x F.

    base_x:  {(d, e): L_B^d K_B^e on B} with d + e = b
    base_tc: {(d, e): Lc^d K^e on the base configuration} with d + e = b+1
    fibre:   {c: L_F^{f-c} K_F^c on F}
    Only monomials with at most one canonical factor on each side are filled;
    the DF expansion never needs more.
    """
    b, f = n_base, fibre_dim

    def build(base_vals, bdeg):
        entries = {}
        for (d, e), bv in base_vals.items():
            if d + e != bdeg or e > 1:
                continue
            for c, fv in fibre.items():
                if c > 1:
                    continue
                mono = ("LB",) * d + ("KB",) * e + ("LU",) * (f - c) + ("KXB",) * c
                entries[mono] = Q(bv) * Q(fv)
        return entries

    def zeros(deg, bdeg):
        # monomials whose base and fibre degrees do not split as (bdeg, f) vanish
        out = {}
        for e in (0, 1):
            for c in (0, 1):
                for d in range(deg + 1):
                    u = deg - d - e - c
                    if u < 0:
                        continue
                    if d + e == bdeg and u + c == f:
                        continue
                    mono = ("LB",) * d + ("KB",) * e + ("LU",) * u + ("KXB",) * c
                    out[mono] = Fraction(0)
        return out

    n = b + f
    x_entries = zeros(n, b)
    x_entries.update(build(base_x, b))
    t_entries = zeros(n + 1, b + 1)
    t_entries.update(build(base_tc, b + 1))
    return IntersectionTable(n, x_entries), IntersectionTable(n + 1, t_entries)


def fibration_from_split(base_x: Mapping, base_tc: Mapping, b: int,
                         fibre: Mapping, fibre_dim: int) -> FibrationData:
    x, t = split_product(b, base_x, base_tc, fibre, fibre_dim)
    V = Q(fibre[0])
    mu = -Q(fibre.get(1, 0)) / V if fibre_dim >= 1 else Fraction(0)
    return FibrationData(b + fibre_dim, b, V, mu, x, t)
