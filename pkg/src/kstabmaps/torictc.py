"""Toric test-configurations and their Hilbert/weight data.

A configuration is a polytope P' (the polarisation, already raised to the
exponent), a convex PL function f >= 0 on it and a height R >= max f. The
compactified total space over P^1 has polytope
Q = {(x, t) : x in P', 0 <= t <= R - f(x)}, so every number below is a
lattice count or a mixed volume of P', Q and a few auxiliary polytopes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial
from typing import Mapping

from .errors import DimensionMismatch, NotSemiample
from .exactmath import BiPoly, Q, UniPoly, fmt, interpolate, interpolate2d
from .intersect import Cycle, IntersectionTable, sym
from .polytope import (
    Facet,
    GraphPolytope,
    LatticePolytope,
    PLConvexFunction,
    Polytope,
    ehrhart,
    facet_lattice_volume,
    graph_polytope,
    lattice_count,
    minkowski_sum,
    mixed_volume,
    vertices_from_halfspaces,
)


@dataclass(frozen=True)
class ToricPolarisedPair:
    P: LatticePolytope
    twist: Polytope | None = None

    def __post_init__(self):
        if not self.P.is_full:
            raise DimensionMismatch("the polarisation polytope must be full-dimensional")
        if self.twist is not None and self.twist.ambient_dim != self.P.ambient_dim:
            raise DimensionMismatch("twist polytope lives in a different dimension")

    @property
    def n(self) -> int:
        return self.P.ambient_dim

    def slope_numbers(self) -> dict:
        """K.L^{n-1}, T.L^{n-1} and L^n read off the polytopes."""
        return slope_numbers(self.P, self.twist)


def slope_numbers(P: Polytope, twist: Polytope | None = None) -> dict:
    n = P.ambient_dim
    Ln = factorial(n) * P.volume
    # -K is the sum of the facet divisors; D_F . L^{n-1} = (n-1)! latvol(F)
    KdotL = -factorial(n - 1) * sum((facet_lattice_volume(P, f) for f in P.facets), Fraction(0))
    TdotL = Fraction(0)
    if twist is not None:
        TdotL = factorial(n) * mixed_volume([P] * (n - 1) + [twist])
    return {"KdotL": KdotL, "TdotL": TdotL, "Ln": Ln, "n": n}


@dataclass(frozen=True)
class ToricTestConfiguration:
    pair: ToricPolarisedPair
    f: PLConvexFunction
    R: Fraction
    exponent: int = 1

    def __post_init__(self):
        object.__setattr__(self, "R", Q(self.R))
        if self.exponent < 1:
            raise ValueError("exponent must be positive")
        # builds Q and validates 0 <= f <= R on the dilated polytope
        object.__setattr__(self, "f", self.graph.f)

    @property
    def n(self) -> int:
        return self.pair.n

    @cached_property
    def polytope(self) -> Polytope:
        """P' = exponent * P, the polytope of L^exponent."""
        return self.pair.P.scale(self.exponent)

    @cached_property
    def graph(self) -> GraphPolytope:
        return graph_polytope(self.polytope, self.f, self.R)

    @property
    def Q(self) -> Polytope:
        return self.graph.Q

    @property
    def s(self) -> int:
        return self.graph.s

    @property
    def is_trivial(self) -> bool:
        return self.f.is_constant

    def with_twist(self, twist: Polytope | None) -> "ToricTestConfiguration":
        return ToricTestConfiguration(ToricPolarisedPair(self.pair.P, twist), self.f, self.R, self.exponent)

    def rescaled(self, m: int) -> "ToricTestConfiguration":
        """(P', f, R) -> (mP', m f(x/m), mR), i.e. the polarisation L^m."""
        return ToricTestConfiguration(
            ToricPolarisedPair(self.pair.P.scale(m), self.pair.twist), self.f.dilated(m), m * self.R, self.exponent
        )

    def to_json(self) -> dict:
        out = {
            "polytope": self.pair.P.to_json(),
            "pl_function": self.f.to_json(),
            "R": fmt(self.R),
            "exponent": self.exponent,
        }
        if self.pair.twist is not None:
            out["twist_polytope"] = self.pair.twist.to_json()
        return out


@dataclass(frozen=True)
class MonomialFlagIdeal:
    """I_0 + I_1 t + ... + (t^N), given by monomial generators (exponent, t-power)."""

    generators: tuple

    def __post_init__(self):
        gens = []
        for a, j in self.generators:
            g = (tuple(int(x) for x in a), int(j))
            if j < 0 or any(x < 0 for x in g[0]):
                raise ValueError("flag ideal exponents must be nonnegative")
            if g not in gens:
                gens.append(g)
        if not gens:
            raise ValueError("empty flag ideal")
        if len({len(a) for a, _ in gens}) != 1:
            raise DimensionMismatch("generators of differing dimension")
        object.__setattr__(self, "generators", tuple(sorted(gens)))
        n = len(gens[0][0])
        if ((0,) * n, self.N) not in gens:
            raise ValueError(f"flag ideal must contain the pure power t^{self.N}")

    @property
    def N(self) -> int:
        return max(j for _, j in self.generators)

    @property
    def n(self) -> int:
        return len(self.generators[0][0])

    def order_function(self) -> PLConvexFunction:
        """phi(x) = min{t : (x, t) in Newton polyhedron}, as a max of affine pieces.

        The pieces are the vertices (u, c) of the dual polyhedron
        {u >= 0, c - u.a_i <= j_i}; phi(x) = max (c - u.x) for x >= 0.
        """
        n = self.n
        A, b = [], []
        for k in range(n):
            A.append(tuple(-int(i == k) for i in range(n)) + (0,))
            b.append(0)
        for a, j in self.generators:
            A.append(tuple(-x for x in a) + (1,))
            b.append(j)
        pieces = []
        for v in vertices_from_halfspaces(A, b):
            u, c = v[:n], v[n]
            pieces.append((tuple(-x for x in u), c))
        return PLConvexFunction(tuple(pieces))

    def to_json(self) -> dict:
        return {"generators": [{"exponent": list(a), "t_power": j} for a, j in self.generators]}

    @classmethod
    def from_json(cls, data: Mapping) -> "MonomialFlagIdeal":
        return cls(tuple((tuple(g["exponent"]), g["t_power"]) for g in data["generators"]))


@lru_cache(maxsize=256)
def _order_function(ideal: MonomialFlagIdeal) -> PLConvexFunction:
    return ideal.order_function()


def from_flag_ideal(pair: ToricPolarisedPair, ideal: MonomialFlagIdeal, r: int) -> ToricTestConfiguration:
    """Configuration of the blow-up of the flag ideal polarised by rL - E.

    The ideal is read in the affine chart at the origin, so P must lie in the
    positive orthant with the origin as a vertex. The envelope must be
    constant away from that chart (at every other vertex of rP it has to
    equal its minimum), otherwise rL - E is not semi-ample at this r.
    """
    P = pair.P
    if ideal.n != pair.n:
        raise DimensionMismatch("ideal and polytope dimensions differ")
    origin = (Fraction(0),) * pair.n
    if origin not in P.vertices or any(x < 0 for v in P.vertices for x in v):
        raise ValueError("flag ideals are read at the origin; P must sit in the positive orthant")
    Pr = P.scale(r)
    phi = _order_function(ideal)
    far = [v for v in Pr.vertices if v != origin]
    values = [phi(v) for v in far]
    # cheap test first: the far vertices must agree before the minimum is computed
    bad = next((v for v, x in zip(far, values) if x != values[0]), None)
    if bad is None and phi.minimum_on(Pr) != values[0]:
        bad = far[0]
    if bad is not None:
        raise NotSemiample(f"envelope not constant at vertex {[fmt(x) for x in bad]} for r = {r}")
    f = phi.pruned(Pr)
    # (t^N) alone gives f = N everywhere; one extra unit of height keeps Q full-dimensional
    R = ideal.N + 1 if f.is_constant and f(origin) == ideal.N else ideal.N
    return ToricTestConfiguration(pair, f, Fraction(R), r)


# ---------------------------------------------------------------- Hilbert / weight data

@dataclass(frozen=True)
class HilbertWeightData:
    a0: Fraction
    a1: Fraction
    b0: Fraction
    b1: Fraction
    a_q: Fraction
    b_q: Fraction
    n: int
    r_exponent: int = 1
    hilbert: UniPoly | None = field(default=None, compare=False)
    weight: UniPoly | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1", "a_q", "b_q"):
            object.__setattr__(self, name, Q(getattr(self, name)))
        if self.a0 <= 0:
            raise ValueError("a0 must be positive")

    def shifted(self, c) -> "HilbertWeightData":
        """Weight shift (b0, b1, b_q) += c (a0, a1, a_q)."""
        c = Q(c)
        return HilbertWeightData(
            self.a0, self.a1, self.b0 + c * self.a0, self.b1 + c * self.a1,
            self.a_q, self.b_q + c * self.a_q, self.n, self.r_exponent,
        )

    def with_twist(self, a_q, b_q) -> "HilbertWeightData":
        return HilbertWeightData(self.a0, self.a1, self.b0, self.b1, Q(a_q), Q(b_q), self.n, self.r_exponent)

    def to_json(self) -> dict:
        out = {k: fmt(getattr(self, k)) for k in ("a0", "a1", "b0", "b1", "a_q", "b_q")}
        out["n"] = self.n
        out["r_exponent"] = self.r_exponent
        if self.hilbert is not None:
            out["hilbert"] = self.hilbert.to_json()
        if self.weight is not None:
            out["weight"] = self.weight.to_json()
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "HilbertWeightData":
        return cls(*(Q(data[k]) for k in ("a0", "a1", "b0", "b1")),
                   Q(data.get("a_q", 0)), Q(data.get("b_q", 0)), int(data["n"]), int(data.get("r_exponent", 1)))


def weight_sum(tc: ToricTestConfiguration, l: int) -> int:
    """Sum over lattice x in lP' of the number of lattice heights above x, minus one each.

    Equals chi of the family over P^1 minus chi of the fibre; l must be a
    multiple of tc.s for the count to be the geometric one.
    """
    return lattice_count(tc.Q, l) - lattice_count(tc.polytope, l)


def twist_coefficients(tc: ToricTestConfiguration) -> tuple:
    """(a_q, b_q) = (-L^{n-1}.T / (2 (n-1)!), -Lc^n.T / (2 n!)) with T the twist."""
    T = tc.pair.twist
    n = tc.n
    if T is None:
        return Fraction(0), Fraction(0)
    a_q = -Fraction(n, 2) * mixed_volume([tc.polytope] * (n - 1) + [T])
    b_q = -Fraction(n + 1, 2) * mixed_volume([tc.Q] * n + [T.lift(0)])
    return a_q, b_q


def hilbert_weight_data(tc: ToricTestConfiguration) -> HilbertWeightData:
    n, s = tc.n, tc.s
    hhat = ehrhart(tc.polytope)
    samples = [(s * j, weight_sum(tc, s * j)) for j in range(1, n + 5)]
    what = interpolate(samples, n + 1)
    a_q, b_q = twist_coefficients(tc)
    return HilbertWeightData(
        hhat.coeff(n), hhat.coeff(n - 1), what.coeff(n + 1), what.coeff(n),
        a_q, b_q, n, tc.exponent, hhat, what,
    )


# ---------------------------------------------------------------- bivariate oracle

def bivariate_weight_oracle(tc: ToricTestConfiguration, r_max: int | None = None,
                            k_max: int | None = None) -> BiPoly:
    """Brute-force w~(r,k) = w(r,k) h^(r) - w^(r) k h(r,k) from lattice counts.

    The map's polarisation is M = T/2 (the twist is the square of the target
    polarisation), realised by sampling even k = 2j with M^k = jT. r runs
    over multiples of tc.s. r_max and k_max count sample lines; anything
    beyond the degree bound is a verification line.
    """
    n, s = tc.n, tc.s
    r_max = 2 * n + 4 if r_max is None else r_max
    k_max = n + 4 if k_max is None else k_max
    if r_max < 2 * n + 2 or k_max < n + 2:
        raise ValueError(f"need r_max >= {2 * n + 2} and k_max >= {n + 2}")
    T = tc.pair.twist
    if T is None:
        T = Polytope.from_points([(0,) * n])
    P, Qp, TL = tc.polytope, tc.Q, T.lift(0)
    r_args = [s * i for i in range(1, r_max + 1)]
    k_args = [2 * j for j in range(1, k_max + 1)]
    grid = {}
    for r in r_args:
        hh = lattice_count(P, r)
        wh = lattice_count(Qp, r) - hh
        for k in k_args:
            j = k // 2
            h = lattice_count(minkowski_sum(P.scale(k * r), T.scale(j)), 1)
            w = lattice_count(minkowski_sum(Qp.scale(k * r), TL.scale(j)), 1) - h
            grid[(r, k)] = w * hh - wh * k * h
    return interpolate2d(grid, r_args, k_args, 2 * n + 1, n + 1)


# ---------------------------------------------------------------- intersection tables

def fibre_polytope(n: int) -> Polytope:
    """Polytope of a fibre class of the family over P^1."""
    return Polytope.from_points([(0,) * n + (0,), (0,) * n + (1,)])


def toric_table(tc: ToricTestConfiguration, extra: Mapping[str, Polytope] | None = None) -> IntersectionTable:
    """Lazily populated table on the total space from mixed volumes.

    Symbols: L (the polarisation P' pulled back), Lc (the configuration Q),
    F (fibre), T (twist, when present) and any extra nef polytopes.
    """
    n = tc.n
    polys = {"L": tc.polytope.lift(0), "Lc": tc.Q, "F": fibre_polytope(n)}
    if tc.pair.twist is not None:
        polys["T"] = tc.pair.twist.lift(0)
    for name, P in (extra or {}).items():
        if P.ambient_dim != n + 1:
            raise DimensionMismatch(f"extra class {name} must live in dimension {n + 1}")
        polys[name] = P
    fact = factorial(n + 1)

    def provider(mono):
        if any(m not in polys for m in mono):
            return None
        return fact * mixed_volume([polys[m] for m in mono])

    return IntersectionTable(n + 1, provider=provider, symbols=polys)


def exceptional_class(tc: ToricTestConfiguration) -> Cycle:
    """E = L + R F - Lc, so that Lc = rL - E + R F."""
    return sym("L") + tc.R * sym("F") - sym("Lc")


def norm_data(tc: ToricTestConfiguration) -> tuple:
    """(Lc^n . L, Lc^{n+1}) with L the exponent-one polarisation."""
    n = tc.n
    fact = factorial(n + 1)
    Lnp1 = fact * tc.Q.volume
    LdotL = fact * mixed_volume([tc.Q] * n + [tc.polytope.lift(0)]) / tc.exponent
    return LdotL, Lnp1


def closed_form_norm(tc: ToricTestConfiguration) -> Fraction:
    """(n n!/r) (integral of f over P' - vol(P') min f).

    Not used by any route; it agrees with the intersection-route norm on every
    configuration tried and is exposed only as a cross-check.
    """
    n, P = tc.n, tc.polytope
    integral = tc.R * P.volume - tc.Q.volume
    return Fraction(n * factorial(n), tc.exponent) * (integral - P.volume * tc.f.minimum_on(P))


def odaka_data(tc: ToricTestConfiguration) -> tuple:
    """((rL-E)^n . L, (rL-E)^n . E) on the blow-up model."""
    table = toric_table(tc)
    n = tc.n
    E = exceptional_class(tc)
    base = (sym("L") - E) ** n
    return table.evaluate(base * sym("L")) / tc.exponent, table.evaluate(base * E)


def restricted_weight_b0(tc: ToricTestConfiguration) -> Fraction:
    """Leading coefficient of B(l,1) - B(l,0), B(l,j) the weight of lLc + jL.

    B(l,j) = #(lQ + j P'x0) - #((l+j) P'); the difference has degree n in l.
    """
    n, s = tc.n, tc.s
    PL = tc.polytope.lift(0)
    samples = []
    for i in range(1, n + 4):
        l = s * i
        lQ = tc.Q.scale(l)
        b1 = lattice_count(minkowski_sum(lQ, PL), 1) - lattice_count(tc.polytope, l + 1)
        b0 = lattice_count(lQ, 1) - lattice_count(tc.polytope, l)
        samples.append((l, b1 - b0))
    return interpolate(samples, n).coeff(n)


def df_intersection_inputs(tc: ToricTestConfiguration) -> dict:
    """mu_p, Lc^{n+1}, Lc^n.K_{X/P^1}, Lc^n.T for df_from_intersections."""
    n = tc.n
    sl = slope_numbers(tc.polytope, tc.pair.twist)
    mu_p = -(sl["KdotL"] + sl["TdotL"]) / sl["Ln"]
    Lnp1 = factorial(n + 1) * tc.Q.volume
    fn = factorial(n)
    # K_X = -(sum of facet divisors); relative to P^1 add back twice the fibre
    LK = -fn * sum((facet_lattice_volume(tc.Q, f) for f in tc.Q.facets), Fraction(0))
    LK += 2 * fn * tc.polytope.volume
    LT = Fraction(0)
    if tc.pair.twist is not None:
        LT = factorial(n + 1) * mixed_volume([tc.Q] * n + [tc.pair.twist.lift(0)])
    return {"mu_p": mu_p, "Lnp1": Lnp1, "LK": LK, "LT": LT, "n": n}


def side_facet(tc: ToricTestConfiguration, facet: Facet) -> Polytope:
    """Face of Q lying over a facet G of P' (G x {0} when f = R along G)."""
    nrm = tuple(facet.normal) + (0,)
    verts = [v for v in tc.Q.vertices if sum(a * x for a, x in zip(nrm, v)) == facet.offset]
    return Polytope.from_points(verts, tc.n + 1)


def boundary_divisor_data(tc: ToricTestConfiguration, facet: Facet) -> tuple:
    """(D.L^{n-1}, Lc^n.D) for the toric boundary divisor of a facet of P'."""
    n = tc.n
    DdotL = factorial(n - 1) * facet_lattice_volume(tc.polytope, facet)
    face = side_facet(tc, facet)
    LD = Fraction(0)
    if face.dim == n:
        nrm = tuple(facet.normal) + (0,)
        LD = factorial(n) * facet_lattice_volume(tc.Q, Facet(nrm, facet.offset))
    return DdotL, LD


def log_hilbert_weight_data(tc: ToricTestConfiguration, facet: Facet) -> HilbertWeightData:
    """Brute-force data with half the boundary divisor's counts removed.

    Fits h^(l) - #(l G)/2 and w^(l) - (#(l side face) - #(l G))/2, an oracle
    for the log invariant of (X, D) with D the facet divisor.
    """
    n, s = tc.n, tc.s
    G = Polytope.from_points(tc.polytope.facet_vertices(facet), n)
    face = side_facet(tc, facet)
    hs, ws = [], []
    for j in range(1, n + 5):
        l = s * j
        g = lattice_count(G, l)
        hs.append((l, lattice_count(tc.polytope, l) - Fraction(g, 2)))
        ws.append((l, weight_sum(tc, l) - Fraction(lattice_count(face, l) - g, 2)))
    hhat = interpolate(hs, n)
    what = interpolate(ws, n + 1)
    a_q, b_q = twist_coefficients(tc)
    return HilbertWeightData(hhat.coeff(n), hhat.coeff(n - 1), what.coeff(n + 1), what.coeff(n),
                             a_q, b_q, n, tc.exponent, hhat, what)


def relative_canonical_term(tc: ToricTestConfiguration) -> Fraction:
    """Lc^n . K_{B/X x P^1} for the toric model B of the configuration.

    Each facet of Q with primitive normal v = (v_x, v_t) is a divisor of B.
    Its coefficient in K_B - pi^* K_{X x P^1} is a(v) - 1, where a(v) is the
    value at v of the piecewise linear function equal to 1 on every ray of
    the fan of X x P^1 (read off by expressing v in a simplicial cone).
    """
    n = tc.n
    P = tc.polytope
    rays = [tuple(f.normal) + (0,) for f in P.facets] + [(0,) * n + (1,), (0,) * n + (-1,)]
    fn = factorial(n)
    total = Fraction(0)
    for f in tc.Q.facets:
        v = tuple(f.normal)
        a = _ray_height(v, rays, n + 1)
        if a is None:
            raise ValueError("X x P^1 fan is not simplicial enough to read the discrepancy")
        coeff = a - 1
        if coeff:
            total += coeff * fn * facet_lattice_volume(tc.Q, f)
    return total


def _ray_height(v, rays, d):
    """Sum of coefficients of v written nonnegatively over d linearly independent rays."""
    from itertools import combinations

    from .linalg import solve

    vf = [Fraction(x) for x in v]
    for S in combinations(range(len(rays)), d):
        cols = [rays[i] for i in S]
        A = [[Fraction(cols[j][i]) for j in range(d)] for i in range(d)]
        lam = solve(A, vf)
        if lam is not None and all(x >= 0 for x in lam):
            return sum(lam, Fraction(0))
    return None


def j_intersection_inputs(tc: ToricTestConfiguration, twist: Polytope | None = None) -> dict:
    """gamma_T, Lc^{n+1}, Lc^n.T for a nef twist polytope (defaults to the pair's)."""
    T = tc.pair.twist if twist is None else twist
    n = tc.n
    if T is None:
        raise ValueError("J-functional needs a twist")
    Ln = factorial(n) * tc.polytope.volume
    gamma = factorial(n) * mixed_volume([tc.polytope] * (n - 1) + [T]) / Ln
    Lnp1 = factorial(n + 1) * tc.Q.volume
    LT = factorial(n + 1) * mixed_volume([tc.Q] * n + [T.lift(0)])
    return {"gamma": gamma, "Lnp1": Lnp1, "LT": LT, "n": n}


def pullback_canonical_term(tc: ToricTestConfiguration) -> Fraction:
    """Lc^n . q^*K_X with K_X = -(sum of facet divisors of P').

    Each Lc^n . q^*D_G is a difference quotient of mixed volumes: pushing the
    facet G out by eps gives the polytope of L' + eps D_G, and V(Q,..,Q, -)
    is linear in the support function. eps is halved until the pushed polytope
    keeps the combinatorial type of P'.
    """
    n = tc.n
    P = tc.polytope
    fact = factorial(n + 1)
    base = mixed_volume([tc.Q] * n + [P.lift(0)])
    total = Fraction(0)
    for G in P.facets:
        eps = Fraction(1, 2)
        while True:
            A = [tuple(f.normal) for f in P.facets]
            b = [f.offset + (eps if f == G else 0) for f in P.facets]
            pushed = Polytope.from_points(vertices_from_halfspaces(A, b), n)
            if len(pushed.vertices) == len(P.vertices) and len(pushed.facets) == len(P.facets):
                break
            eps /= 2
        total -= fact * (mixed_volume([tc.Q] * n + [pushed.lift(0)]) - base) / eps
    return total
