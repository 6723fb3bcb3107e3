"""Proof-backed thresholds for uniform stability of Kodaira embeddings.

Nef certification is sufficient-only: a class is certified when it is a
nonnegative combination of registered nef generators (modulo linear
equivalence in toric mode). Failure to certify is "unknown", never
instability.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import comb, floor
from typing import Mapping, Sequence

from .errors import NefCertificateUnavailable, NegativeDiscrepancy, NoThresholdBelowCap
from .exactmath import Q, UniPoly, fmt
from .invariants import uniform_certificate
from .linalg import rank, rref
from .polytope import Polytope


# ---------------------------------------------------------------- nef oracle

@dataclass
class NefCertificate:
    coefficients: dict
    linear_part: tuple = ()

    def to_json(self) -> dict:
        return {"generators": {k: fmt(v) for k, v in sorted(self.coefficients.items())},
                "linear_part": [fmt(x) for x in self.linear_part]}


class NefOracle:
    """Certifies nefness of classes given as coordinate vectors.

    Toric mode: coordinates are facet coefficients on the polytope P, and
    linear functions (u_F . m)_F are quotiented out. Table mode: coordinates
    in a declared basis, nothing quotiented.
    """

    def __init__(self, generators: Mapping[str, Sequence], relations: Sequence[Sequence] = ()):
        self.generators = {k: tuple(Q(x) for x in v) for k, v in generators.items()}
        self.relations = [tuple(Q(x) for x in v) for v in relations]
        self.P: Polytope | None = None
        dims = {len(v) for v in self.generators.values()} | {len(v) for v in self.relations}
        if len(dims) > 1:
            raise ValueError("generator vectors of differing length")

    @classmethod
    def toric(cls, P: Polytope, generators: Mapping[str, Polytope]) -> "NefOracle":
        gens = {name: toric_class(P, G) for name, G in generators.items()}
        rel = [tuple(f.normal[i] for f in P.facets) for i in range(P.ambient_dim)]
        out = cls(gens, rel)
        out.P = P
        return out

    def add_generator(self, name: str, vec) -> None:
        self.generators[name] = tuple(Q(x) for x in vec)

    def certify(self, c) -> NefCertificate | None:
        c = [Q(x) for x in c]
        names = sorted(self.generators)
        rels = self.relations
        rel_rank = rank(rels) if rels else 0
        # basic solutions: columns of the active generators plus relations independent
        for size in range(0, len(names) + 1):
            for S in itertools.combinations(names, size):
                cols = [self.generators[s] for s in S] + list(rels)
                if not cols:
                    if all(x == 0 for x in c):
                        return NefCertificate({}, ())
                    continue
                if rank(cols) != len(S) + rel_rank:
                    continue
                sol = _solve_columns(cols, c)
                if sol is None:
                    continue
                lam, lin = sol[: len(S)], sol[len(S):]
                if all(x >= 0 for x in lam):
                    return NefCertificate(dict(zip(S, lam)), tuple(lin))
        return None


def _solve_columns(cols, c):
    """Some solution x of sum_j x_j cols[j] = c, or None when inconsistent."""
    m = len(c)
    aug = [[cols[j][i] for j in range(len(cols))] + [c[i]] for i in range(m)]
    red, piv = rref(aug)
    ncols = len(cols)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(red, piv):
        x[p] = row[ncols]
    return x


def toric_class(P: Polytope, G: Polytope) -> tuple:
    """Facet coefficients (support numbers) of a nef polytope G on the fan of P."""
    if G.ambient_dim != P.ambient_dim:
        raise ValueError("generator polytope in the wrong dimension")
    return tuple(max(f.value(v) for v in G.vertices) for f in P.facets)


# ---------------------------------------------------------------- embedding threshold

@dataclass
class EmbeddingThreshold:
    k_min: int
    epsilon: Fraction
    k_hat_bound: int
    nef_bound: int
    certificate: NefCertificate
    n: int
    mu: Fraction

    def to_json(self) -> dict:
        return {
            "k_min": self.k_min,
            "epsilon": fmt(self.epsilon),
            "k_hat_bound": self.k_hat_bound,
            "nef_bound": self.nef_bound,
            "binding": "k_hat" if self.k_hat_bound >= self.nef_bound else "nef",
            "certificate": self.certificate.to_json(),
            "mu": fmt(self.mu),
            "label": "proof-backed bound",
            "verdict": uniform_certificate(self.epsilon, "kodaira_embedding").to_json(),
        }


def embedding_threshold(n: int, mu, L: Sequence, K: Sequence, oracle: NefOracle,
                        cap: int = 1000) -> EmbeddingThreshold:
    """Least k with khat = k/(2(n+1)) >= 1 and -(n mu/(n+1)) L - K + (khat/n) L nef.

    L and K are coordinate vectors in the oracle's space. The two constraints
    are recorded separately; k_min is their max.
    """
    mu = Q(mu)
    L = [Q(x) for x in L]
    K = [Q(x) for x in K]
    k_hat_bound = 2 * (n + 1)
    nef_bound, cert = None, None
    for k in range(1, cap + 1):
        coeff = -Fraction(n, n + 1) * mu + Fraction(k, 2 * (n + 1) * n)
        cls = [coeff * a - b for a, b in zip(L, K)]
        cert = oracle.certify(cls)
        if cert is not None:
            nef_bound = k
            break
    if nef_bound is None:
        raise NefCertificateUnavailable(f"no nef certificate for k <= {cap}")
    return EmbeddingThreshold(max(k_hat_bound, nef_bound), Fraction(1, n * (n + 1)),
                              k_hat_bound, nef_bound, cert, n, mu)


def toric_embedding_threshold(P: Polytope, generators: Mapping[str, Polytope] | None = None,
                              cap: int = 1000) -> EmbeddingThreshold:
    """Embedding threshold for a toric pair; L itself is always a generator."""
    from .torictc import slope_numbers

    gens = {"L": P}
    gens.update(generators or {})
    oracle = NefOracle.toric(P, gens)
    sl = slope_numbers(P)
    mu = -sl["KdotL"] / sl["Ln"]
    L = toric_class(P, P)
    K = tuple(Fraction(-1) for _ in P.facets)
    return embedding_threshold(P.ambient_dim, mu, L, K, oracle, cap)


# ---------------------------------------------------------------- family threshold

@dataclass(frozen=True)
class ChernNumbers:
    n: int
    values: tuple

    def __post_init__(self):
        vals = tuple(Q(x) for x in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.n + 1:
            raise ValueError(f"need {self.n + 1} Chern numbers L^n, L^(n-1).K, ..., K^n")
        if vals[0] <= 0:
            raise ValueError("L^n must be positive")

    def mixed(self, i: int) -> Fraction:
        """L^{n-i} . K^i."""
        return self.values[i]


def _adjoint_power(c: ChernNumbers, j: int, extra_K: int) -> UniPoly:
    """(mL + 2K)^j . L^{n-j-extra_K} . K^{extra_K} as a polynomial in m."""
    coeffs = [Fraction(0)] * (j + 1)
    for i in range(j + 1):
        # choose i factors of 2K, j-i of mL
        coeffs[j - i] += comb(j, i) * 2**i * c.mixed(i + extra_K)
    return UniPoly(coeffs)


def poly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    while not b.is_zero:
        a, b = b, a.divmod(b)[1]
    return a * (1 / a.leading) if not a.is_zero else a


@dataclass
class FamilyThreshold:
    mu_num: UniPoly
    mu_den: UniPoly
    m_min: int
    k_min: dict

    def mu(self, m) -> Fraction:
        return self.mu_num(m) / self.mu_den(m)

    def to_json(self) -> dict:
        return {
            "mu_numerator": self.mu_num.to_json(),
            "mu_denominator": self.mu_den.to_json(),
            "mu_display": f"({self.mu_num.__str__().replace('x', 'm')})/({self.mu_den.__str__().replace('x', 'm')})",
            "m_min": self.m_min,
            "k_min": {str(m): k for m, k in sorted(self.k_min.items())},
            "label": "proof-backed bound",
        }


def slope_of_adjoint(c: ChernNumbers) -> tuple:
    """mu(X, mL + 2K) = num(m)/den(m), reduced by the polynomial gcd."""
    n = c.n
    den = _adjoint_power(c, n, 0)
    num = -_adjoint_power(c, n - 1, 1)
    g = poly_gcd(num, den) if not num.is_zero else UniPoly((1,))
    if g.degree > 0:
        num, den = num.divmod(g)[0], den.divmod(g)[0]
    lead = den.leading
    return num * (1 / lead), den * (1 / lead)


def k_for_slope(n: int, mu) -> int:
    """Least k with khat >= 1 and -(n/(n+1)) mu + khat/n - 1 > 0."""
    mu = Q(mu)
    # khat/n > 1 + n mu/(n+1)  <=>  k > 2 n (n+1) (1 + n mu/(n+1))
    bound = 2 * n * (n + 1) * (1 + Fraction(n, n + 1) * mu)
    k = floor(bound) + 1
    return max(k, 2 * (n + 1))


def family_threshold(c: ChernNumbers, m_cap: int, very_ample_floor: int) -> FamilyThreshold:
    if m_cap < very_ample_floor:
        raise ValueError("m_cap must be at least the very-ampleness floor")
    n = c.n
    num, den = slope_of_adjoint(c)
    full_den = _adjoint_power(c, n, 0)
    m_min = None
    ks = {}
    for m in range(very_ample_floor, m_cap + 1):
        # mL + 2K has to be ample for its slope to mean anything
        if any(_adjoint_power(c, j, 0)(m) <= 0 for j in range(1, n + 1)) or full_den(m) == 0:
            continue
        mu = num(m) / den(m)
        if mu <= 1:
            if m_min is None:
                m_min = m
            ks[m] = k_for_slope(n, mu)
    if m_min is None:
        raise NoThresholdBelowCap(f"no m in [{very_ample_floor}, {m_cap}] satisfies the slope bound")
    return FamilyThreshold(num, den, m_min, ks)


# ---------------------------------------------------------------- J / DF split

@dataclass
class JDecomposition:
    j_value: Fraction
    relative_canonical_term: Fraction
    df: Fraction
    matches: bool | None = None

    def to_json(self) -> dict:
        out = {"j_value": fmt(self.j_value), "relative_canonical_term": fmt(self.relative_canonical_term),
               "df": fmt(self.df)}
        if self.matches is not None:
            out["matches_independent_df"] = self.matches
        return out


def j_df_decomposition(j_value, relative_canonical_term, log_canonical: bool = False,
                       independent_df=None) -> JDecomposition:
    j, t = Q(j_value), Q(relative_canonical_term)
    if log_canonical and t < 0:
        warnings.warn(f"relative canonical term {fmt(t)} < 0 on a log canonical variety", NegativeDiscrepancy)
    df = j + t
    matches = None if independent_df is None else df == Q(independent_df)
    return JDecomposition(j, t, df, matches)
