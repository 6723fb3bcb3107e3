"""Seeded verification suites: formal identities and randomized inequalities."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import NotSemiample
from .exactmath import fmt
from .intersect import check_inequalities, sym, verify_odaka_identity
from .polytope import LatticePolytope, Polytope, cube, segment
from .torictc import (
    MonomialFlagIdeal,
    ToricPolarisedPair,
    ToricTestConfiguration,
    exceptional_class,
    from_flag_ideal,
    toric_table,
)


def random_flag_ideal(rng: random.Random, n: int, d: int, max_t: int = 3) -> MonomialFlagIdeal:
    """A flag ideal with a few monomial generators of exponent <= d.

    I_0 contains a pure power of every coordinate, so the ideal is cosupported
    at the origin (codimension >= 2 on X x C), has no t-power factor and its
    blow-up becomes semi-ample on P for large r. Further generators are random.
    """
    N = rng.randint(1, max_t)
    gens = [((0,) * n, N)]
    for i in range(n):
        gens.append((tuple(rng.randint(1, d) if j == i else 0 for j in range(n)), 0))
    for _ in range(rng.randint(1, 3)):
        a = [rng.randint(0, d) for _ in range(n)]
        if not any(a):
            a[rng.randrange(n)] = rng.randint(1, d)
        gens.append((tuple(a), rng.randint(0, N - 1)))
    return MonomialFlagIdeal(tuple(gens))


def semiample_configuration(pair: ToricPolarisedPair, ideal: MonomialFlagIdeal,
                            r_cap: int = 12) -> ToricTestConfiguration | None:
    """Smallest exponent r <= r_cap at which the blow-up class is semi-ample."""
    for r in range(1, r_cap + 1):
        try:
            return from_flag_ideal(pair, ideal, r)
        except NotSemiample:
            continue
    return None


def random_configurations(seed: int, count: int, P: LatticePolytope, d: int):
    """``count`` nontrivial seeded flag-ideal configurations on P."""
    rng = random.Random(seed)
    pair = ToricPolarisedPair(P)
    out = []
    while len(out) < count:
        ideal = random_flag_ideal(rng, P.ambient_dim, d)
        tc = semiample_configuration(pair, ideal)
        if tc is None or tc.is_trivial:
            continue
        out.append((ideal, tc))
    return out


def nef_test_classes(tc: ToricTestConfiguration) -> dict:
    """Nef classes R on X (pulled back): the polarisation and coordinate segments."""
    n = tc.n
    out = {"R_L": tc.pair.P.lift(0)}
    for i in range(n):
        e = tuple(int(i == j) for j in range(n))
        out[f"R_e{i}"] = Polytope.from_points([(0,) * n, e], n).lift(0)
    return out


def inequality_report(tc: ToricTestConfiguration):
    extra = nef_test_classes(tc)
    table = toric_table(tc, extra)
    E = exceptional_class(tc)
    return check_inequalities(table, sym("L"), E, tc.n, {k: sym(k) for k in extra})


@dataclass
class SuiteResult:
    name: str
    passed: bool
    cases: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "cases": self.cases}


def identities_suite(n_max: int) -> SuiteResult:
    cases = []
    for n in range(1, n_max + 1):
        rep = verify_odaka_identity(n)
        cases.append(rep.to_json())
    return SuiteResult("odaka_identity", all(c["passed"] for c in cases), cases)


INEQUALITY_DOMAINS = {
    "segment_0_4": (segment(0, 4), 4),
    "square_2x2": (cube(2, 2), 2),
}


def inequalities_suite(trials: int, seed: int, domains=None) -> SuiteResult:
    cases = []
    ok = True
    for name in domains or sorted(INEQUALITY_DOMAINS):
        P, d = INEQUALITY_DOMAINS[name]
        for i, (ideal, tc) in enumerate(random_configurations(seed, trials, P, d)):
            rep = inequality_report(tc)
            ok = ok and rep.passed
            case = {"domain": name, "trial": i, "ideal": ideal.to_json(), "r": tc.exponent,
                    "passed": rep.passed}
            if not rep.passed:
                case["failures"] = {k: fmt(v) for k, v in rep.failures().items()}
            cases.append(case)
    return SuiteResult("inequalities", ok, cases)
