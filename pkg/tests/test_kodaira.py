import warnings
from fractions import Fraction
from math import factorial

import pytest

from kstabmaps.errors import NefCertificateUnavailable, NegativeDiscrepancy, NoThresholdBelowCap
from kstabmaps.invariants import TwistInput, df_from_intersections, j_functional, twisted_slope, verdict
from kstabmaps.kodaira import (
    ChernNumbers,
    NefOracle,
    embedding_threshold,
    family_threshold,
    j_df_decomposition,
    k_for_slope,
    slope_of_adjoint,
    toric_embedding_threshold,
)
from kstabmaps.polytope import PLConvexFunction, Polytope, cube, segment, simplex
from kstabmaps.torictc import (
    ToricPolarisedPair,
    ToricTestConfiguration,
    df_intersection_inputs,
    pullback_canonical_term,
    relative_canonical_term,
    slope_numbers,
)

RECT = Polytope.from_points([(0, 0), (2, 0), (0, 1), (2, 1)])
HORIZ = Polytope.from_points([(0, 0), (1, 0)])
VERT = Polytope.from_points([(0, 0), (0, 1)])


def test_projective_plane_threshold():
    t = toric_embedding_threshold(simplex(2))
    assert (t.k_min, t.epsilon, t.k_hat_bound) == (6, Fraction(1, 6), 6)
    assert t.to_json()["verdict"]["kind"] == "UniformCertificate"
    assert t.to_json()["label"] == "proof-backed bound"


def test_p1_degree_two_threshold():
    t = toric_embedding_threshold(segment(0, 2))
    assert (t.k_min, t.epsilon) == (4, Fraction(1, 2))


def test_table_mode_matches_toric_mode():
    oracle = NefOracle({"L": [1]})
    t = embedding_threshold(2, 3, [1], [-3], oracle)
    assert (t.k_min, t.epsilon) == (6, Fraction(1, 6))


def test_certificate_unavailable_without_generators():
    oracle = NefOracle({"L": [1, 0]})
    with pytest.raises(NefCertificateUnavailable):
        embedding_threshold(2, 1, [1, 0], [-1, -2], oracle, cap=50)
    with pytest.raises(NefCertificateUnavailable):
        toric_embedding_threshold(RECT, cap=50)


@pytest.mark.parametrize("P", [segment(0, 2), simplex(2), cube(2), RECT, simplex(3)])
def test_epsilon_is_the_proof_constant(P):
    t = toric_embedding_threshold(P, {"h": HORIZ, "v": VERT} if P.ambient_dim == 2 else None, cap=200)
    n = P.ambient_dim
    assert t.epsilon == Fraction(1, n * (n + 1))
    assert t.k_min == max(t.k_hat_bound, t.nef_bound) >= 2 * (n + 1)


def test_k_min_monotone_in_generators():
    steps = [{}, {"h": HORIZ}, {"h": HORIZ, "v": VERT}, {"h": HORIZ, "v": VERT, "sq": cube(2)}]
    ks = []
    for gens in steps:
        try:
            ks.append(toric_embedding_threshold(RECT, gens, cap=100).k_min)
        except NefCertificateUnavailable:
            ks.append(float("inf"))
    assert ks[-1] < float("inf")
    assert all(a >= b for a, b in zip(ks, ks[1:]))
    base = toric_embedding_threshold(simplex(2)).k_min
    assert toric_embedding_threshold(simplex(2), {"pt": Polytope.from_points([(0, 0)], 2)}).k_min <= base


def test_projective_plane_family():
    c = ChernNumbers(2, ["1", "-3", "9"])
    num, den = slope_of_adjoint(c)
    for m in (7, 8, 9, 12, 20):
        assert num(m) / den(m) == Fraction(3, m - 6)
    ft = family_threshold(c, 20, 1)
    assert ft.m_min == 9
    assert ft.mu(9) == 1
    assert ft.k_min[9] == k_for_slope(2, 1)
    assert family_threshold(c, 20, 9).m_min == 9
    with pytest.raises(NoThresholdBelowCap):
        family_threshold(c, 8, 1)


def test_family_slope_agrees_with_toric_slope():
    # mL + 2K is a multiple of L on P^2 (K = -3L) and on P^1 x P^1 (K = -2L)
    for P, values, shift in ((simplex(2), [1, -3, 9], 6), (cube(2), [2, -4, 8], 4)):
        num, den = slope_of_adjoint(ChernNumbers(2, values))
        for m in range(shift + 1, shift + 6):
            sl = slope_numbers(P.scale(m - shift))
            direct = twisted_slope(TwistInput(sl["KdotL"], sl["TdotL"], sl["Ln"], 2))
            assert num(m) / den(m) == direct


def test_calabi_yau_numbers():
    ft = family_threshold(ChernNumbers(2, [3, 0, 0]), 10, 1)
    assert ft.m_min == 1
    assert all(ft.mu(m) == 0 for m in range(1, 11))
    assert set(ft.k_min.values()) == {k_for_slope(2, 0)} == {13}


def test_k_for_slope_constraints():
    for n in (1, 2, 3):
        for mu in (Fraction(-5), Fraction(0), Fraction(1, 2), Fraction(1)):
            k = k_for_slope(n, mu)
            khat = Fraction(k, 2 * (n + 1))
            assert khat >= 1 and -Fraction(n, n + 1) * mu + khat / n - 1 > 0
            if k > 2 * (n + 1):
                khat = Fraction(k - 1, 2 * (n + 1))
                assert -Fraction(n, n + 1) * mu + khat / n - 1 <= 0


def test_j_df_decomposition_examples():
    assert j_df_decomposition(Fraction(2, 3), 0).df == Fraction(2, 3)
    dec = j_df_decomposition(-2, 1)
    assert dec.df == -1
    assert verdict([(dec.df, 1)]).reason == "negative"
    with pytest.warns(NegativeDiscrepancy):
        j_df_decomposition(1, -1, log_canonical=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        j_df_decomposition(1, -1)


def test_j_df_decomposition_on_p1_configuration(p1_tc):
    n = p1_tc.n
    sl = slope_numbers(p1_tc.polytope)
    Lnp1 = factorial(n + 1) * p1_tc.Q.volume
    jk = j_functional(sl["KdotL"] / sl["Ln"], Lnp1, pullback_canonical_term(p1_tc), n)
    rel = relative_canonical_term(p1_tc)
    ii = df_intersection_inputs(p1_tc)
    df = df_from_intersections(ii["mu_p"], ii["Lnp1"], ii["LK"], ii["LT"], n)
    assert (jk, rel, df) == (Fraction(-1, 2), 1, Fraction(1, 2))
    dec = j_df_decomposition(jk, rel, log_canonical=True, independent_df=df)
    assert dec.matches


def test_j_df_decomposition_in_dimension_two():
    tc = ToricTestConfiguration(ToricPolarisedPair(cube(2, 2)),
                                PLConvexFunction((((0, 0), 0), ((-1, -1), 1))), 1)
    n = 2
    sl = slope_numbers(tc.polytope)
    jk = j_functional(sl["KdotL"] / sl["Ln"], factorial(n + 1) * tc.Q.volume, pullback_canonical_term(tc), n)
    ii = df_intersection_inputs(tc)
    df = df_from_intersections(ii["mu_p"], ii["Lnp1"], ii["LK"], ii["LT"], n)
    assert j_df_decomposition(jk, relative_canonical_term(tc), independent_df=df).matches
