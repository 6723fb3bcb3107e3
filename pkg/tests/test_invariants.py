import random
from fractions import Fraction
from math import factorial

import pytest

import oracles as O
from conftest import P1_PIECES, p1_config
from kstabmaps.errors import DivisionByZero, MissingInput
from kstabmaps.exactmath import BiPoly, UniPoly, extract_e_coefficients, sign
from kstabmaps.invariants import (
    TwistInput,
    VerdictKind,
    chow_sign_threshold,
    chow_weight,
    coefficient_scale,
    df_from_coefficients,
    df_from_intersections,
    j_functional,
    log_df,
    minimum_norm,
    twist_sweep,
    twisted_slope,
    verdict,
)
from kstabmaps.pipeline import routes_agree, toric_report
from kstabmaps.polytope import PLConvexFunction, cube, segment, simplex
from kstabmaps.torictc import (
    HilbertWeightData,
    ToricPolarisedPair,
    ToricTestConfiguration,
    bivariate_weight_oracle,
    boundary_divisor_data,
    hilbert_weight_data,
    j_intersection_inputs,
    slope_numbers,
)


def _rational(rng, lo=-20, hi=20, den=9):
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def test_twisted_slope_examples():
    assert twisted_slope(TwistInput(-3, 0, 1, 2)) == 3
    assert twisted_slope(TwistInput(-2, 2, 5, 2)) == 0
    assert twisted_slope(TwistInput(-2, 0, 2, 1)) == 1
    with pytest.raises(ValueError):
        TwistInput(0, 0, 0, 1)


def test_slope_numbers_from_polytopes():
    assert slope_numbers(simplex(2)) == {"KdotL": -3, "TdotL": 0, "Ln": 1, "n": 2}
    sl = slope_numbers(segment(0, 2))
    assert twisted_slope(TwistInput(sl["KdotL"], sl["TdotL"], sl["Ln"], 1)) == 1


def test_df_examples(p1_tc):
    trivial = HilbertWeightData(2, 1, 0, 0, 3, 0, 1)  # normalised weights vanish, any twist
    assert df_from_coefficients(trivial) == 0
    assert df_from_coefficients(HilbertWeightData(2, 1, Fraction(3, 2), Fraction(1, 2), 0, 0, 1)) == Fraction(1, 4)
    assert df_from_intersections(0, 0, 0, 0, 3) == 0
    assert df_from_intersections(0, 7, Fraction(2, 3), 1, 2) == Fraction(5, 3)


def test_df_routes_agree_with_factor(p1_tc, p1_twisted_tc):
    # P1: the intersection-route DF is 2 n! times the coefficient-route value
    for tc in (p1_tc, p1_twisted_tc, p1_config(exponent=2)):
        rep = toric_report(tc)
        assert rep.routes["df_intersection"] == coefficient_scale(tc.n) * rep.routes["df_coefficients"]
    assert toric_report(p1_tc).df == Fraction(1, 4)
    assert toric_report(p1_twisted_tc).df == Fraction(3, 8)


def test_route_agreement_in_dimension_two():
    tc = ToricTestConfiguration(ToricPolarisedPair(cube(2, 2), cube(2)),
                                PLConvexFunction((((0, 0), 0), ((-1, -1), 1))), 1)
    assert routes_agree(toric_report(tc), 2)


def test_weight_shift_invariance():
    rng = random.Random(2)
    for _ in range(50):
        a0 = Fraction(rng.randint(1, 20), rng.randint(1, 5))
        d = HilbertWeightData(a0, *(_rational(rng) for _ in range(5)), rng.randint(1, 4))
        c = _rational(rng)
        assert df_from_coefficients(d.shifted(c)) == df_from_coefficients(d)


def test_j_linearity():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(1, 5)
        L = _rational(rng)
        g1, t1, g2, t2 = (_rational(rng) for _ in range(4))
        a, b = _rational(rng), _rational(rng)
        combined = j_functional(a * g1 + b * g2, L, a * t1 + b * t2, n)
        assert combined == a * j_functional(g1, L, t1, n) + b * j_functional(g2, L, t2, n)
        assert j_functional(2 * g1, L, 2 * t1, n) == 2 * j_functional(g1, L, t1, n)
    assert j_functional(0, 5, 0, 2) == 0


def test_gamma_on_product_of_lines():
    tc = ToricTestConfiguration(ToricPolarisedPair(cube(2), segment(0, 1).lift(0)),
                                PLConvexFunction.constant(0, 2), 1)
    assert j_intersection_inputs(tc)["gamma"] == Fraction(1, 2)


def _exponent(values, base):
    return next(e for e in range(5) if all(v == m ** e * base for m, v in values))


def test_scaling_sign_invariance(p1_tc):
    base = toric_report(p1_tc)
    reps = {m: toric_report(p1_tc.rescaled(m)) for m in (2, 3)}
    e_df = _exponent([(m, r.routes["df_intersection"]) for m, r in reps.items()], base.routes["df_intersection"])
    e_norm = _exponent([(m, r.minimum_norm) for m, r in reps.items()], base.minimum_norm)
    assert (e_df, e_norm) == (1, 2)
    eps = Fraction(1, 3)
    for m, r in reps.items():
        assert sign(r.routes["df_intersection"]) == sign(base.routes["df_intersection"])
        margin = r.routes["df_intersection"] - eps * r.minimum_norm / m ** (e_norm - e_df)
        assert sign(margin) == sign(base.routes["df_intersection"] - eps * base.minimum_norm)


def test_norm_positivity():
    fs = [PLConvexFunction(P1_PIECES), PLConvexFunction((((0,), 0), ((1,), -1)))]
    for f in fs:
        tc = ToricTestConfiguration(ToricPolarisedPair(segment(0, 2)), f, 1)
        assert toric_report(tc).minimum_norm > 0
    for P in (segment(0, 2), cube(2), simplex(2)):
        tc = ToricTestConfiguration(ToricPolarisedPair(P), PLConvexFunction.constant(Fraction(1, 2), P.ambient_dim), 1)
        rep = toric_report(tc)
        assert rep.df == 0 and rep.minimum_norm == 0 and routes_agree(rep, tc.n)


def test_minimum_norm_routes_and_missing_input():
    assert minimum_norm("odaka", LE_L=0, LE_E=0, n=2, r=1) == 0
    assert minimum_norm("b0", b_tilde0=3, b0=1, n=2, r=2) == 1
    with pytest.raises(MissingInput):
        minimum_norm("intersection", LdotL=1, n=1, r=1)
    with pytest.raises(ValueError):
        minimum_norm("b0", b_tilde0=1, b0=0, n=1, r=0)
    with pytest.raises(MissingInput):
        log_df(hilbert_weight_data(p1_config()), None, 1)


def test_chow_weight_sign_stabilises(p1_tc, p1_twisted_tc):
    for tc in (p1_tc, p1_twisted_tc):
        w = bivariate_weight_oracle(tc)
        s, r0 = chow_sign_threshold(w, 1)
        assert s == sign(toric_report(tc).df) == 1
        for r in (r0 + 1, 10):
            top = chow_weight(w, hilbert_weight_data(tc).hilbert, r)
            assert sign(top.coeff(2)) == s
    trivial = ToricTestConfiguration(p1_tc.pair, PLConvexFunction.constant(0, 1), 1)
    assert chow_sign_threshold(bivariate_weight_oracle(trivial), 1) == (0, 0)


def test_chow_weight_division_by_zero():
    with pytest.raises(DivisionByZero):
        chow_weight(BiPoly({(1, 1): 1}), UniPoly((1, 1)), -1)


def test_leading_coefficient_of_mumford_weight(p1_twisted_tc):
    e2 = extract_e_coefficients(bivariate_weight_oracle(p1_twisted_tc), 1)[2]
    d = hilbert_weight_data(p1_twisted_tc)
    assert e2.coeff(2) == d.a0 * df_from_coefficients(d)


@pytest.mark.parametrize("boundary,expected", [(2, Fraction(3, 8)), (0, Fraction(-1, 8))])
def test_log_df_against_boundary_oracle(p1_tc, boundary, expected):
    oracle = O.df_coefficients(**O.segment_log_data(2, P1_PIECES, 1, boundary))
    assert oracle == expected
    facet = next(f for f in p1_tc.polytope.facets if f.offset * f.normal[0] == boundary)
    assert log_df(hilbert_weight_data(p1_tc), *boundary_divisor_data(p1_tc, facet)) == expected


def test_log_df_zero_divisor_and_twist_structure():
    rng = random.Random(4)
    for _ in range(10):
        d = HilbertWeightData(Fraction(rng.randint(1, 9)), *(_rational(rng) for _ in range(5)), rng.randint(1, 3))
        assert log_df(d, 0, 0) == df_from_coefficients(d)
        DL, LD = _rational(rng), _rational(rng)
        da, db = -DL / (2 * factorial(d.n - 1)), -LD / (2 * factorial(d.n))
        assert log_df(d, DL, LD) == df_from_coefficients(d.with_twist(d.a_q + da, d.b_q + db))


def test_verdict_examples():
    v = verdict([(-1, 2)])
    assert v.kind is VerdictKind.DESTABILIZED and v.index == 0 and v.reason == "negative"
    assert verdict([(Fraction(1, 4), Fraction(1, 2))], Fraction(1, 10)).kind is VerdictKind.NONNEGATIVE
    v = verdict([(0, 1)])
    assert v.kind is VerdictKind.DESTABILIZED and v.reason == "zero_with_positive_norm"
    v = verdict([(1, 0), (Fraction(1, 100), 1)], Fraction(1, 10))
    assert v.index == 1 and v.reason == "below_uniform_margin"
    assert verdict([(0, 0)]).kind is VerdictKind.NONNEGATIVE
    with pytest.raises(ValueError):
        verdict([(1, -1)])


def test_twist_sweep(p1_tc):
    d = hilbert_weight_data(p1_tc)
    flat = twist_sweep(d, (0, 0), [0, 1, 5])
    assert len({df for _, df in flat}) == 1
    ts = [Fraction(0), Fraction(1, 2), Fraction(1)]
    vals = twist_sweep(d, (Fraction(-1, 2), Fraction(-1, 2)), ts)
    assert [v for _, v in vals] == [Fraction(1, 4), Fraction(5, 16), Fraction(3, 8)]
    rng = random.Random(5)
    ts = [_rational(rng) for _ in range(6)]
    pts = twist_sweep(d, (_rational(rng), _rational(rng)), ts)
    (t0, v0), (t1, v1) = pts[0], pts[1]
    slope = (v1 - v0) / (t1 - t0) if t1 != t0 else None
    for t, v in pts:
        if slope is not None:
            assert v - v0 == slope * (t - t0)
