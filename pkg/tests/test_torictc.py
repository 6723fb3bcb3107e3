from fractions import Fraction

import pytest

import oracles as O
from conftest import P1_PIECES, p1_config
from kstabmaps.errors import NotSemiample
from kstabmaps.exactmath import extract_e_coefficients
from kstabmaps.invariants import df_from_coefficients
from kstabmaps.pipeline import routes_agree, toric_report
from kstabmaps.polytope import PLConvexFunction, Polytope, cube, segment
from kstabmaps.torictc import (
    MonomialFlagIdeal,
    ToricPolarisedPair,
    ToricTestConfiguration,
    bivariate_weight_oracle,
    closed_form_norm,
    from_flag_ideal,
    hilbert_weight_data,
    norm_data,
    twist_coefficients,
    weight_sum,
)

# frozen from oracles.hilbert_weight on the P^1 configuration
P1_FROZEN = {"a0": 2, "a1": 1, "b0": Fraction(3, 2), "b1": Fraction(1, 2)}
# raw weight sums of the trivial configuration f = 0, R = 1 on [0, 2]: W(r) = r (2r + 1)
TRIVIAL_FROZEN = {"a0": 2, "a1": 1, "b0": 2, "b1": 1}
# f = max(0, (1 - x)/2), R = 1: rational data, s = 2
HALF_PIECES = (((0,), 0), ((Fraction(-1, 2),), Fraction(1, 2)))
HALF_FROZEN = {"a0": 2, "a1": 1, "b0": Fraction(7, 4), "b1": Fraction(1, 2)}


def _data(tc):
    d = hilbert_weight_data(tc)
    return {k: getattr(d, k) for k in ("a0", "a1", "b0", "b1")}


def _oracle(pieces, R, s=1):
    o = O.hilbert_weight(O.SEGMENT_0_2, pieces, R, s)
    return {k: o[k] for k in ("a0", "a1", "b0", "b1")}


def test_oracle_reproduces_frozen_values():
    assert _oracle(P1_PIECES, 1) == P1_FROZEN
    assert _oracle([((0,), 0)], 1) == TRIVIAL_FROZEN
    assert _oracle(HALF_PIECES, 1, 2) == HALF_FROZEN


def test_p1_hilbert_and_weight(p1_tc):
    d = hilbert_weight_data(p1_tc)
    assert _data(p1_tc) == P1_FROZEN
    assert d.hilbert.coefficients == (1, 2)
    assert d.weight.coefficients == (0, Fraction(1, 2), Fraction(3, 2))
    oracle = [O.weight_sum(O.SEGMENT_0_2, P1_PIECES, 1, r) for r in range(1, 6)]
    assert [weight_sum(p1_tc, r) for r in range(1, 6)] == oracle


def test_trivial_configuration_raw_sums():
    tc = ToricTestConfiguration(ToricPolarisedPair(segment(0, 2)), PLConvexFunction.constant(0, 1), 1)
    assert _data(tc) == TRIVIAL_FROZEN
    assert df_from_coefficients(hilbert_weight_data(tc)) == 0


def test_rational_configuration_uses_common_denominator():
    tc = ToricTestConfiguration(ToricPolarisedPair(segment(0, 2)), PLConvexFunction(HALF_PIECES), 1)
    assert tc.s == 2
    assert _data(tc) == HALF_FROZEN
    assert routes_agree(toric_report(tc), 1)


def test_twist_coefficients(p1_twisted_tc):
    assert twist_coefficients(p1_twisted_tc) == (Fraction(-1, 2), Fraction(-1, 2))
    assert twist_coefficients(p1_config()) == (0, 0)


@pytest.mark.parametrize("c", [1, Fraction(1, 2), Fraction(5, 3)])
def test_shift_covariance(p1_tc, c):
    # raising the height by c adds c to every weight
    raised = ToricTestConfiguration(p1_tc.pair, p1_tc.f, p1_tc.R + c)
    a, b = hilbert_weight_data(p1_tc), hilbert_weight_data(raised)
    assert (b.b0, b.b1) == (a.b0 + c * a.a0, a.b1 + c * a.a1)
    assert b == a.shifted(c)
    assert df_from_coefficients(a) == df_from_coefficients(b)
    # moving f and R together leaves the weights alone
    both = ToricTestConfiguration(p1_tc.pair, p1_tc.f.shifted(c), p1_tc.R + c)
    assert hilbert_weight_data(both) == a


def test_flag_ideal_examples():
    pair = ToricPolarisedPair(segment(0, 2))
    tc = from_flag_ideal(pair, MonomialFlagIdeal((((0,), 1),)), 1)
    assert tc.is_trivial and tc.f((1,)) == 1
    tc = from_flag_ideal(pair, MonomialFlagIdeal((((0,), 1), ((1,), 0))), 1)
    assert tc.f.pieces == PLConvexFunction(P1_PIECES).pieces and tc.R == 1
    sq = ToricPolarisedPair(cube(2))
    tc = from_flag_ideal(sq, MonomialFlagIdeal((((0, 0), 1), ((1, 0), 0), ((0, 1), 0))), 1)
    assert tc.f.pieces == PLConvexFunction((((0, 0), 0), ((-1, -1), 1))).pieces


def test_flag_ideal_envelope_is_idempotent():
    ideal = MonomialFlagIdeal((((0, 0), 2), ((1, 0), 1), ((0, 1), 1), ((2, 0), 0), ((0, 2), 0)))
    tc = from_flag_ideal(ToricPolarisedPair(cube(2, 2)), ideal, 1)
    assert tc.f.pruned(tc.polytope) == tc.f
    # the envelope never exceeds a generator's t-power above its exponent
    for x in [(i, j) for i in range(3) for j in range(3)]:
        for a, t in ideal.generators:
            if all(xi >= ai for xi, ai in zip(x, a)):
                assert tc.f(x) <= t


def test_flag_ideal_not_semiample():
    ideal = MonomialFlagIdeal((((0, 0), 2), ((1, 0), 0), ((0, 1), 1)))
    with pytest.raises(NotSemiample):
        from_flag_ideal(ToricPolarisedPair(cube(2, 2)), ideal, 1)
    with pytest.raises(ValueError):
        MonomialFlagIdeal((((1,), 0),))


def test_bivariate_oracle_trivial_and_point_twist(p1_tc):
    trivial = ToricTestConfiguration(p1_tc.pair, PLConvexFunction.constant(0, 1), 1)
    assert bivariate_weight_oracle(trivial).is_zero
    point = p1_tc.with_twist(Polytope.from_points([(0,)]))
    assert bivariate_weight_oracle(point) == bivariate_weight_oracle(p1_tc)


def test_bivariate_leading_matches_independent_oracle(p1_twisted_tc):
    # frozen from oracles.bivariate_leading: r^2 coefficient of e_2
    assert O.bivariate_leading(2, P1_PIECES, 1, 1) == Fraction(3, 4)
    e2 = extract_e_coefficients(bivariate_weight_oracle(p1_twisted_tc), 1)[2]
    assert e2.coeff(2) == Fraction(3, 4)


def test_norm_closed_form_cross_check():
    tcs = [p1_config(), p1_config(exponent=3)]
    tcs.append(ToricTestConfiguration(ToricPolarisedPair(cube(2)),
                                      PLConvexFunction((((0, 0), 0), ((-1, -1), 1))), 1, 2))
    for tc in tcs:
        LdotL, Lnp1 = norm_data(tc)
        n, r = tc.n, tc.exponent
        assert LdotL - Fraction(n, r * (n + 1)) * Lnp1 == closed_form_norm(tc)
