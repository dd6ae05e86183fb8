import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import random_pole_rational, round_trip
from mosva.ratfun import (
    INF,
    InconsistentError,
    PoleRational,
    TruncatedLaurent,
    UnderdeterminedError,
    expand_in_coords,
    expand_linear_power,
    iota_expand,
    monomials_of_degree,
    p_mul,
    p_sub,
    p_var,
    reconstruct,
    reconstruct_affine,
    wdeg,
)


def pr(nvars, num, pairs=None, zeros=None):
    return PoleRational(nvars, {e: Fraction(c) for e, c in num.items()}, pairs, zeros)


def test_wdeg_suffix_maximum():
    # region (0, 1): suffixes are {z2} and {z1, z2}
    assert wdeg((-3, 2), (0, 1)) == 2
    assert wdeg((2, -3), (0, 1)) == -1
    assert wdeg((2, -3), (1, 0)) == 2
    assert wdeg((0, 0), (0, 1)) == 0
    assert wdeg((-1, -1, 5), (0, 1, 2)) == 5


def test_geometric_expansion_single_pole():
    # [DERIVED] 1/(z1-z2) with z2 << z1: sum_k z2^k z1^(-1-k)
    f = pr(2, {(0, 0): 1}, {(0, 1): 1})
    s = iota_expand(f, (0, 1), 3)
    assert s.coeffs == {
        (-1, 0): Fraction(1),
        (-2, 1): Fraction(1),
        (-3, 2): Fraction(1),
        (-4, 3): Fraction(1),
    }
    assert s.neg == 1


def test_geometric_expansion_double_pole():
    # [DERIVED] 1/(z1-z2)^2 with z2 << z1: sum_k (k+1) z2^k z1^(-2-k)
    f = pr(2, {(0, 0): 1}, {(0, 1): 2})
    s = iota_expand(f, (0, 1), 2)
    assert s.coeffs == {
        (-2, 0): Fraction(1),
        (-3, 1): Fraction(2),
        (-4, 2): Fraction(3),
    }


def test_geometric_expansion_opposite_region():
    # [DERIVED] same function, z1 << z2: -sum_k z1^k z2^(-1-k)
    f = pr(2, {(0, 0): 1}, {(0, 1): 1})
    s = iota_expand(f, (1, 0), 3)
    assert s.coeffs == {
        (0, -1): Fraction(-1),
        (1, -2): Fraction(-1),
        (2, -3): Fraction(-1),
        (3, -4): Fraction(-1),
    }


def test_expansions_in_two_regions_differ_but_share_the_function():
    f = pr(2, {(1, 0): 3, (0, 1): -2}, {(0, 1): 2})
    a = iota_expand(f, (0, 1), 4)
    b = iota_expand(f, (1, 0), 4)
    assert a.coeffs != b.coeffs
    ga = reconstruct(a, {(0, 1): 2}, None, 1)
    gb = reconstruct(b, {(0, 1): 2}, None, 1)
    assert ga == f and gb == f


def test_canonicalization_cancels_common_factors():
    z1_sq_minus_z2_sq = {(2, 0): Fraction(1), (0, 2): Fraction(-1)}
    f = PoleRational(2, z1_sq_minus_z2_sq, {(0, 1): 1})
    assert f.pair_orders == {}
    assert f.num == {(1, 0): Fraction(1), (0, 1): Fraction(1)}

    g = PoleRational(2, {(1, 1): Fraction(1)}, None, (1, 0))
    assert g.zero_orders == (0, 0)
    assert g.num == {(0, 1): Fraction(1)}

    zero = PoleRational(2, {}, {(0, 1): 3}, (2, 2))
    assert zero.is_zero()
    assert zero.pair_orders == {} and zero.zero_orders == (0, 0)


def test_add_mul_scale():
    f = pr(2, {(0, 0): 1}, {(0, 1): 1})
    assert f.add(f.neg()).is_zero()
    one = PoleRational.const(2, 1)
    diff = pr(2, {(1, 0): 1, (0, 1): -1})
    assert f.mul(diff) == one
    assert f.scale(3).sub(f).sub(f.scale(2)).is_zero()
    # 1/(z1-z2) + 1/z1 has the common-denominator numerator z1 + (z1 - z2)
    g = pr(2, {(0, 0): 1}, None, (1, 0))
    h = f.add(g)
    assert h.pair_orders == {(0, 1): 1} and h.zero_orders == (1, 0)
    assert h.num == {(1, 0): Fraction(2), (0, 1): Fraction(-1)}


def test_homogeneous_degree():
    f = pr(2, {(0, 0): 1}, {(0, 1): 1})
    assert f.homogeneous_degree() == -1
    g = pr(2, {(1, 1): 1}, {(0, 1): 2}, (1, 0))
    assert g.homogeneous_degree() == 2 - 2 - 1
    assert f.add(PoleRational.const(2, 1)).homogeneous_degree() is None
    assert PoleRational.zero(2).homogeneous_degree() is None


def test_partial_derivative():
    f = pr(2, {(0, 0): 1}, {(0, 1): 1})
    expected = pr(2, {(0, 0): -1}, {(0, 1): 2})
    assert f.partial_derivative(0) == expected
    assert f.partial_derivative(1) == expected.neg()

    g = pr(2, {(2, 1): 1})
    assert g.partial_derivative(0) == pr(2, {(1, 1): 2})

    h = pr(1, {(0,): 1}, None, (1,))
    assert h.partial_derivative(0) == pr(1, {(0,): -1}, None, (2,))


def series_derivative(s, i):
    coeffs = {}
    for e, c in s.coeffs.items():
        if e[i]:
            ne = list(e)
            ne[i] -= 1
            coeffs[tuple(ne)] = c * e[i]
    # differentiating never raises a suffix sum, so the window carries over
    return TruncatedLaurent(s.nvars, s.region, coeffs, s.window, s.neg + 1)


def test_derivative_commutes_with_expansion():
    f = pr(2, {(1, 0): 1, (0, 2): 3}, {(0, 1): 2}, (1, 0))
    for region in [(0, 1), (1, 0)]:
        for i in range(2):
            a = iota_expand(f.partial_derivative(i), region, 3)
            b = series_derivative(iota_expand(f, region, 4), i)
            assert a == b.restrict(3)


def test_clearing_the_pole_gives_a_polynomial_window():
    f = pr(2, {(0, 0): 1}, {(0, 1): 1})
    s = iota_expand(f, (0, 1), 3)
    t = s.mul_poly(p_sub(p_var(2, 0), p_var(2, 1)))
    assert t.coeffs == {(0, 0): Fraction(1)}
    assert t.window == 3


def test_expand_linear_power_single_variable_is_exact():
    s = expand_linear_power(2, (0, 1), {1: -1}, 3, 5)
    assert s.window == INF
    assert s.coeffs == {(0, -3): Fraction(-1)}


def test_window_get_outside_certificate_raises():
    f = pr(2, {(0, 0): 1}, {(0, 1): 1})
    s = iota_expand(f, (0, 1), 2)
    assert s.get((-3, 2)) == 1
    assert s.get((-1, 1)) == 0
    with pytest.raises(KeyError):
        s.get((-5, 4))


def test_reconstruct_underdetermined_reports_needed_window():
    f = pr(2, {(2, 0): 1, (0, 2): 1}, {(0, 1): 1})
    s = iota_expand(f, (0, 1), 1)
    with pytest.raises(UnderdeterminedError) as exc:
        reconstruct(s, {(0, 1): 1}, None, 2)
    assert exc.value.needed == 2
    assert exc.value.available == 1


def test_reconstruct_inconsistent_when_bounds_too_tight():
    f = pr(2, {(0, 0): 1}, {(0, 1): 1})
    s = iota_expand(f, (0, 1), 3)
    with pytest.raises(InconsistentError):
        reconstruct(s, {}, None, 3)
    g = pr(2, {(0, 0): 1}, None, (1, 1))
    with pytest.raises(InconsistentError):
        reconstruct(iota_expand(g, (0, 1), 3), {}, (1, 0), 3)


def test_reconstruct_homogeneous_filter():
    f = pr(2, {(1, 0): 1, (0, 0): 1}, {(0, 1): 1})
    s = iota_expand(f, (0, 1), 2)
    with pytest.raises(InconsistentError):
        reconstruct(s, {(0, 1): 1}, None, 1, homogeneous_degree=1)
    g = reconstruct(s, {(0, 1): 1}, None, 1)
    assert g == f


def test_round_trip_corpus():
    rng = random.Random(20260814)
    for _ in range(120):
        f = random_pole_rational(rng)
        assert round_trip(f, rng) == f


def test_round_trip_region_independence():
    rng = random.Random(7)
    for _ in range(25):
        f = random_pole_rational(rng, nvars=3, max_pair=1)
        results = []
        for region in [(0, 1, 2), (2, 0, 1), (1, 2, 0)]:
            d = max(f.numerator_degree(), 0)
            s = iota_expand(f, region, d)
            results.append(reconstruct(s, f.pair_orders, f.zero_orders, d))
        assert results[0] == results[1] == results[2] == f


def test_expand_in_coords_collapses_difference():
    # f(z1, z2) = 1/(z1 - z2)^2 at z1 = zeta + x, z2 = zeta is exactly x^-2
    f = pr(2, {(0, 0): 1}, {(0, 1): 2})
    s = expand_in_coords(f, [{0: 1, 1: 1}, {0: 1}], 2, (0, 1), 3)
    assert s.coeffs == {(0, -2): Fraction(1)}


def test_expand_in_coords_mixed_pole():
    # f = 1/(z1 (z1 - z2)) at z1 = zeta + x, z2 = zeta: 1/((zeta + x) x),
    # expanded with x innermost: sum_k (-1)^k x^(k-1) zeta^(-1-k)
    f = pr(2, {(0, 0): 1}, {(0, 1): 1}, (1, 0))
    s = expand_in_coords(f, [{0: 1, 1: 1}, {0: 1}], 2, (0, 1), 2)
    assert s.coeffs == {
        (-1, -1): Fraction(1),
        (-2, 0): Fraction(-1),
        (-3, 1): Fraction(1),
        (-4, 2): Fraction(-1),
    }


def test_expand_in_coords_identity_matches_iota():
    rng = random.Random(99)
    for _ in range(10):
        f = random_pole_rational(rng, nvars=2, max_pair=2, max_zero=1)
        ident = [{0: 1}, {1: 1}]
        assert expand_in_coords(f, ident, 2, (1, 0), 2) == iota_expand(f, (1, 0), 2)


def test_reconstruct_affine_round_trip():
    # physical variables z1 = zeta + x, z2 = zeta
    images = [{0: 1, 1: 1}, {0: 1}]
    cases = [
        pr(2, {(1, 0): 1, (0, 1): 1}, {(0, 1): 1}),
        pr(2, {(2, 0): 1, (1, 1): -2, (0, 2): 1}, {(0, 1): 2}),
        pr(2, {(1, 1): 1}, {(0, 1): 2}),
    ]
    for f in cases:
        d = f.numerator_degree()
        s = expand_in_coords(f, images, 2, (0, 1), d + 1)
        g = reconstruct_affine(s, images, f.pair_orders, f.zero_orders, d)
        assert g == f


def test_reconstruct_affine_inconsistent():
    images = [{0: 1, 1: 1}, {0: 1}]
    f = pr(2, {(1, 0): 1, (0, 1): 1}, {(0, 1): 1})
    s = expand_in_coords(f, images, 2, (0, 1), 3)
    with pytest.raises(InconsistentError):
        reconstruct_affine(s, images, {}, None, 1)


def test_shift_var_moves_origin_pole_to_a_pair():
    f = pr(1, {(0,): 1}, None, (1,))
    g = f.shift_var(0)
    assert g == pr(2, {(0, 0): 1}, {(0, 1): 1})
    h = pr(2, {(0, 0): 1}, {(0, 1): 1})
    with pytest.raises(ValueError):
        h.shift_var(0)


def test_scale_vars_homogeneous():
    f = pr(2, {(1, 1): 1}, {(0, 1): 1})
    g = f.scale_vars()
    d = f.homogeneous_degree()
    expected = f.embed(3, [0, 1]).mul(PoleRational.monomial(3, (0, 0, d)))
    assert g == expected


def test_monomials_of_degree():
    assert monomials_of_degree(2, 2) == [(0, 2), (1, 1), (2, 0)]
    assert len(monomials_of_degree(3, 4)) == 15
    assert monomials_of_degree(2, -1) == []


small_fraction = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def small_pole_rationals(draw):
    terms = draw(st.integers(min_value=0, max_value=3))
    num = {}
    for _ in range(terms):
        e = (draw(st.integers(0, 2)), draw(st.integers(0, 2)))
        num[e] = draw(small_fraction)
    pairs = {(0, 1): draw(st.integers(0, 1))}
    zeros = (draw(st.integers(0, 1)), 0)
    return PoleRational(2, num, pairs, zeros)


@settings(max_examples=40, deadline=None)
@given(small_pole_rationals(), small_pole_rationals(), small_pole_rationals())
def test_ring_laws(a, b, c):
    assert a.add(b) == b.add(a)
    assert a.mul(b) == b.mul(a)
    assert a.add(b).mul(c) == a.mul(c).add(b.mul(c))
    assert a.add(b).add(c) == a.add(b.add(c))


@settings(max_examples=30, deadline=None)
@given(small_pole_rationals(), st.integers(0, 2))
def test_expansion_is_a_ring_map_on_windows(f, w):
    g = f.mul(f)
    s = iota_expand(f, (0, 1), w + f.total_pole_order())
    prod = s.mul(s).restrict(w)
    direct = iota_expand(g, (0, 1), w)
    assert prod == direct


def test_embed_flips_sign_for_reversed_odd_pairs():
    # 1/(z1-z2)^3 seen through the swap map is 1/(z2-z1)^3 = -1/(z1-z2)^3
    f = pr(2, {(0, 0): 1}, {(0, 1): 3})
    assert f.embed(2, [1, 0]) == pr(2, {(0, 0): -1}, {(0, 1): 3})
    assert f.embed(2, [1, 0]).embed(2, [1, 0]) == f
    # even orders are swap-invariant
    g = pr(2, {(0, 0): 1}, {(0, 1): 2})
    assert g.embed(2, [1, 0]) == g
    # a numerator variable follows the map independently of the sign flip
    h = pr(2, {(1, 0): 1}, {(0, 1): 1})
    assert h.embed(3, [2, 0]) == pr(3, {(0, 0, 1): -1}, {(0, 2): 1})
