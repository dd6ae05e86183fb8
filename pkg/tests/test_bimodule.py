"""Two-sided module structure: regular bimodules, sub-bimodules, the
reversed right action, and the mixed-product commutativity checks."""

from fractions import Fraction

import pytest

from mosva.bimodule import (
    BimoduleData,
    check_bimodule,
    check_lr_commutativity,
    lr_chain_state,
    regular_bimodule,
    sub_bimodule,
    y_sr_modes,
)
from mosva.fixtures import (
    ASSOCIATIVE_FIXTURES,
    dual_numbers,
    heisenberg,
    matrices_2x2,
    upper_triangular_2x2,
)
from mosva.ratfun import TruncatedLaurent, PoleRational, p_const, reconstruct
from mosva.assemble import safe_window

ONE = Fraction(1)


@pytest.mark.parametrize("make", sorted(ASSOCIATIVE_FIXTURES))
def test_regular_bimodule_passes_all_checks(make):
    V = ASSOCIATIVE_FIXTURES[make]()
    W = regular_bimodule(V)
    rep = check_bimodule(V, W)
    assert rep.ok, rep.summary()
    assert rep.checked("left-assoc") + rep.checked("left-assoc-zero") > 0
    assert rep.checked("right-assoc") + rep.checked("right-assoc-zero") > 0
    assert rep.checked("compat-assoc") + rep.checked("compat-assoc-zero") > 0
    assert rep.checked("right-creation") > 0
    assert rep.checked("mixed-rationality") > 0
    rep2 = check_lr_commutativity(V, W)
    assert rep2.ok, rep2.summary()
    assert rep2.checked("lr-comm") + rep2.checked("lr-comm-zero") > 0
    assert rep2.checked("sr-assoc") + rep2.checked("sr-assoc-zero") > 0


def test_regular_bimodule_heisenberg_with_honest_coverage():
    V = heisenberg(4)
    W = regular_bimodule(V)
    rep = check_bimodule(V, W, max_triple_weight=4)
    assert rep.ok, rep.summary()
    assert rep.checked("left-assoc") > 0
    assert rep.checked("left-assoc-skipped-window") > 0
    assert rep.checked("mixed-rationality") > 0
    rep2 = check_lr_commutativity(V, W, max_triple_weight=4)
    assert rep2.ok, rep2.summary()
    assert rep2.checked("lr-comm") > 0
    assert rep2.checked("sr-assoc") > 0


def test_heisenberg_sr_action_equals_left_action():
    # the boson algebra equals its own reversed-order algebra, so the
    # regular bimodule's sR modes must coincide with the left modes
    V = heisenberg(3)
    W = regular_bimodule(V)
    sr = W.ensure_sr(V)
    assert sr == W.left_modes


def test_sr_action_is_right_multiplication_when_d_vanishes():
    # with D = 0 the exponential factor drops out and only the n = -1
    # mode survives: Y^sR(v, x) w = w v
    V = dual_numbers()
    W = regular_bimodule(V)
    W.ensure_sr(V)
    assert W.sr_image("x", -1, "1") == {"x": ONE}
    assert W.sr_image("x", -1, "x") == {}
    assert W.sr_image("1", -1, "x") == {"x": ONE}
    assert all(n == -1 for (_, n) in W._sr_modes)


def test_sr_of_vacuum_is_identity():
    for make in (dual_numbers, matrices_2x2, upper_triangular_2x2):
        V = make()
        W = regular_bimodule(V)
        W.ensure_sr(V)
        for w_lab in W.space.labels():
            assert W.apply_sr_vec(V.vacuum, -1, {w_lab: ONE}) == {w_lab: ONE}
            assert W.apply_sr_vec(V.vacuum, 0, {w_lab: ONE}) == {}
            assert W.apply_sr_vec(V.vacuum, -2, {w_lab: ONE}) == {}


def test_vacuum_sr_operator_drops_out_of_chains():
    V = dual_numbers()
    W = regular_bimodule(V)
    state = lr_chain_state(
        V, W, [("L", {"x": ONE}), ("sR", {"1": ONE})], {"1": ONE}, 10
    )
    assert state == {(0, 0): {"x": ONE}}


def test_two_point_mixed_chain_reconstructs_to_pair_pole():
    # E(Y^L(a, z1) Y^sR(a, z2) vacuum) = 1 / (z1 - z2)^2 on the boson
    # fixture, assembled from either operator order
    V = heisenberg(4)
    W = regular_bimodule(V)
    a = (1,)
    vac = ()
    window = safe_window(V.space, 0, [1, 1])
    pair = W.mixed_bound(a, a)
    zeros = (W.left_bound(a, vac), W.sr_bound(a, vac))
    d = (0 - 2) + pair + sum(zeros)
    assert pair == 2 and zeros == (0, 0) and d == 0

    want = PoleRational(2, p_const(2, ONE), {(0, 1): 2}, (0, 0))
    s1_state = lr_chain_state(V, W, [("L", {a: ONE}), ("sR", {a: ONE})], {vac: ONE}, window)
    s1 = TruncatedLaurent(2, (0, 1), {m: v[vac] for m, v in s1_state.items() if vac in v}, window, 2)
    assert reconstruct(s1, {(0, 1): pair}, zeros, d, homogeneous_degree=d) == want

    s2_state = lr_chain_state(V, W, [("sR", {a: ONE}), ("L", {a: ONE})], {vac: ONE}, window)
    s2 = TruncatedLaurent(
        2, (1, 0),
        {(m[1], m[0]): v[vac] for m, v in s2_state.items() if vac in v},
        window, 2,
    )
    assert reconstruct(s2, {(0, 1): pair}, zeros, d, homogeneous_degree=d) == want


def test_ideal_is_a_sub_bimodule_of_dual_numbers():
    V = dual_numbers()
    W = sub_bimodule(V, ["x"], "dual_ideal_x")
    assert W.space.labels() == ["x"]
    rep = check_bimodule(V, W)
    assert rep.ok, rep.summary()
    rep2 = check_lr_commutativity(V, W)
    assert rep2.ok, rep2.summary()


def test_non_invariant_span_is_rejected():
    V = dual_numbers()
    with pytest.raises(ValueError, match="not closed"):
        sub_bimodule(V, ["1"], "bad")


def test_swapped_right_modes_are_reported():
    # swap the two columns of R_{-1}(x) in the dual-numbers regular
    # bimodule; the creation property and right associativity both break
    V = dual_numbers()
    right = {key: {a: dict(img) for a, img in cols.items()}
             for key, cols in V.modes.items()}
    col = right[("x", -1)]
    col["1"], col["x"] = col.get("x", {}), col.get("1", {})
    W = BimoduleData(
        "planted", V.space, V.modes, right, V.d,
        V.pole_bounds, V.pole_bounds, V.pole_bounds,
    )
    rep = check_bimodule(V, W)
    assert not rep.ok
    text = " ".join(rep.violations)
    assert "vacuum" in text or "creation" in text or "associativity" in text


def test_sr_modes_of_planted_defect_change_sign_structure():
    # same plant, but checked through the reversed action: the sR table
    # no longer matches left multiplication
    V = dual_numbers()
    right = {key: {a: dict(img) for a, img in cols.items()}
             for key, cols in V.modes.items()}
    col = right[("x", -1)]
    col["1"], col["x"] = col.get("x", {}), col.get("1", {})
    W = BimoduleData(
        "planted", V.space, V.modes, right, V.d,
        V.pole_bounds, V.pole_bounds, V.pole_bounds,
    )
    sr = y_sr_modes(V, W)
    # the plant rewired R_{-1}(x): the vacuum's sR operator is no longer
    # the identity on "x", which the structural sweep must flag
    assert sr.get(("1", -1), {}).get("x", {}) == {}
    assert sr.get(("x", -1), {}).get("x", {}) == {"x": ONE}
    rep = check_lr_commutativity(V, W)
    assert not rep.ok
