"""Cochains, circle operations, and the coboundary.

Oracles: on weight-zero fixtures every cochain is a constant multilinear
map and the circle operations degenerate to the Hochschild operations of
the underlying associative algebra, built here directly from the mode
dictionaries (mode -1 is the product).  Graded cases are pinned by
vacuum insertions, by front actions against independently assembled
operator products, and by the regrouping identities that cancel the
square of the coboundary.
"""

from fractions import Fraction
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mosva.bimodule import regular_bimodule
from mosva.cochain import (
    Cochain,
    VacuumLike,
    check_front_exchange,
    check_front_left_absorb,
    check_front_left_shift,
    check_front_right_absorb,
    check_front_right_shift,
    check_insert_disjoint,
    check_insert_nested,
    check_membership,
    circ_i_E2,
    coboundary,
    coboundary0,
    cochain_is_zero,
    compare_cochains,
    constant_cochain,
    delta_square_identities,
    e01_circ2,
    e10_circ2,
    e_type_cochain,
    random_cochain,
    vacuum_like_basis,
    verify_delta_squared,
    weight_bounded_tuples,
    zero_cochain,
)
from mosva.fixtures import (
    dual_numbers,
    heisenberg,
    matrices_2x2,
    upper_triangular_2x2,
)
from mosva.ratfun import INF
from mosva.report import Report
from mosva.wvalued import WValuedRational

ONE = Fraction(1)


# ---------------------------------------------------------------------------
# Hochschild oracle for weight-zero fixtures, straight from the mode tables


def product(V, u, v):
    """u . v as a vector, mode -1 of the single-mode weight-zero operator."""
    return V.apply_mode(u, -1, {v: ONE})


def act_left(W, u, wvec):
    return W.apply_left(u, -1, wvec)


def act_right(W, wvec, v):
    out = {}
    for w_lab, c in wvec.items():
        for lab, x in W.right_image(w_lab, -1, v).items():
            s = out.get(lab, 0) + c * x
            if s:
                out[lab] = s
            else:
                out.pop(lab, None)
    return out


def all_tuples(V, degree):
    return weight_bounded_tuples(V.space, degree, 0)


def table_add(table, t, vec, c=ONE):
    acc = table.setdefault(t, {})
    for lab, x in vec.items():
        s = acc.get(lab, 0) + c * x
        if s:
            acc[lab] = s
        else:
            acc.pop(lab, None)


def drop_empty(table):
    return {t: vec for t, vec in table.items() if vec}


def hoch_face(V, table, degree, i):
    """Multiply arguments i and i+1 (1-based) and look the result up."""
    out = {}
    for t in all_tuples(V, degree + 1):
        for b, c in product(V, t[i - 1], t[i]).items():
            vec = table.get(t[: i - 1] + (b,) + t[i + 1:], {})
            table_add(out, t, vec, c)
    return drop_empty(out)


def hoch_left(V, W, table, degree):
    out = {}
    for t in all_tuples(V, degree + 1):
        table_add(out, t, act_left(W, t[0], table.get(t[1:], {})))
    return drop_empty(out)


def hoch_right(V, W, table, degree):
    out = {}
    for t in all_tuples(V, degree + 1):
        table_add(out, t, act_right(W, table.get(t[:-1], {}), t[-1]))
    return drop_empty(out)


def hoch_differential(V, W, table, degree):
    out = hoch_left(V, W, table, degree)
    for i in range(1, degree + 1):
        sign = ONE if i % 2 == 0 else -ONE
        for t, vec in hoch_face(V, table, degree, i).items():
            table_add(out, t, vec, sign)
    sign = ONE if degree % 2 else -ONE  # (-1)^(n+1)
    for t, vec in hoch_right(V, W, table, degree).items():
        table_add(out, t, vec, sign)
    return {t: vec for t, vec in out.items() if vec}


def random_table(V, degree, rng):
    table = {}
    for t in all_tuples(V, degree):
        vec = {
            lab: Fraction(rng.randint(-3, 3))
            for lab in V.space.labels()
            if rng.random() < 0.6
        }
        table[t] = {lab: c for lab, c in vec.items() if c}
    return table


def cochain_table(phi):
    """Read a weight-zero cochain back into a constant table."""
    out = {}
    for t, f in phi.values.items():
        vec = {}
        for lab, g in f.components.items():
            coeffs = list(g.num.values())
            assert list(g.num) == [(0,) * f.nvars] and not g.pair_orders
            vec[lab] = coeffs[0]
        if vec:
            out[t] = vec
    return out


WEIGHT_ZERO = [dual_numbers, matrices_2x2, upper_triangular_2x2]


@pytest.mark.parametrize("make", WEIGHT_ZERO)
@pytest.mark.parametrize("degree", [1, 2])
def test_circ_matches_hochschild_face(make, degree):
    V = make()
    W = regular_bimodule(V)
    rng = Random(f"{V.name}-{degree}")
    table = random_table(V, degree, rng)
    phi = constant_cochain(V, W, degree, table, 3)
    for i in range(1, degree + 1):
        got = cochain_table(circ_i_E2(phi, i))
        assert got == hoch_face(V, table, degree, i)


@pytest.mark.parametrize("make", WEIGHT_ZERO)
@pytest.mark.parametrize("degree", [1, 2])
def test_front_actions_match_module_actions(make, degree):
    V = make()
    W = regular_bimodule(V)
    rng = Random(f"{V.name}-front-{degree}")
    table = random_table(V, degree, rng)
    phi = constant_cochain(V, W, degree, table, 3)
    assert cochain_table(e10_circ2(phi)) == hoch_left(V, W, table, degree)
    assert cochain_table(e01_circ2(phi)) == hoch_right(V, W, table, degree)


@pytest.mark.parametrize("make", WEIGHT_ZERO)
@pytest.mark.parametrize("degree", [1, 2])
def test_coboundary_is_hochschild_differential(make, degree):
    V = make()
    W = regular_bimodule(V)
    rng = Random(f"{V.name}-cob-{degree}")
    table = random_table(V, degree, rng)
    phi = constant_cochain(V, W, degree, table, 3)
    assert cochain_table(coboundary(phi)) == hoch_differential(V, W, table, degree)


def test_degree_one_coboundary_sign_convention():
    # front left action, minus the argument insertion, plus the front
    # reversed-right action
    V = matrices_2x2()
    W = regular_bimodule(V)
    table = random_table(V, 1, Random("signs"))
    phi = constant_cochain(V, W, 1, table, 3)
    manual = e10_circ2(phi).sub(circ_i_E2(phi, 1)).add(e01_circ2(phi))
    rep = Report("signs")
    compare_cochains(rep, "sign", "degree-one coboundary", coboundary(phi), manual)
    assert rep.ok and "sign-skipped-window" not in rep.counts


def test_degree_zero_coboundary_is_commutator():
    V = matrices_2x2()
    W = regular_bimodule(V)
    for w in vacuum_like_basis(V, W):
        phi = coboundary0(w, V, W)
        expected = {}
        for (v,) in all_tuples(V, 1):
            comm = act_left(W, v, w.vec)
            for lab, c in act_right(W, w.vec, v).items():
                s = comm.get(lab, 0) - c
                if s:
                    comm[lab] = s
                else:
                    comm.pop(lab, None)
            if comm:
                expected[(v,)] = comm
        assert cochain_table(phi) == expected


def test_degree_zero_coboundary_vanishes_when_commutative():
    V = dual_numbers()
    W = regular_bimodule(V)
    rep = Report("inner")
    for w in vacuum_like_basis(V, W):
        cochain_is_zero(rep, "inner", "commutative inner derivation",
                        coboundary0(w, V, W))
    assert rep.ok and rep.counts["inner"] == 4


def test_degree_zero_coboundary_vanishes_on_central_vector():
    # the identity matrix commutes with everything
    V = matrices_2x2()
    W = regular_bimodule(V)
    central = VacuumLike(W, {"e11": ONE, "e22": ONE})
    rep = Report("central")
    cochain_is_zero(rep, "central", "central inner derivation",
                    coboundary0(central, V, W))
    assert rep.ok


@pytest.mark.parametrize("make", [matrices_2x2, dual_numbers])
def test_coboundary_of_degree_zero_coboundary_vanishes(make):
    V = make()
    W = regular_bimodule(V)
    rep = Report("dd")
    for w in vacuum_like_basis(V, W):
        cochain_is_zero(rep, "dd", "square on a module vector",
                        coboundary(coboundary0(w, V, W)))
    assert rep.ok


# ---------------------------------------------------------------------------
# graded cases: vacuum insertions and front actions on chain products


def embed_value(f, nvars_new, var_map):
    comps = {lab: g.embed(nvars_new, var_map) for lab, g in f.components.items()}
    pairs = {}
    for (i, j), p in f.pole_orders.items():
        a, b = sorted((var_map[i], var_map[j]))
        pairs[(a, b)] = p
    return WValuedRational(
        nvars_new, f.space, comps, pairs, f.total_weight, None,
        f.certified_weight,
    )


def test_front_left_action_of_vacuum_is_identity():
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    phi = e_type_cochain(V, W, 1, 0, vac, arg_upto=4)
    out = e10_circ2(phi)
    vac_label = V.space.labels_of_weight(0)[0]
    for (b,) in phi.tuples():
        got = out.value((vac_label, b))
        want = embed_value(phi.value((b,)), 2, [1])
        wc = min(got.certified_weight, want.certified_weight)
        assert wc >= V.space.weight(b)
        assert got.restrict_weight(wc) == want.restrict_weight(wc)


def test_insert_chain_with_vacuum_reduces_to_value():
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    vac_label = V.space.labels_of_weight(0)[0]
    phi = e_type_cochain(V, W, 2, 1, vac, arg_upto=4)
    out = circ_i_E2(phi, 1, out_upto=4)
    for t in phi.tuples():
        b, rest = t[0], t[1]
        # vacuum first: the value only depends on the second chain variable
        got = out.value((vac_label, b, rest))
        want = embed_value(phi.value(t), 3, [1, 2])
        wc = min(got.certified_weight, want.certified_weight)
        assert got.restrict_weight(wc) == want.restrict_weight(wc)
        # vacuum second: the value only depends on the first chain variable
        got = out.value((b, vac_label, rest))
        want = embed_value(phi.value(t), 3, [0, 2])
        wc = min(got.certified_weight, want.certified_weight)
        assert got.restrict_weight(wc) == want.restrict_weight(wc)
        if sum(V.space.weight(lab) for lab in t) <= 2:
            assert wc >= 0


@pytest.mark.parametrize("make,upto", [(dual_numbers, 0), (heisenberg, 3)])
def test_front_actions_extend_chain_products(make, upto):
    # prepending a left operator to an all-reversed-right product, or a
    # reversed-right operator to an all-left product, is again a chain
    # product with the new argument in front resp. at the back
    V = make() if make is dual_numbers else make(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    rep = Report("chain")
    left = e10_circ2(e_type_cochain(V, W, 1, 0, vac, arg_upto=upto))
    compare_cochains(rep, "left", "front left on chain",
                     left, e_type_cochain(V, W, 2, 1, vac, arg_upto=upto))
    right = e01_circ2(e_type_cochain(V, W, 1, 1, vac, arg_upto=upto))
    compare_cochains(rep, "right", "front right on chain",
                     right, e_type_cochain(V, W, 2, 1, vac, arg_upto=upto))
    assert rep.ok
    assert rep.counts["left"] and rep.counts["right"]


# ---------------------------------------------------------------------------
# the defining properties and the membership checker


def test_value_with_wrong_total_weight_rejected():
    V = heisenberg(3)
    W = regular_bimodule(V)
    phi = zero_cochain(V, W, 1, 3)
    bad = dict(phi.values)
    b = V.space.labels_of_weight(1)[0]
    bad[(b,)] = WValuedRational.zero(1, W.space, 5)
    with pytest.raises(ValueError):
        Cochain(1, V, W, bad, 3, 3)


@pytest.mark.parametrize("make", [dual_numbers, heisenberg])
def test_chain_products_pass_membership(make):
    V = make() if make is dual_numbers else make(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    upto = 0 if make is dual_numbers else 5
    phi = e_type_cochain(V, W, 2, 1, vac, arg_upto=upto)
    rep = check_membership(phi, m=2)
    assert rep.ok
    assert rep.counts["shape"] or rep.counts["shape-partial"]


def test_membership_catches_planted_shift_defect():
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    phi = e_type_cochain(V, W, 1, 1, vac, arg_upto=4)
    values = dict(phi.values)
    b = V.space.labels_of_weight(2)[0]
    values[(b,)] = values[(b,)].scale(Fraction(2))
    bad = Cochain(1, V, W, values, INF, 4)
    rep = check_membership(bad, m=1)
    assert not rep.ok


def test_grading_defect_not_constructible():
    # per-component homogeneity is enforced at the value level, so a
    # value violating the conjugation scaling cannot even be built
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    phi = e_type_cochain(V, W, 1, 1, vac, arg_upto=4)
    b = V.space.labels_of_weight(2)[0]
    f = phi.values[(b,)]
    comps = dict(f.components)
    lab2 = V.space.labels_of_weight(2)[0]
    lab3 = V.space.labels_of_weight(3)[0]
    assert lab2 in comps
    comps[lab3] = comps.pop(lab2)
    with pytest.raises(ValueError):
        WValuedRational(
            1, W.space, comps, f.pole_orders, f.total_weight, None,
            f.certified_weight,
        )


def test_circle_operations_drop_one_level():
    V = matrices_2x2()
    W = regular_bimodule(V)
    table = random_table(V, 1, Random("levels"))
    phi = constant_cochain(V, W, 1, table, 3)
    d1 = coboundary(phi, m=3)
    assert d1.declared_m == 2
    assert check_membership(d1, m=2).ok
    d2 = coboundary(d1, m=2)
    assert d2.declared_m == 1
    assert check_membership(d2, m=1).ok
    with pytest.raises(ValueError):
        coboundary(d1, m=3)  # more levels than the cochain declares


def test_chain_products_compose_at_every_level():
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    phi = e_type_cochain(V, W, 1, 1, vac, arg_upto=4)
    assert phi.declared_m == INF
    assert coboundary(phi, out_upto=4).declared_m == INF


# ---------------------------------------------------------------------------
# anchor independence of the insertion


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=15, deadline=None)
def test_insertion_anchor_independent_weight_zero(seed):
    V = matrices_2x2()
    W = regular_bimodule(V)
    table = random_table(V, 2, Random(seed))
    phi = constant_cochain(V, W, 2, table, 3)
    for i in (1, 2):
        circ_i_E2(phi, i, verify=True)  # raises InconsistentError on mismatch


def test_insertion_anchor_independent_graded():
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    phi = e_type_cochain(V, W, 2, 1, vac, arg_upto=4)
    for i in (1, 2):
        circ_i_E2(phi, i, out_upto=3, verify=True)


# ---------------------------------------------------------------------------
# the square of the coboundary and its regrouping identities


IDENTITY_CHECKS = [
    ("left-absorb", lambda phi, n: [check_front_left_absorb(phi)]),
    ("left-shift", lambda phi, n: [
        check_front_left_shift(phi, i) for i in range(1, n + 1)
    ]),
    ("exchange", lambda phi, n: [check_front_exchange(phi)]),
    ("disjoint", lambda phi, n: [
        check_insert_disjoint(phi, j, i)
        for i in range(2, n + 2) for j in range(1, min(i - 1, n) + 1)
    ]),
    ("nested", lambda phi, n: [
        check_insert_nested(phi, i, j)
        for i in range(1, n + 1) for j in range(i, n + 1)
    ]),
    ("right-absorb", lambda phi, n: [check_front_right_absorb(phi)]),
    ("right-shift", lambda phi, n: [
        check_front_right_shift(phi, i) for i in range(1, n + 1)
    ]),
]


@pytest.mark.parametrize("name,run", IDENTITY_CHECKS)
def test_regrouping_identity_weight_zero(name, run):
    V = matrices_2x2()
    W = regular_bimodule(V)
    table = random_table(V, 2, Random(f"id-{name}"))
    phi = constant_cochain(V, W, 2, table, 4)
    for rep in run(phi, 2):
        assert rep.ok, f"{name}: {rep.failures[:3]}"


@pytest.mark.parametrize("name,run", IDENTITY_CHECKS)
def test_regrouping_identity_graded(name, run):
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    phi = e_type_cochain(V, W, 1, 1, vac, arg_upto=4)
    for rep in run(phi, 1):
        assert rep.ok, f"{name}: {rep.failures[:3]}"
        assert sum(rep.counts.values())


@pytest.mark.parametrize("make", [dual_numbers, matrices_2x2])
def test_delta_squared_vanishes_weight_zero(make):
    V = make()
    W = regular_bimodule(V)
    rng = Random(f"{V.name}-d2")
    samples = [random_cochain(V, W, d, rng) for d in (1, 2) for _ in range(3)]
    rep = verify_delta_squared(samples, V, W, run_identities=False)
    assert rep.ok
    assert rep.counts["delta2"] >= 6


def test_delta_squared_vanishes_graded():
    V = heisenberg(4)
    W = regular_bimodule(V)
    rng = Random("heis-d2")
    samples = [random_cochain(V, W, d, rng) for d in (1, 2) for _ in range(2)]
    rep = verify_delta_squared(samples, V, W, run_identities=False, out_upto=4)
    assert rep.ok
    assert rep.counts["delta2"] > 0


def test_planted_sign_defect_is_caught_weight_zero():
    V = matrices_2x2()
    W = regular_bimodule(V)
    samples = [random_cochain(V, W, 1, Random("plant"))]
    rep = verify_delta_squared(
        samples, V, W, run_identities=False, plant_sign_defect=True
    )
    assert not rep.ok


def test_planted_sign_defect_is_caught_graded():
    # degree two: on the regular bimodule over the vacuum, both front
    # actions agree on degree-one chain products, which puts the flipped
    # term in the kernel there; the mixed two-argument product does not
    # have that degeneracy
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    psi = e_type_cochain(V, W, 2, 1, vac, arg_upto=4)
    rep = verify_delta_squared(
        [psi], V, W, run_identities=False, plant_sign_defect=True, out_upto=4
    )
    assert not rep.ok


def test_identity_battery_runs_clean_on_graded_sample():
    V = heisenberg(4)
    W = regular_bimodule(V)
    vac = vacuum_like_basis(V, W)[0]
    phi = e_type_cochain(V, W, 1, 1, vac, arg_upto=4)
    rep = delta_square_identities(phi)
    assert rep.ok
    assert sum(rep.counts.values()) > 100


# ---------------------------------------------------------------------------
# enumeration and basis helpers


def test_weight_bounded_tuples_enumeration():
    V = heisenberg(4)
    assert len(weight_bounded_tuples(V.space, 1, 4)) == 12
    assert len(weight_bounded_tuples(V.space, 2, 2)) == 8
    # deterministic enumeration
    assert weight_bounded_tuples(V.space, 2, 2) == weight_bounded_tuples(V.space, 2, 2)
    D = dual_numbers()
    assert len(weight_bounded_tuples(D.space, 3, 0)) == 8


def test_vacuum_like_basis_dimensions():
    cases = [(dual_numbers(), 2), (matrices_2x2(), 4), (heisenberg(4), 1)]
    for V, dim in cases:
        W = regular_bimodule(V)
        assert len(vacuum_like_basis(V, W)) == dim


def test_constant_cochain_requires_weight_zero():
    V = heisenberg(3)
    W = regular_bimodule(V)
    with pytest.raises(ValueError):
        constant_cochain(V, W, 1, {}, 2)


def test_coboundary_of_zero_cochain_is_zero():
    V = heisenberg(4)
    W = regular_bimodule(V)
    phi = zero_cochain(V, W, 2, 4)
    rep = Report("zero")
    cochain_is_zero(rep, "zero", "coboundary of zero", coboundary(phi, out_upto=4))
    assert rep.ok
