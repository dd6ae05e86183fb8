"""Multilinear cochains valued in rational functions, and their coboundary.

A degree-n cochain assigns to every n-tuple of algebra basis vectors a
module-valued rational function of n variables, extended linearly in
each slot.  Three properties qualify such a map for the coboundary
calculus:

* shift compatibility: applying the algebra's shift operator in a slot
  differentiates the value in that slot's variable, and the module's
  shift operator acts as the sum of all the derivatives;
* grading compatibility: each dual component is homogeneous of degree
  wt(w') minus the total argument weight, the infinitesimal form of
  conjugating the arguments and scaling all variables at once;
* composability with m further operators: filling slots with product
  chains anchored at auxiliary cluster points, and applying front
  operators on the module side, always re-sums to a single rational
  function independent of the anchors, with poles only between physical
  variables and orders bounded by a table depending on the two vectors
  involved.

``_slot_insertion`` is the engine behind everything: it expands one
slot's argument into a product chain at an anchor, multiplies by the
value's own expansion, and reconstructs a function of the physical
variables.  The anchor is either a fresh cluster point or the last
variable of the chain; the two assemblies are genuinely different
series, and agreement of their reconstructions is how anchor
independence is certified (for a single-element chain the second
assembly degenerates to the stored value, so the comparison checks the
Taylor re-expansion granted by the shift property).

On top of the engine sit the three circle operations, the coboundary
and its degree-0 variant, the membership checker, and the seven
regrouping identities that cancel the square of the coboundary summand
by summand.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from random import Random
from typing import Iterable, Mapping, Sequence

from .algebra import MosvaData
from .assemble import assemble_product, safe_window, vec_weight
from .bimodule import BimoduleData
from .graded import Label, Vec, vec_is_zero
from .ratfun import (
    INF,
    InconsistentError,
    PoleRational,
    UnderdeterminedError,
    wdeg,
)
from .report import Report
from .scalars import rank_kernel_image
from .wvalued import (
    ONE,
    WValuedRational,
    _finite_window,
    _reconstruct_components,
    apply_front_modes,
    e_product,
    expand_components,
    no_negative_mode_labels,
)


def _clamp_inf(window: int) -> int:
    # arithmetic on INF windows (INF - T and the like) must stay INF
    return INF if window >= INF // 2 else window

ArgTuple = tuple  # tuple of algebra basis labels


def argument_pair_cap(V: MosvaData, W: BimoduleData, u: Label, v: Label) -> int:
    """Declared pole cap between the variables carrying two arguments.

    A cochain does not record which operator kind a variable came from,
    so the cap must cover every kind the pair can realize: either order
    of the algebra's own table and either order of the mixed table.
    """
    return max(
        V.pole_bound(u, v),
        V.pole_bound(v, u),
        W.mixed_bound(u, v),
        W.mixed_bound(v, u),
    )


def weight_bounded_tuples(space, length: int, max_total: int) -> list[ArgTuple]:
    """All label tuples of the given length with total weight at most
    max_total, in a deterministic order."""
    labs = sorted(space.labels(), key=lambda lab: (space.weight(lab), str(lab)))
    out: list[ArgTuple] = []

    def rec(prefix: list, used: int):
        if len(prefix) == length:
            out.append(tuple(prefix))
            return
        for lab in labs:
            w = space.weight(lab)
            if used + w > max_total:
                break
            prefix.append(lab)
            rec(prefix, used + w)
            prefix.pop()

    if length >= 0 and max_total >= 0:
        rec([], 0)
    return out


# ---------------------------------------------------------------------------
# degree-0 data


class VacuumLike:
    """A weight-zero module vector killed by the shift operator.

    Exactly the degree-0 data the complex admits: for such w both module
    actions on w have no negative modes, so every product over w
    reconstructs.  Anything else is rejected rather than guessed at.
    """

    __slots__ = ("W", "vec")

    def __init__(self, W: BimoduleData, vec: Vec):
        vec = {lab: Fraction(c) for lab, c in vec.items() if c}
        for lab in vec:
            if W.space.weight(lab) != 0:
                raise ValueError(f"vacuum-like vector must have weight 0, got {lab!r}")
        if not vec_is_zero(W.d.apply(vec)):
            raise ValueError("vacuum-like vector must be killed by the shift operator")
        self.W = W
        self.vec = vec

    def check_regular(self, V: MosvaData) -> None:
        """Both actions on the vector must be free of negative modes.

        This is a consequence of the defining conditions; on explicit
        data we verify it label by label because the product routines
        demand it that way.
        """
        bad = set(self.vec) - no_negative_mode_labels(V, self.W)
        if bad:
            raise ValueError(
                f"negative modes act on {sorted(bad, key=str)!r}; "
                "the module data violates the vacuum-like consequence"
            )

    def __repr__(self) -> str:
        return f"VacuumLike({self.vec!r})"


def vacuum_like_basis(V: MosvaData, W: BimoduleData) -> list[VacuumLike]:
    """Basis of the weight-zero kernel of the module's shift operator."""
    labs0 = sorted(W.space.labels_of_weight(0), key=str)
    if not labs0:
        return []
    codomain = W.space.labels()
    m = W.d.to_matrix(labs0, codomain)
    _, kernel, _ = rank_kernel_image(m)
    out = []
    for coeffs in kernel:
        vec = {lab: c for lab, c in zip(labs0, coeffs) if c}
        wl = VacuumLike(W, vec)
        wl.check_regular(V)
        out.append(wl)
    return out


# ---------------------------------------------------------------------------
# the cochain container


class Cochain:
    """Values of a degree-n multilinear map on weight-bounded basis tuples.

    values[t] is the function at the basis tuple t, a WValuedRational in
    n variables whose total weight equals the tuple's weight (the
    grading property fixes the offset to zero).  Every tuple of total
    weight at most arg_upto is stored, zero values included; linear
    extension is implicit.  declared_m records the composability level
    the construction grants: structural (INF) for chain-product and
    coboundary-image cochains, a checker bound otherwise.
    """

    __slots__ = ("degree", "V", "W", "values", "declared_m", "arg_upto")

    def __init__(
        self,
        degree: int,
        V: MosvaData,
        W: BimoduleData,
        values: Mapping[ArgTuple, WValuedRational],
        declared_m: int = 0,
        arg_upto: int | None = None,
    ):
        if degree < 1:
            raise ValueError("degree must be at least 1; weight-zero shift-killed "
                             "vectors carry the degree-0 data")
        self.degree = degree
        self.V = V
        self.W = W
        self.declared_m = declared_m
        if arg_upto is None:
            arg_upto = max(
                (sum(V.space.weight(lab) for lab in t) for t in values), default=0
            )
        self.arg_upto = arg_upto
        vals: dict[ArgTuple, WValuedRational] = {}
        for t in weight_bounded_tuples(V.space, degree, arg_upto):
            f = values.get(t)
            if f is None:
                raise ValueError(f"missing value at tuple {t!r}")
            total = sum(V.space.weight(lab) for lab in t)
            if f.nvars != degree:
                raise ValueError(f"value at {t!r} has {f.nvars} variables")
            if f.space is not W.space:
                raise ValueError(f"value at {t!r} lives in the wrong module")
            if f.total_weight != total:
                raise ValueError(
                    f"value at {t!r} has total weight {f.total_weight}, the grading "
                    f"property forces {total}"
                )
            for (i, j), p in f.pole_orders.items():
                if p > argument_pair_cap(V, W, t[i], t[j]):
                    raise ValueError(
                        f"value at {t!r} declares a pole of order {p} between "
                        f"variables {i} and {j}, above the argument table"
                    )
            vals[t] = f
        self.values = vals

    # -- access ------------------------------------------------------------

    def tuples(self) -> list[ArgTuple]:
        return list(self.values)

    def value(self, t: ArgTuple) -> WValuedRational:
        f = self.values.get(tuple(t))
        if f is None:
            raise KeyError(f"tuple {t!r} outside the stored range (<= {self.arg_upto})")
        return f

    def describe(self) -> str:
        return f"deg-{self.degree} cochain on {self.W.name} over {self.V.name}"

    def __repr__(self) -> str:
        return f"Cochain({self.describe()}, m={self.declared_m}, upto {self.arg_upto})"

    # -- linear structure ----------------------------------------------------

    def add(self, other: "Cochain") -> "Cochain":
        if self.degree != other.degree or self.V is not other.V or self.W is not other.W:
            raise ValueError("cochains live on different data")
        upto = min(self.arg_upto, other.arg_upto)
        vals = {}
        for t in weight_bounded_tuples(self.V.space, self.degree, upto):
            a, b = self.values[t], other.values[t]
            # a sum is only pinned where both summands are
            wc = min(a.certified_weight, b.certified_weight)
            vals[t] = a.restrict_weight(wc).add(b.restrict_weight(wc))
        return Cochain(
            self.degree, self.V, self.W, vals,
            min(self.declared_m, other.declared_m), upto,
        )

    def scale(self, c: Fraction) -> "Cochain":
        vals = {t: f.scale(c) for t, f in self.values.items()}
        return Cochain(self.degree, self.V, self.W, vals, self.declared_m, self.arg_upto)

    def sub(self, other: "Cochain") -> "Cochain":
        return self.add(other.scale(Fraction(-1)))

    def restrict_args(self, upto: int) -> "Cochain":
        upto = min(upto, self.arg_upto)
        vals = {
            t: self.values[t]
            for t in weight_bounded_tuples(self.V.space, self.degree, upto)
        }
        return Cochain(self.degree, self.V, self.W, vals, self.declared_m, upto)


def zero_cochain(V: MosvaData, W: BimoduleData, degree: int, arg_upto: int,
                 declared_m: int = INF) -> Cochain:
    vals = {
        t: WValuedRational.zero(degree, W.space, sum(V.space.weight(l) for l in t))
        for t in weight_bounded_tuples(V.space, degree, arg_upto)
    }
    return Cochain(degree, V, W, vals, declared_m, arg_upto)


def e_type_cochain(
    V: MosvaData,
    W: BimoduleData,
    degree: int,
    l: int,
    w: Vec,
    *,
    arg_upto: int | None = None,
    allow_partial: bool = True,
) -> Cochain:
    """The chain-product cochain: t maps to the product of left operators
    at the first l arguments and reversed-right operators at the rest,
    applied to w.

    The base vector must be homogeneous of weight zero (the grading
    property pins the value's total weight to the argument weight) and
    admit no negative modes on either side.  Such cochains compose with
    any number of further operators, hence declared_m is infinite.
    """
    if not 0 <= l <= degree:
        raise ValueError(f"left count {l} outside 0..{degree}")
    if isinstance(w, VacuumLike):
        w = w.vec
    if w and vec_weight(W.space, w) != 0:
        raise ValueError("base vector must have weight zero")
    if arg_upto is None:
        arg_upto = degree * V.space.max_weight()
    vals = {}
    for t in weight_bounded_tuples(V.space, degree, arg_upto):
        spec = [("L", u) for u in t[:l]] + [("sR", u) for u in t[l:]]
        vals[t] = e_product(spec, w, V, W, allow_partial=allow_partial)
    return Cochain(degree, V, W, vals, INF, arg_upto)


def constant_cochain(
    V: MosvaData,
    W: BimoduleData,
    degree: int,
    table: Mapping[ArgTuple, Vec],
    declared_m: int,
) -> Cochain:
    """A cochain with constant values, available when every weight is zero.

    table assigns a module vector to each basis tuple; missing tuples
    mean zero.  On weight-zero data every multilinear map has the shift
    and grading properties and composes at every level, so this is the
    full cochain space.
    """
    if V.space.max_weight() != 0 or W.space.max_weight() != 0:
        raise ValueError("constant cochains need all weights zero")
    zero_mono = (0,) * degree
    vals = {}
    for t in weight_bounded_tuples(V.space, degree, 0):
        vec = table.get(t, {})
        comps = {lab: PoleRational(degree, {zero_mono: Fraction(c)})
                 for lab, c in vec.items() if c}
        vals[t] = WValuedRational(degree, W.space, comps, {}, 0)
    return Cochain(degree, V, W, vals, declared_m, 0)


# ---------------------------------------------------------------------------
# the insertion engine


def _slot_insertion(
    family: Mapping[Label, WValuedRational],
    have_upto: int,
    slot: int,
    chain: Sequence[Label],
    V: MosvaData,
    W: BimoduleData,
    out_labels: Sequence,
    *,
    anchor: str = "fresh",
    allow_partial: bool = True,
    what: str = "",
) -> WValuedRational:
    """Insert a product chain into one slot of a family of values.

    family[b] is the value with basis label b in the slot; the family
    must contain every label of weight at most have_upto.  The slot's
    variable becomes the anchor of a cluster of len(chain) physical
    variables; with anchor="fresh" the chain is applied to the unit at
    an auxiliary point, with anchor="last" it is regrouped onto its last
    element so that the last physical variable is the anchor itself.
    out_labels lists the argument labels of the surrounding variables
    (the slot entry is ignored) for the cap table.
    """
    probe = next(iter(family.values()))
    n = probe.nvars
    alpha = len(chain)
    wt = V.space.weight
    hs = [wt(c) for c in chain]
    hsum = sum(hs)
    t_base = None
    for b, g in family.items():
        base = g.total_weight - wt(b)
        if t_base is None:
            t_base = base
        elif base != t_base:
            raise ValueError(f"{what}: family weights are inconsistent")
        if g.nvars != n:
            raise ValueError(f"{what}: family shapes differ")
    assert t_base is not None
    t_out = t_base + hsum

    def out_old(j: int) -> int:  # old variable j != slot in the output numbering
        return j if j < slot else j + alpha - 1

    def pair_table(fam) -> dict[tuple[int, int], int]:
        pairs: dict[tuple[int, int], int] = {}
        for s in range(alpha):
            for t_ in range(s + 1, alpha):
                p = V.pole_bound(chain[s], chain[t_])
                if p:
                    pairs[(slot + s, slot + t_)] = p
        for s in range(alpha):
            for j in range(n):
                if j == slot:
                    continue
                p = argument_pair_cap(V, W, chain[s], out_labels[j])
                if p:
                    a, b = sorted((slot + s, out_old(j)))
                    pairs[(a, b)] = p
        for g in fam.values():
            for (i, j), p in g.pole_orders.items():
                if slot in (i, j):
                    continue  # anchor poles re-emerge as block-to-old poles
                a, b = sorted((out_old(i), out_old(j)))
                pairs[(a, b)] = max(pairs.get((a, b), 0), p)
        return pairs

    if anchor == "fresh":
        ops, base_vec, base_w = list(chain), V.vacuum, 0
    elif anchor == "last":
        ops, base_vec, base_w = list(chain[:-1]), {chain[-1]: ONE}, hs[-1]
    else:
        raise ValueError(f"unknown anchor {anchor!r}")

    # The chain block's exponent sum pins the weight of the member a
    # series key came from, and expansion dips land on the earlier
    # variable of each pole pair, so a key's suffix starting at the
    # chain block sits at wt(b) - hsum minus at most the poles internal
    # to the arguments after the slot.  Solving a component of degree d
    # therefore consults exactly the members with
    # wt(b) <= hsum + d + q_after, and a label outside the handed
    # family stays out of reach as long as d respects the cap-table
    # version of the same bound.
    qa_cap = sum(
        argument_pair_cap(V, W, out_labels[i], out_labels[j])
        for i in range(slot + 1, n) for j in range(i + 1, n)
    )
    rest_pairs = sum(
        argument_pair_cap(V, W, out_labels[i], out_labels[j])
        for i in range(n) for j in range(i + 1, n)
        if i != slot and j != slot
    )

    def q_after(g: WValuedRational) -> int:
        return sum(p for (i, j), p in g.pole_orders.items() if i > slot)

    def row_caps(b: Label) -> int:
        return rest_pairs + sum(
            argument_pair_cap(V, W, b, out_labels[j])
            for j in range(n) if j != slot
        )

    def clean_upto(b: Label, g: WValuedRational) -> int:
        # below total weight minus the row's cap total the component is
        # forced to vanish, so the value is trusted there regardless of
        # how far its solve reached
        return max(g.certified_weight, g.total_weight - row_caps(b) - 1)

    out_nvars = n - 1 + alpha
    wmin, wmax = W.space.min_weight(), W.space.max_weight()
    if not family:
        if not allow_partial:
            raise UnderdeterminedError(
                0, -1, f"{what}: no stored values to consult; raise the stored range"
            )
        return WValuedRational(
            out_nvars, W.space, {}, pair_table({}), t_out, None, wmin - 1
        )

    safe = _clamp_inf(safe_window(V.space, base_w, [wt(c) for c in ops]))
    absent_gap = min(
        (wt(b) - hsum - qa_cap - 1
         for b in V.space.labels() if b not in family),
        default=INF,
    )

    # build the consult subset per component weight: a member joins once
    # the solve depth reaches its entry key, and the cap total of the
    # subset alone fixes that weight's numerator degree.  The subsets
    # and degrees grow with the weight, so one upward scan finds every
    # solvable level; past the first unclean or too-deep level the
    # equations are no longer trusted
    levels: list[tuple[int, int, dict]] = []  # (weight, degree, pair table)
    subset: dict[Label, WValuedRational] = {}
    for w in range(wmin, wmax + 1):
        while True:
            table_w = pair_table(subset)
            d_w = w - t_out + sum(table_w.values())
            grow = {
                b: g for b, g in family.items()
                if b not in subset
                and wt(b) <= hsum + max(d_w, 0) + q_after(g)
            }
            if not grow:
                break
            subset.update(grow)
        qa_max = max((q_after(g) for g in subset.values()), default=0)
        if (
            max(d_w, 0) > absent_gap
            or max(d_w, 0) + qa_max > safe
            or any(clean_upto(b, g) < w for b, g in subset.items())
        ):
            break
        levels.append((w, d_w, table_w))

    if not levels:
        if not allow_partial:
            raise UnderdeterminedError(
                0, -1, f"{what}: no clean window at all; raise the stored range"
            )
        return WValuedRational(
            out_nvars, W.space, {}, pair_table(family), t_out, None, wmin - 1
        )

    best = levels[-1][0]
    window = max(levels[-1][1], 0)
    cert = INF if W.space.complete and best >= wmax else best
    q_val = max((q_after(g) for g in subset.values()), default=0)
    family = {
        b: g for b, g in subset.items()
        if wt(b) <= hsum + window + q_after(g)
    }
    out_pairs = pair_table(family)

    p_chain = sum(
        V.pole_bound(chain[s], chain[t_])
        for s in range(alpha) for t_ in range(s + 1, alpha)
    )
    naux = len(ops)
    nseries = n + naux

    inner_state = assemble_product(
        [("V", {c: ONE}) for c in ops],
        {(): base_vec},
        apply_mode=lambda kind, ul, k, vec: V.apply_mode(ul, k, vec),
        op_space=V.space,
        target_space=V.space,
        window=window + q_val,
    )
    win_val = window + p_chain
    region = tuple(range(nseries))
    exp_cache: dict[Label, dict] = {}
    state: dict[tuple, Vec] = {}
    for mono_x, bvec in inner_state.items():
        for b, cb in bvec.items():
            g = family.get(b)
            if g is None:
                # outside the consult range; any key it would produce
                # sits above every level's degree, so dropping it leaves
                # the consulted coefficients intact
                continue
            exp = exp_cache.get(b)
            if exp is None:
                exp = exp_cache[b] = expand_components(g, win_val)
            for vmono, vec in exp.items():
                key = vmono[: slot + 1] + mono_x + vmono[slot + 1:]
                if wdeg(key, region) > window:
                    continue
                acc = state.setdefault(key, {})
                for lab, c in vec.items():
                    s = acc.get(lab, 0) + cb * c
                    if s:
                        acc[lab] = s
                    else:
                        acc.pop(lab, None)
    state = {k: v for k, v in state.items() if v}

    affine: list[dict[int, int]] = [{j: 1} for j in range(slot)]
    if anchor == "fresh":
        affine += [{slot: 1, slot + 1 + t_: 1} for t_ in range(alpha)]
    else:
        affine += [{slot: 1, slot + 1 + t_: 1} for t_ in range(alpha - 1)]
        affine += [{slot: 1}]
    affine += [{slot + naux + 1 + r: 1} for r in range(n - 1 - slot)]

    # one solve per certified weight: each level only trusts equations
    # up to its own degree and only involves its own consult subset, so
    # its (smaller) pair table bounds the numerator degree there
    what_full = what or f"chain {list(chain)!r} into slot {slot}"
    comps: dict[Label, PoleRational] = {}
    for w, d_w, table_w in levels:
        state_w: dict[tuple, Vec] = {}
        for mono, vec in state.items():
            sub = {lab: c for lab, c in vec.items() if W.space.weight(lab) == w}
            if sub:
                state_w[mono] = sub
        comps.update(_reconstruct_components(
            state_w,
            space=W.space,
            nvars=nseries,
            region=region,
            pairs={},
            total_weight=t_out,
            window=max(d_w, 0),
            allow_partial=allow_partial,
            what=what_full,
            affine=affine,
            out_pairs=table_w,
        ))
    return WValuedRational(out_nvars, W.space, comps, out_pairs, t_out, None, cert)


def _slot_insertion_checked(
    family, have_upto, slot, chain, V, W, out_labels, *,
    allow_partial=True, verify=False, what="",
) -> WValuedRational:
    """Insertion with optional anchor cross-check.

    The fresh-anchor and last-anchor assemblies expand along different
    coordinates; their reconstructions must agree wherever both are
    certified, otherwise the data violates anchor independence.
    """
    out = _slot_insertion(
        family, have_upto, slot, chain, V, W, out_labels,
        anchor="fresh", allow_partial=allow_partial, what=what,
    )
    if verify:
        alt = _slot_insertion(
            family, have_upto, slot, chain, V, W, out_labels,
            anchor="last", allow_partial=allow_partial, what=what + " (last anchor)",
        )
        wc = min(out.certified_weight, alt.certified_weight)
        if out.restrict_weight(wc) != alt.restrict_weight(wc):
            raise InconsistentError(
                tuple(chain), f"{what}: anchor placements disagree"
            )
    return out


# ---------------------------------------------------------------------------
# circle operations


def _require_level(phi: Cochain, op: str):
    if phi.declared_m < 1:
        raise ValueError(f"{op}: composability exhausted (level 0)")


def _drop_level(m: int) -> int:
    return m if m >= INF else m - 1


def circ_i_E2(
    phi: Cochain,
    i: int,
    V: MosvaData | None = None,
    W: BimoduleData | None = None,
    *,
    out_upto: int | None = None,
    verify: bool = False,
    allow_partial: bool = True,
) -> Cochain:
    """Insert the algebra's two-operator product into slot i (1-based).

    The value at (v_1, ..., v_{n+1}) is the function obtained by feeding
    slot i the chain of v_i and v_{i+1} anchored at a cluster point; the
    composability level drops by one.
    """
    V = phi.V if V is None else V
    W = phi.W if W is None else W
    _require_level(phi, "circ_i_E2")
    n = phi.degree
    if not 1 <= i <= n:
        raise ValueError(f"slot {i} outside 1..{n}")
    upto = phi.arg_upto if out_upto is None else min(out_upto, phi.arg_upto)
    wt = V.space.weight
    labels = sorted(V.space.labels(), key=lambda lab: (wt(lab), str(lab)))
    vals = {}
    for t in weight_bounded_tuples(V.space, n + 1, upto):
        before, after = t[: i - 1], t[i + 1:]
        chain = [t[i - 1], t[i]]
        others = sum(wt(lab) for lab in before + after)
        have = phi.arg_upto - others
        family = {
            b: phi.values[before + (b,) + after] for b in labels if wt(b) <= have
        }
        out_labels = list(before) + [None] + list(after)
        vals[t] = _slot_insertion_checked(
            family, have, i - 1, chain, V, W, out_labels,
            allow_partial=allow_partial, verify=verify,
            what=f"circ_{i} at {t!r}",
        )
    return Cochain(n + 1, V, W, vals, _drop_level(phi.declared_m), upto)


def e10_circ2(
    phi: Cochain,
    V: MosvaData | None = None,
    W: BimoduleData | None = None,
    *,
    out_upto: int | None = None,
    allow_partial: bool = True,
) -> Cochain:
    """Left operator at the first variable in front of the value on the
    remaining arguments."""
    V = phi.V if V is None else V
    W = phi.W if W is None else W
    _require_level(phi, "e10_circ2")
    n = phi.degree
    upto = phi.arg_upto if out_upto is None else min(out_upto, phi.arg_upto)
    vals = {}
    for t in weight_bounded_tuples(V.space, n + 1, upto):
        rest = t[1:]
        vals[t] = apply_front_modes(
            [("L", t[0])], phi.values[rest], V, W,
            pair_to_old=lambda side, ul, j, rest=rest: argument_pair_cap(
                V, W, ul, rest[j]
            ),
            allow_partial=allow_partial,
        )
    return Cochain(n + 1, V, W, vals, _drop_level(phi.declared_m), upto)


def e01_circ2(
    phi: Cochain,
    V: MosvaData | None = None,
    W: BimoduleData | None = None,
    *,
    out_upto: int | None = None,
    allow_partial: bool = True,
) -> Cochain:
    """Reversed-right operator at the last variable in front of the value
    on the leading arguments."""
    V = phi.V if V is None else V
    W = phi.W if W is None else W
    _require_level(phi, "e01_circ2")
    n = phi.degree
    upto = phi.arg_upto if out_upto is None else min(out_upto, phi.arg_upto)
    perm = [n] + list(range(n))  # the new operator's variable goes last
    vals = {}
    for t in weight_bounded_tuples(V.space, n + 1, upto):
        rest = t[:-1]
        f = apply_front_modes(
            [("sR", t[-1])], phi.values[rest], V, W,
            pair_to_old=lambda side, ul, j, rest=rest: argument_pair_cap(
                V, W, ul, rest[j]
            ),
            allow_partial=allow_partial,
        )
        vals[t] = f.permute_vars(perm)
    return Cochain(n + 1, V, W, vals, _drop_level(phi.declared_m), upto)


# ---------------------------------------------------------------------------
# the coboundary


def coboundary(
    phi: Cochain,
    m: int | None = None,
    *,
    out_upto: int | None = None,
    allow_partial: bool = True,
    plant_sign_defect: bool = False,
) -> Cochain:
    """Alternating sum of the front terms and the slot insertions.

    The summands are combined as reconstructed rational functions, never
    as series: their natural expansion regions need not overlap, but the
    functions add fine.  plant_sign_defect flips the sign of the first
    insertion term, a deliberate bug used to demonstrate that the square
    check catches it.
    """
    n = phi.degree
    if m is None:
        m = phi.declared_m
    if m < 1:
        raise ValueError("coboundary needs composability level at least 1")
    if m > phi.declared_m:
        raise ValueError(f"cochain only grants level {phi.declared_m}, asked {m}")
    acc = e10_circ2(phi, out_upto=out_upto, allow_partial=allow_partial)
    for i in range(1, n + 1):
        sign = Fraction(-1) ** i
        if plant_sign_defect and i == 1:
            sign = -sign
        term = circ_i_E2(phi, i, out_upto=out_upto, allow_partial=allow_partial)
        acc = acc.add(term.scale(sign))
    last = e01_circ2(phi, out_upto=out_upto, allow_partial=allow_partial)
    acc = acc.add(last.scale(Fraction(-1) ** (n + 1)))
    return Cochain(
        n + 1, phi.V, phi.W, acc.values, _drop_level(m), acc.arg_upto
    )


def coboundary0(
    w: VacuumLike,
    V: MosvaData,
    W: BimoduleData,
    *,
    arg_upto: int | None = None,
    allow_partial: bool = True,
) -> Cochain:
    """Degree-0 coboundary: v maps to the left action minus the
    reversed-right action of v on the vector.

    On weight-zero data this is the inner derivation v w - w v; a vector
    acting the same way from both sides gives the zero cochain.
    """
    if not isinstance(w, VacuumLike):
        w = VacuumLike(W, w)
    w.check_regular(V)
    if arg_upto is None:
        arg_upto = V.space.max_weight()
    vals = {}
    for (v,) in weight_bounded_tuples(V.space, 1, arg_upto):
        left = e_product([("L", v)], w.vec, V, W, allow_partial=allow_partial)
        right = e_product([("sR", v)], w.vec, V, W, allow_partial=allow_partial)
        vals[(v,)] = left.sub(right)
    return Cochain(1, V, W, vals, INF, arg_upto)


# ---------------------------------------------------------------------------
# comparisons


def _compare_values(rep: Report, key: str, describe: str, a: WValuedRational,
                    b: WValuedRational, floor: int):
    wc = min(a.certified_weight, b.certified_weight)
    if wc < floor:
        rep.record(f"{key}-skipped-window")
        return
    rep.require(a.restrict_weight(wc) == b.restrict_weight(wc), describe, key)
    if wc < INF:
        rep.record(f"{key}-partial")


def compare_cochains(rep: Report, key: str, describe: str, A: Cochain, B: Cochain):
    """Tuple-by-tuple equality up to the smaller certified weight."""
    floor = A.W.space.min_weight()
    upto = min(A.arg_upto, B.arg_upto)
    for t in weight_bounded_tuples(A.V.space, A.degree, upto):
        _compare_values(
            rep, key, f"{describe} at {t!r}", A.values[t], B.values[t], floor
        )


def cochain_is_zero(rep: Report, key: str, describe: str, phi: Cochain):
    floor = phi.W.space.min_weight()
    for t, f in phi.values.items():
        wc = f.certified_weight
        if wc < floor:
            rep.record(f"{key}-skipped-window")
            continue
        rep.require(
            f.restrict_weight(wc).is_zero(), f"{describe}: nonzero at {t!r}", key
        )
        if wc < INF:
            rep.record(f"{key}-partial")


# ---------------------------------------------------------------------------
# membership


def check_membership(
    phi: Cochain,
    m: int | None = None,
    V: MosvaData | None = None,
    W: BimoduleData | None = None,
    cutoff: int | None = None,
    *,
    shape_budget: int = 4,
    verify_anchors: bool = True,
    sample: int | None = None,
    seed: int = 0,
) -> Report:
    """Verify the three defining properties at composability level m.

    The shift property is checked in both forms on stored tuples, the
    grading property in the formal scaling form on every component, and
    composability on every front/slot shape with m + degree operators
    (clamped to the shape budget, with the clamp recorded).  Slot chains
    are anchored two ways and the reconstructions compared, which is the
    anchor-independence check; a single-operator chain compares the
    Taylor re-expansion against the stored value itself.  cutoff gates
    the total weight of the inserted vectors; sample caps, per slot and
    per shape, how many chains are explored (seeded, deterministic).
    """
    V = phi.V if V is None else V
    W = phi.W if W is None else W
    if m is None:
        m = phi.declared_m
    n = phi.degree
    rep = Report(f"membership[{phi.describe()}]")
    floor = W.space.min_weight()
    wt = V.space.weight
    if cutoff is None:
        cutoff = phi.arg_upto

    _check_shift_property(rep, phi, V, W, floor)
    _check_grading_property(rep, phi, V, W)

    m_eff = min(m, shape_budget - n)
    if m_eff < m:
        rep.record("level-clamped")
    if m_eff < 0:
        rep.record("shape-skipped-budget")
        return rep

    rng = Random(seed)
    labels = sorted(V.space.labels(), key=lambda lab: (wt(lab), str(lab)))

    def chain_choices(length: int, budget: int) -> list[ArgTuple]:
        found = weight_bounded_tuples(V.space, length, budget)
        if sample is not None and len(found) > sample:
            found = rng.sample(found, sample)
        return found

    total = m_eff + n
    for alphas in _compositions(total, n):
        a0 = alphas[0]
        for l0 in range(a0 + 1):
            _run_shape(
                rep, phi, V, W, alphas, l0, cutoff, chain_choices,
                verify_anchors, floor,
            )
    return rep


def _compositions(total: int, n: int) -> list[tuple]:
    """Shapes (a_0, ..., a_n) with a_0 >= 0, slot entries >= 1, given sum."""
    out = []
    for a0 in range(total - n + 1):
        rest = total - a0
        for cuts in iproduct(range(1, rest + 1), repeat=n - 1) if n > 1 else [()]:
            if n == 0:
                continue
            tail = rest - sum(cuts)
            if tail >= 1:
                out.append((a0,) + cuts + (tail,))
        if n == 0 and rest == 0:
            out.append((a0,))
    return out


def _run_shape(rep, phi, V, W, alphas, l0, cutoff, chain_choices, verify, floor):
    n = phi.degree
    wt = V.space.weight
    a0 = alphas[0]
    shape_name = "shape"
    witness = f"shape {alphas} front split {l0}"

    def leaf(g: WValuedRational, used_w: int, done_labels: list):
        budget = cutoff - used_w
        fronts = chain_choices(a0, budget) if a0 else [()]
        for us in fronts:
            spec = [("L", u) for u in us[:l0]] + [("sR", u) for u in us[l0:]]
            try:
                if spec:
                    out = apply_front_modes(
                        spec, g, V, W,
                        pair_to_old=lambda side, ul, j: argument_pair_cap(
                            V, W, ul, done_labels[j]
                        ),
                        allow_partial=True,
                    )
                else:
                    out = g
            except InconsistentError as exc:
                rep.require(False, f"{witness}, front {us!r}: {exc}", shape_name)
                continue
            if out.certified_weight < floor:
                rep.record(f"{shape_name}-skipped-window")
            else:
                rep.record(shape_name)
                if out.certified_weight < INF:
                    rep.record(f"{shape_name}-partial")

    def stage(k: int, F: dict, used_w: int, done_labels: list):
        if k == n:
            # the empty tuple is absent when every dependent was skipped
            # or failed; both were recorded where it happened
            if () in F:
                leaf(F[()], used_w, done_labels)
            return
        alpha = alphas[k + 1]
        pos = len(done_labels)
        budget = cutoff - used_w
        for chain in chain_choices(alpha, budget):
            csum = sum(wt(c) for c in chain)
            F2: dict = {}
            for rest in weight_bounded_tuples(V.space, n - k - 1, phi.arg_upto):
                rest_w = sum(wt(lab) for lab in rest)
                have = phi.arg_upto - rest_w
                family = {}
                missing = False
                for b in V.space.labels():
                    if wt(b) > have:
                        continue
                    g = F.get((b,) + rest)
                    if g is None:
                        missing = True
                        break
                    family[b] = g
                if missing or not family:
                    rep.record(f"{shape_name}-skipped-dependent")
                    continue
                out_labels = list(done_labels) + [None] + list(rest)
                try:
                    F2[rest] = _slot_insertion_checked(
                        family, have, pos, list(chain), V, W, out_labels,
                        allow_partial=True, verify=verify,
                        what=f"{witness}, slot {k + 1} chain {list(chain)!r}",
                    )
                except InconsistentError as exc:
                    rep.require(False, str(exc), shape_name)
            stage(k + 1, F2, used_w + csum, done_labels + list(chain))

    stage(0, dict(phi.values), 0, [])


def _check_shift_property(rep, phi: Cochain, V, W, floor):
    """Both forms: a shifted argument differentiates its variable, and
    the module shift is the sum of all the derivatives."""
    n = phi.degree
    wt = V.space.weight
    d_cols = V.d.columns
    cover = V.coverage()
    for t, f in phi.values.items():
        total = f.total_weight
        for i in range(n):
            img = d_cols.get(t[i], {})
            if wt(t[i]) + 1 > cover or (img and total + 1 > phi.arg_upto):
                rep.record("shift-arg-skipped-range")
                continue
            lhs = WValuedRational.zero(n, W.space, total + 1)
            for b, c in img.items():
                lhs = lhs.add(phi.values[t[:i] + (b,) + t[i + 1:]].scale(c))
            _compare_values(
                rep, "shift-arg",
                f"shift in slot {i} at {t!r} is not the derivative",
                lhs, f.partial_derivative(i), floor,
            )
        lhs = f.apply_op(W.d.columns, 1)
        rhs = WValuedRational.zero(n, W.space, total + 1)
        for i in range(n):
            rhs = rhs.add(f.partial_derivative(i))
        _compare_values(
            rep, "shift-sum",
            f"module shift at {t!r} is not the sum of derivatives",
            lhs, rhs, floor,
        )


def _check_grading_property(rep, phi: Cochain, V, W):
    """Formal scaling form: scaling every variable by a new last variable
    multiplies each component by that variable to its homogeneity degree."""
    n = phi.degree
    for t, f in phi.values.items():
        for lab, g in f.components.items():
            want = W.space.weight(lab) - f.total_weight
            scaled = g.scale_vars()
            emb = g.embed(n + 1, list(range(n)))
            if want >= 0:
                ok = scaled == emb.mul(
                    PoleRational.monomial(n + 1, (0,) * n + (want,))
                )
            else:
                ok = scaled.mul(
                    PoleRational.monomial(n + 1, (0,) * n + (-want,))
                ) == emb
            rep.require(
                ok, f"component {lab!r} at {t!r} breaks the scaling form", "grading"
            )


# ---------------------------------------------------------------------------
# the seven regrouping identities


def check_front_left_absorb(phi: Cochain, *, out_upto=None) -> Report:
    """Left front of a left front equals the first-slot insertion of it."""
    rep = Report("front-left-absorb")
    a = e10_circ2(phi, out_upto=out_upto)
    lhs = e10_circ2(a, out_upto=out_upto)
    rhs = circ_i_E2(a, 1, out_upto=out_upto)
    compare_cochains(rep, "identity", "front-left-absorb fails", lhs, rhs)
    return rep


def check_front_left_shift(phi: Cochain, i: int, *, out_upto=None) -> Report:
    """Left front past a slot insertion shifts the slot up by one."""
    rep = Report(f"front-left-shift[{i}]")
    lhs = e10_circ2(circ_i_E2(phi, i, out_upto=out_upto), out_upto=out_upto)
    rhs = circ_i_E2(e10_circ2(phi, out_upto=out_upto), i + 1, out_upto=out_upto)
    compare_cochains(rep, "identity", f"front-left-shift({i}) fails", lhs, rhs)
    return rep


def check_front_exchange(phi: Cochain, *, out_upto=None) -> Report:
    """Left front and reversed-right front commute."""
    rep = Report("front-exchange")
    lhs = e10_circ2(e01_circ2(phi, out_upto=out_upto), out_upto=out_upto)
    rhs = e01_circ2(e10_circ2(phi, out_upto=out_upto), out_upto=out_upto)
    compare_cochains(rep, "identity", "front-exchange fails", lhs, rhs)
    return rep


def check_insert_disjoint(phi: Cochain, j: int, i: int, *, out_upto=None) -> Report:
    """Insertions at separated slots commute (j at most i-1)."""
    if not j <= i - 1:
        raise ValueError("needs j <= i-1")
    rep = Report(f"insert-disjoint[{j},{i}]")
    lhs = circ_i_E2(circ_i_E2(phi, j, out_upto=out_upto), i, out_upto=out_upto)
    rhs = circ_i_E2(circ_i_E2(phi, i - 1, out_upto=out_upto), j, out_upto=out_upto)
    compare_cochains(rep, "identity", f"insert-disjoint({j},{i}) fails", lhs, rhs)
    return rep


def check_insert_nested(phi: Cochain, i: int, j: int, *, out_upto=None) -> Report:
    """Insertion into an inserted block re-associates (j at least i)."""
    if not j >= i:
        raise ValueError("needs j >= i")
    rep = Report(f"insert-nested[{i},{j}]")
    lhs = circ_i_E2(circ_i_E2(phi, j, out_upto=out_upto), i, out_upto=out_upto)
    rhs = circ_i_E2(circ_i_E2(phi, i, out_upto=out_upto), j + 1, out_upto=out_upto)
    compare_cochains(rep, "identity", f"insert-nested({i},{j}) fails", lhs, rhs)
    return rep


def check_front_right_absorb(phi: Cochain, *, out_upto=None) -> Report:
    """Last-slot insertion of a reversed-right front equals a second one."""
    rep = Report("front-right-absorb")
    a = e01_circ2(phi, out_upto=out_upto)
    lhs = circ_i_E2(a, phi.degree + 1, out_upto=out_upto)
    rhs = e01_circ2(a, out_upto=out_upto)
    compare_cochains(rep, "identity", "front-right-absorb fails", lhs, rhs)
    return rep


def check_front_right_shift(phi: Cochain, i: int, *, out_upto=None) -> Report:
    """Reversed-right front past a slot insertion keeps the slot (i at most n)."""
    if not 1 <= i <= phi.degree:
        raise ValueError("slot out of range")
    rep = Report(f"front-right-shift[{i}]")
    lhs = circ_i_E2(e01_circ2(phi, out_upto=out_upto), i, out_upto=out_upto)
    rhs = e01_circ2(circ_i_E2(phi, i, out_upto=out_upto), out_upto=out_upto)
    compare_cochains(rep, "identity", f"front-right-shift({i}) fails", lhs, rhs)
    return rep


def delta_square_identities(phi: Cochain, *, out_upto=None) -> Report:
    """All seven regrouping identities on one cochain.

    Grouped the way the square of the coboundary cancels: the left-front
    pair, the front exchange, the two insertion identities over all
    index pairs, and the right-front pair.
    """
    n = phi.degree
    rep = Report(f"delta-square-identities[{phi.describe()}]")
    rep.merge(check_front_left_absorb(phi, out_upto=out_upto))
    for i in range(1, n + 1):
        rep.merge(check_front_left_shift(phi, i, out_upto=out_upto))
    rep.merge(check_front_exchange(phi, out_upto=out_upto))
    for i in range(2, n + 2):
        for j in range(1, min(i - 1, n) + 1):
            rep.merge(check_insert_disjoint(phi, j, i, out_upto=out_upto))
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            rep.merge(check_insert_nested(phi, i, j, out_upto=out_upto))
    rep.merge(check_front_right_absorb(phi, out_upto=out_upto))
    for i in range(1, n + 1):
        rep.merge(check_front_right_shift(phi, i, out_upto=out_upto))
    return rep


def verify_delta_squared(
    samples: Iterable[Cochain],
    V: MosvaData | None = None,
    W: BimoduleData | None = None,
    *,
    run_identities: bool = True,
    plant_sign_defect: bool = False,
    out_upto: int | None = None,
) -> Report:
    """The square of the coboundary vanishes on every sample.

    Each sample needs composability level at least 2.  With
    run_identities the seven regrouping identities behind the
    cancellation run as independent sub-checks on the first sample of
    each degree; plant_sign_defect flips one sign in the coboundary so
    the check demonstrably catches a wrong summand.
    """
    rep = Report("delta-squared")
    seen_degrees: set[int] = set()
    for phi in samples:
        if phi.declared_m < 2:
            raise ValueError("delta-squared needs composability level at least 2")
        d1 = coboundary(phi, out_upto=out_upto, plant_sign_defect=plant_sign_defect)
        d2 = coboundary(d1, out_upto=out_upto)
        cochain_is_zero(
            rep, "delta2", f"square of the coboundary on {phi.describe()}", d2
        )
        if run_identities and phi.degree not in seen_degrees:
            seen_degrees.add(phi.degree)
            rep.merge(delta_square_identities(phi, out_upto=out_upto))
    return rep


# ---------------------------------------------------------------------------
# random members


def random_cochain(
    V: MosvaData,
    W: BimoduleData,
    degree: int,
    rng: Random,
    *,
    arg_upto: int | None = None,
    level_bound: int = 4,
) -> Cochain:
    """A seeded random cochain that passes the membership checks.

    On weight-zero data the full multilinear space qualifies, so the
    values are random constants (declared at the checker bound).
    Otherwise the result is a random rational combination of the
    chain-product cochains over the weight-zero shift-killed vectors,
    plus, from degree two on, the coboundary of a random cochain one
    degree down; both ingredients compose at every level.
    """
    if V.space.max_weight() == 0 and W.space.max_weight() == 0:
        for _ in range(64):
            table = {}
            for t in weight_bounded_tuples(V.space, degree, 0):
                vec = {
                    lab: Fraction(rng.randint(-4, 4))
                    for lab in W.space.labels()
                    if rng.random() < 0.7
                }
                vec = {lab: c for lab, c in vec.items() if c}
                if vec:
                    table[t] = vec
            if table:
                return constant_cochain(V, W, degree, table, level_bound)
        raise RuntimeError("random table kept coming out zero")

    if arg_upto is None:
        mw = V.space.max_weight()
        arg_upto = degree * mw if V.space.complete else mw
    basis = vacuum_like_basis(V, W)
    parts: list[Cochain] = []
    for l in range(degree + 1):
        for wl in basis:
            c = Fraction(rng.randint(-3, 3))
            if not c:
                continue
            parts.append(
                e_type_cochain(V, W, degree, l, wl.vec, arg_upto=arg_upto).scale(c)
            )
    if degree >= 2 and rng.random() < 0.75:
        inner = random_cochain(
            V, W, degree - 1, rng, arg_upto=arg_upto, level_bound=level_bound
        )
        parts.append(coboundary(inner, out_upto=arg_upto))
    if not parts:
        wl = basis[0]
        parts.append(e_type_cochain(V, W, degree, degree, wl.vec, arg_upto=arg_upto))
    acc = parts[0]
    for p in parts[1:]:
        acc = acc.add(p)
    return acc
