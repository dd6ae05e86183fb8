"""Vertex algebras with meromorphic operator products, as finite data.

``MosvaData`` stores a graded space, a vacuum vector, the mode structure
constants Y_n(u): the image of every basis vector under every mode whose
result stays inside the space's coverage, the weight-one translation
operator D, and a table of pole-order caps.

The cap table drives everything quantitative: pole_bound(u, v) is the
smallest c with Y_n(u) v = 0 for all n >= c.  It bounds the order of the
z = 0 pole of any matrix coefficient in which u acts directly on v, and
the order of the z_1 = z_2 pole of a two-operator product through the
modes Y_n(u_1) u_2.  ``check_axioms`` verifies the caps together with
the grading, identity, creation, translation, and weight axioms, and
then verifies rationality and associativity pairwise: the double series
of Y(u1, z1) Y(u2, z2) v and the substituted series of
Y(Y(u1, z1 - z2) u2, z2) v must reconstruct, through the certified
windows, to one and the same rational function with the declared poles.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import Mapping, Sequence

from .assemble import assemble_product, safe_window
from .graded import (
    GradedSpace,
    Label,
    LinOp,
    Vec,
    power_over_factorial,
    vec_add,
    vec_eq,
    vec_is_zero,
    vec_scale,
    vec_sub,
)
from .ratfun import (
    INF,
    InconsistentError,
    PoleRational,
    TruncatedLaurent,
    UnderdeterminedError,
    reconstruct,
    reconstruct_affine,
)
from .report import Report

ModeTable = dict  # (u_label, n) -> {v_label: Vec}


class MosvaData:
    """A vertex algebra given by mode structure constants."""

    __slots__ = ("name", "space", "vacuum", "modes", "d", "pole_bounds")

    def __init__(
        self,
        name: str,
        space: GradedSpace,
        vacuum: Vec,
        modes: ModeTable,
        d: LinOp,
        pole_bounds: Mapping[tuple[Label, Label], int],
    ):
        self.name = name
        self.space = space
        self.vacuum = {lab: Fraction(c) for lab, c in vacuum.items() if c}
        self.modes = {
            key: {v: dict(img) for v, img in cols.items() if img}
            for key, cols in modes.items()
        }
        self.modes = {key: cols for key, cols in self.modes.items() if cols}
        self.d = d
        self.pole_bounds = dict(pole_bounds)

    # -- mode access -----------------------------------------------------------

    def mode_image(self, u_label: Label, n: int, v_label: Label) -> Vec:
        return self.modes.get((u_label, n), {}).get(v_label, {})

    def apply_mode(self, u_label: Label, n: int, vec: Vec) -> Vec:
        cols = self.modes.get((u_label, n))
        if not cols:
            return {}
        out: Vec = {}
        for v_lab, c in vec.items():
            img = cols.get(v_lab)
            if not img:
                continue
            for lab, x in img.items():
                s = out.get(lab, 0) + c * x
                if s:
                    out[lab] = s
                else:
                    out.pop(lab, None)
        return out

    def apply_mode_vec(self, u: Vec, n: int, vec: Vec) -> Vec:
        out: Vec = {}
        for u_lab, c in u.items():
            out = vec_add(out, vec_scale(self.apply_mode(u_lab, n, vec), c))
        return out

    def pole_bound(self, u_label: Label, v_label: Label) -> int:
        return self.pole_bounds[(u_label, v_label)]

    def pole_bound_vec(self, u: Vec, v: Vec) -> int:
        return max(
            (self.pole_bound(a, b) for a in u for b in v),
            default=0,
        )

    def coverage(self) -> int:
        return INF if self.space.complete else self.space.cutoff

    def modes_equal(self, other: "MosvaData") -> bool:
        keys = set(self.modes) | set(other.modes)
        for key in keys:
            a, b = self.modes.get(key, {}), other.modes.get(key, {})
            for v in set(a) | set(b):
                if not vec_eq(a.get(v, {}), b.get(v, {})):
                    return False
        return True

    def __repr__(self) -> str:
        return f"MosvaData({self.name}, dim={self.space.dim()})"


# ---------------------------------------------------------------------------
# the two-operator product and its substituted form


def product_state(
    V: MosvaData, u1: Vec, u2: Vec, v: Vec, window: int
) -> dict[tuple[int, int], Vec]:
    """State of Y(u1, z1) Y(u2, z2) v in the region z1 >> z2."""

    def apply(kind, u_lab, n, vec):
        return V.apply_mode(u_lab, n, vec)

    return assemble_product(
        [("V", u1), ("V", u2)],
        {(): v},
        apply_mode=apply,
        op_space=V.space,
        target_space=V.space,
        window=window,
    )


def composite_state(
    V: MosvaData, u1: Vec, u2: Vec, v: Vec, window: int
) -> dict[tuple[int, int], Vec]:
    """State of Y(Y(u1, x) u2, zeta) v in the region zeta >> x.

    Monomials are (zeta exponent, x exponent).
    """

    def apply(kind, u_lab, n, vec):
        return V.apply_mode(u_lab, n, vec)

    inner = assemble_product(
        [("V", u1)],
        {(): u2},
        apply_mode=apply,
        op_space=V.space,
        target_space=V.space,
        window=window,
    )
    out: dict[tuple[int, int], Vec] = {}
    for (ex,), y in inner.items():
        outer = assemble_product(
            [("V", y)],
            {(): v},
            apply_mode=apply,
            op_space=V.space,
            target_space=V.space,
            window=window - ex,
        )
        for (ez,), img in outer.items():
            key = (ez, ex)
            acc = out.setdefault(key, {})
            for lab, c in img.items():
                s = acc.get(lab, 0) + c
                if s:
                    acc[lab] = s
                else:
                    acc.pop(lab, None)
    return {key: vec for key, vec in out.items() if vec}


# ---------------------------------------------------------------------------
# axiom checking


def check_axioms(
    V: MosvaData,
    *,
    associativity: bool = True,
    max_triple_weight: int | None = None,
) -> Report:
    """Verify the algebra axioms on every stored basis instance.

    ``max_triple_weight`` limits wt u1 + wt u2 + wt v in the associativity
    sweep (cost control for large truncated fixtures); skipped and
    verified instance counts are both reported.
    """
    rep = Report(f"axioms[{V.name}]")
    space = V.space
    labels = space.labels()
    K = V.coverage()

    # grading and vacuum
    if not V.vacuum:
        rep.fail("vacuum is zero")
    for lab in V.vacuum:
        rep.require(space.weight(lab) == 0, f"vacuum has weight {space.weight(lab)}", "vacuum")
    rep.require(vec_is_zero(V.d.apply(V.vacuum)), "D does not annihilate the vacuum", "vacuum")

    # D shifts weight by exactly one
    for lab, col in V.d.columns.items():
        w = space.weight(lab)
        for lab2 in col:
            rep.require(
                space.weight(lab2) == w + 1,
                f"D({lab!r}) has a component of weight {space.weight(lab2)} != {w}+1",
                "d-grading",
            )

    # mode weight bookkeeping (the grading-operator commutator, modewise)
    for (u_lab, n), cols in V.modes.items():
        hu = space.weight(u_lab)
        for v_lab, img in cols.items():
            want = hu + space.weight(v_lab) - n - 1
            for lab in img:
                rep.require(
                    space.weight(lab) == want,
                    f"wt(Y_{n}({u_lab!r}){v_lab!r}) component {lab!r} is "
                    f"{space.weight(lab)}, expected {want}",
                    "mode-weight",
                )

    # pole caps: Y_n(u) v = 0 for n >= pole_bound(u, v)
    for (u_lab, n), cols in V.modes.items():
        for v_lab, img in cols.items():
            if img and n >= V.pole_bound(u_lab, v_lab):
                rep.fail(
                    f"Y_{n}({u_lab!r}){v_lab!r} != 0 breaches pole cap "
                    f"{V.pole_bound(u_lab, v_lab)}"
                )
            rep.record("pole-cap")

    # identity property: the vacuum acts as delta_{n,-1} id
    vac_modes = {n for (u_lab, n) in V.modes if u_lab in V.vacuum}
    for n in sorted(vac_modes | {-1}):
        for v_lab in labels:
            got = V.apply_mode_vec(V.vacuum, n, {v_lab: Fraction(1)})
            want = {v_lab: Fraction(1)} if n == -1 else {}
            rep.require(
                vec_eq(got, want),
                f"Y_{n}(vacuum) on {v_lab!r} gives {got}, expected {want}",
                "identity",
            )

    # creation property: Y(u, x) vacuum = e^{xD} u
    for u_lab in labels:
        hu = space.weight(u_lab)
        jmax = (K - hu) if K != INF else (space.max_weight() - hu + 1)
        powers = power_over_factorial(V.d.apply, {u_lab: Fraction(1)}, max(jmax, 0))
        for n in sorted({n for (ul, n) in V.modes if ul == u_lab} | {-1}):
            got = V.apply_mode(u_lab, n, V.vacuum)
            if n >= 0:
                rep.require(
                    vec_is_zero(got),
                    f"Y_{n}({u_lab!r}) vacuum != 0",
                    "creation",
                )
            else:
                k = -n - 1
                if k < len(powers) and (K == INF or hu + k <= K):
                    rep.require(
                        vec_eq(got, powers[k]),
                        f"Y_{n}({u_lab!r}) vacuum = {got}, expected D^{k}u/{k}!",
                        "creation",
                    )
                else:
                    rep.record("creation-skipped")

    # D-derivative property, both modewise forms.  D of a vector whose
    # weight already sits at the cutoff is unknown (stored as zero), so
    # each form is only checked when its D-inputs are inside coverage.
    du_cache = {lab: V.d.apply({lab: Fraction(1)}) for lab in labels}
    for u_lab in labels:
        hu = space.weight(u_lab)
        for v_lab in labels:
            hv = space.weight(v_lab)
            # result of Y_{n-1}(u) v has weight hu + hv - n; need coverage
            n_hi = hu + hv - space.min_weight()
            n_lo = hu + hv - (K if K != INF else space.max_weight())
            for n in range(n_lo, n_hi + 1):
                if K != INF and hu + hv - n > K:
                    continue
                rhs = vec_scale(V.mode_image(u_lab, n - 1, v_lab), -n)
                if K == INF or hu + 1 <= K:
                    lhs = V.apply_mode_vec(du_cache[u_lab], n, {v_lab: Fraction(1)})
                    rep.require(
                        vec_eq(lhs, rhs),
                        f"Y_{n}(D {u_lab!r}) {v_lab!r} != -{n} Y_{n-1}({u_lab!r}) {v_lab!r}",
                        "d-derivative",
                    )
                else:
                    rep.record("d-derivative-skipped")
                if K == INF or hv + 1 <= K:
                    comm = vec_sub(
                        V.d.apply(V.mode_image(u_lab, n, v_lab)),
                        V.apply_mode(u_lab, n, du_cache[v_lab]),
                    )
                    rep.require(
                        vec_eq(comm, rhs),
                        f"[D, Y_{n}({u_lab!r})] {v_lab!r} != -{n} Y_{n-1}({u_lab!r}) {v_lab!r}",
                        "d-commutator",
                    )
                else:
                    rep.record("d-commutator-skipped")

    if associativity:
        check_rationality_associativity(V, rep, max_triple_weight=max_triple_weight)
    return rep


def check_rationality_associativity(
    V: MosvaData, rep: Report, *, max_triple_weight: int | None = None
):
    """Reconstruct both sides of the two-operator associativity for every
    basis triple and compare the rational functions."""
    space = V.space
    labels = space.labels()
    K = V.coverage()
    for u1_lab, u2_lab, v_lab in iproduct(labels, repeat=3):
        h1, h2, hv = (space.weight(l) for l in (u1_lab, u2_lab, v_lab))
        T = h1 + h2 + hv
        if max_triple_weight is not None and T > max_triple_weight:
            rep.record("associativity-skipped-weight")
            continue
        u1 = {u1_lab: Fraction(1)}
        u2 = {u2_lab: Fraction(1)}
        v = {v_lab: Fraction(1)}
        p_cap = V.pole_bound(u1_lab, u2_lab)
        q1_cap = V.pole_bound(u1_lab, v_lab)
        q2_cap = V.pole_bound(u2_lab, v_lab)
        caps = p_cap + q1_cap + q2_cap
        # the composite chain holds Y(u1,x)u2 as an intermediate, so its
        # weight h1 + h2 joins the suffix-weight worst case
        window = min(
            safe_window(space, hv, [h1, h2]),
            (INF if space.complete else space.cutoff - max(hv, h1 + h2, T)),
        )
        prod = product_state(V, u1, u2, v, window)
        comp = composite_state(V, u1, u2, v, window)

        # per dual-basis component: numerator degree tau + caps must fit
        # inside the certified window, else the instance is skipped
        for wp_lab in labels:
            tau = space.weight(wp_lab) - T
            d = tau + caps
            covered = window >= d and (K == INF or space.weight(wp_lab) <= K)
            if not covered:
                rep.record("associativity-skipped-window")
                continue
            neg = max(caps, -tau)
            s1 = TruncatedLaurent(
                2, (0, 1),
                {m: vec.get(wp_lab) for m, vec in prod.items() if vec.get(wp_lab)},
                window, neg,
            )
            s2 = TruncatedLaurent(
                2, (0, 1),
                {m: vec.get(wp_lab) for m, vec in comp.items() if vec.get(wp_lab)},
                window, neg,
            )
            witness = f"(u1={u1_lab!r}, u2={u2_lab!r}, v={v_lab!r}, v'={wp_lab!r})"
            if d < 0:
                rep.require(
                    s1.is_zero_on_window() and s2.is_zero_on_window(),
                    f"negative-degree component is nonzero at {witness}",
                    "associativity-zero",
                )
                continue
            try:
                f1 = reconstruct(
                    s1, {(0, 1): p_cap}, (q1_cap, q2_cap), d, homogeneous_degree=d
                )
            except (InconsistentError, UnderdeterminedError) as exc:
                rep.fail(f"product side not rational within bounds at {witness}: {exc}")
                continue
            try:
                f2 = reconstruct_affine(
                    s2, [{0: 1, 1: 1}, {0: 1}], {(0, 1): p_cap},
                    (q1_cap, q2_cap), d,
                )
            except (InconsistentError, UnderdeterminedError) as exc:
                rep.fail(f"composite side not rational within bounds at {witness}: {exc}")
                continue
            rep.require(
                f1 == f2,
                f"associativity fails at {witness}: {f1!r} != {f2!r}",
                "associativity",
            )


# ---------------------------------------------------------------------------
# constructor: associative algebra with derivation


def from_associative_algebra(
    name: str,
    weights: Mapping[Label, int],
    unit: Vec,
    mult: Mapping[tuple[Label, Label], Vec],
    derivation: LinOp | None = None,
) -> MosvaData:
    """Vertex structure Y(u, x) v = (e^{xD} u) . v on an associative algebra.

    Validates associativity, the unit, the derivation property, and the
    weight bookkeeping (multiplication additive, derivation shift one).
    Only negative modes arise: Y_{-1-k}(u) v = (D^k u / k!) . v.
    """
    space = GradedSpace(name, weights, complete=True)
    labels = space.labels()
    d = derivation if derivation is not None else LinOp({})

    def times(a: Vec, b: Vec) -> Vec:
        out: Vec = {}
        for la, ca in a.items():
            for lb, cb in b.items():
                prod = mult.get((la, lb), {})
                for lab, c in prod.items():
                    s = out.get(lab, 0) + ca * cb * c
                    if s:
                        out[lab] = s
                    else:
                        out.pop(lab, None)
        return out

    for a in labels:
        va = {a: Fraction(1)}
        if not vec_eq(times(unit, va), va) or not vec_eq(times(va, unit), va):
            raise ValueError(f"unit fails on {a!r}")
        for b in labels:
            vb = {b: Fraction(1)}
            prod = times(va, vb)
            want_w = space.weight(a) + space.weight(b)
            for lab in prod:
                if space.weight(lab) != want_w:
                    raise ValueError(f"multiplication not graded at ({a!r},{b!r})")
            lhs = d.apply(prod)
            rhs = vec_add(times(d.apply(va), vb), times(va, d.apply(vb)))
            if not vec_eq(lhs, rhs):
                raise ValueError(f"derivation property fails at ({a!r},{b!r})")
            for c in labels:
                vc = {c: Fraction(1)}
                if not vec_eq(times(times(va, vb), vc), times(va, times(vb, vc))):
                    raise ValueError(f"not associative at ({a!r},{b!r},{c!r})")
    for lab, col in d.columns.items():
        for lab2 in col:
            if space.weight(lab2) != space.weight(lab) + 1:
                raise ValueError("derivation does not shift weight by one")

    span = space.max_weight() - space.min_weight()
    modes: ModeTable = {}
    for u_lab in labels:
        powers = power_over_factorial(d.apply, {u_lab: Fraction(1)}, span + 1)
        for k, dku in enumerate(powers):
            if vec_is_zero(dku):
                continue
            cols = {}
            for v_lab in labels:
                img = times(dku, {v_lab: Fraction(1)})
                if img:
                    cols[v_lab] = img
            if cols:
                modes[(u_lab, -1 - k)] = cols
    pole_bounds = {(a, b): 0 for a in labels for b in labels}
    return MosvaData(name, space, dict(unit), modes, d, pole_bounds)


# ---------------------------------------------------------------------------
# the opposite algebra


def opposite(V: MosvaData) -> MosvaData:
    """Reversed-order structure: Y^s(u, x) v = e^{xD} Y(v, -x) u, modewise

        Y^s_n(u) v = sum_{l>=0} (-1)^(n+l+1) D^l ( Y_{n+l}(v) u ) / l! .

    Every term descends in weight (the l-th summand has weight l below
    the result), so the sum is exact at any coverage.
    """
    space = V.space
    labels = space.labels()
    K = V.coverage()
    max_w = K if K != INF else space.max_weight()
    min_w = space.min_weight()
    modes: ModeTable = {}
    for u_lab in labels:
        hu = space.weight(u_lab)
        for v_lab in labels:
            hv = space.weight(v_lab)
            cap = V.pole_bound(v_lab, u_lab)
            n_hi = hu + hv - 1 - min_w
            n_lo = hu + hv - 1 - max_w
            for n in range(n_lo, n_hi + 1):
                acc: Vec = {}
                l = 0
                while n + l < cap:
                    base = V.mode_image(v_lab, n + l, u_lab)
                    if base:
                        term = base
                        for j in range(1, l + 1):
                            term = vec_scale(V.d.apply(term), Fraction(1, j))
                        sign = Fraction((-1) ** (n + l + 1))
                        acc = vec_add(acc, vec_scale(term, sign))
                    l += 1
                if acc:
                    modes.setdefault((u_lab, n), {})[v_lab] = acc
    pole_bounds = {
        (a, b): V.pole_bound(b, a) for a in labels for b in labels
    }
    return MosvaData(f"{V.name}^op", space, dict(V.vacuum), modes, V.d, pole_bounds)
