"""Two-sided module structures over a vertex algebra.

A ``BimoduleData`` carries a left action Y^L (operators indexed by the
algebra, acting on the module), a right action Y^R (operators indexed by
the module, acting on the algebra and landing in the module), and the
translation operator D_W.  The reversed right action

    Y^sR(v, x) w = e^{x D_W} Y^R(w, -x) v

turns the right structure into a left action of the reversed-order
algebra; it is the form in which mixed products are assembled, because
there every operator maps the module to itself.

Three pole-cap tables drive the quantitative checks:

  * ``left_bounds[(u, w)]``: Y^L_n(u) w = 0 for n >= bound; also caps
    the z = 0 pole of u's operator in mixed products over the base w;
  * ``right_bounds[(w, u)]``: Y^R_n(w) u = 0 for n >= bound; caps the
    z = 0 pole of the sR operator of u over the base w in transposed
    form;
  * ``mixed_bounds[(u1, u2)]``: caps the z1 = 0 pole of
    <w', Y^L(u1, z1) Y^R(w, z2) u2>, equivalently the z1 = z2 pole of
    the mixed arrangement <w', Y^L(u1, z1) Y^sR(u2, z2) w>.

``check_bimodule`` verifies the modewise axioms of both actions, the
two-operator rationality/associativity of each action, their
compatibility, and (at operator count three) rationality of mixed
left/sR chains within the declared caps.  ``check_lr_commutativity``
verifies that Y^sR makes the module a left module over the reversed
algebra and that left and sR operators commute at the level of
reconstructed rational functions.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import Mapping, Sequence

from .algebra import MosvaData, opposite
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
    vec_weight_split,
)
from .ratfun import (
    INF,
    InconsistentError,
    TruncatedLaurent,
    UnderdeterminedError,
    reconstruct,
    reconstruct_affine,
)
from .report import Report

ModeTable = dict  # (op_label, n) -> {arg_label: Vec}


class BimoduleData:
    """A two-sided module given by mode structure constants."""

    __slots__ = (
        "name",
        "space",
        "left_modes",
        "right_modes",
        "d",
        "left_bounds",
        "right_bounds",
        "mixed_bounds",
        "_sr_modes",
    )

    def __init__(
        self,
        name: str,
        space: GradedSpace,
        left_modes: ModeTable,
        right_modes: ModeTable,
        d: LinOp,
        left_bounds: Mapping[tuple[Label, Label], int],
        right_bounds: Mapping[tuple[Label, Label], int],
        mixed_bounds: Mapping[tuple[Label, Label], int],
    ):
        self.name = name
        self.space = space

        def clean(table: ModeTable) -> ModeTable:
            out = {
                key: {a: dict(img) for a, img in cols.items() if img}
                for key, cols in table.items()
            }
            return {key: cols for key, cols in out.items() if cols}

        self.left_modes = clean(left_modes)
        self.right_modes = clean(right_modes)
        self.d = d
        self.left_bounds = dict(left_bounds)
        self.right_bounds = dict(right_bounds)
        self.mixed_bounds = dict(mixed_bounds)
        self._sr_modes: ModeTable | None = None

    # -- mode access -----------------------------------------------------------

    def left_image(self, u_label: Label, n: int, w_label: Label) -> Vec:
        return self.left_modes.get((u_label, n), {}).get(w_label, {})

    def right_image(self, w_label: Label, n: int, v_label: Label) -> Vec:
        return self.right_modes.get((w_label, n), {}).get(v_label, {})

    def apply_left(self, u_label: Label, n: int, vec: Vec) -> Vec:
        return _apply_table(self.left_modes, u_label, n, vec)

    def apply_right(self, w_label: Label, n: int, vec: Vec) -> Vec:
        return _apply_table(self.right_modes, w_label, n, vec)

    def apply_left_vec(self, u: Vec, n: int, vec: Vec) -> Vec:
        out: Vec = {}
        for u_lab, c in u.items():
            out = vec_add(out, vec_scale(self.apply_left(u_lab, n, vec), c))
        return out

    def apply_right_vec(self, w: Vec, n: int, vec: Vec) -> Vec:
        out: Vec = {}
        for w_lab, c in w.items():
            out = vec_add(out, vec_scale(self.apply_right(w_lab, n, vec), c))
        return out

    def ensure_sr(self, V: MosvaData) -> ModeTable:
        """Mode table of Y^sR, computed on first use and cached.

        The cache assumes a fixed algebra; every caller in this package
        passes the same V a bimodule was built over.
        """
        if self._sr_modes is None:
            self._sr_modes = y_sr_modes(V, self)
        return self._sr_modes

    def sr_image(self, v_label: Label, n: int, w_label: Label) -> Vec:
        if self._sr_modes is None:
            raise RuntimeError("sR modes not built; call ensure_sr(V) first")
        return self._sr_modes.get((v_label, n), {}).get(w_label, {})

    def apply_sr(self, v_label: Label, n: int, vec: Vec) -> Vec:
        if self._sr_modes is None:
            raise RuntimeError("sR modes not built; call ensure_sr(V) first")
        return _apply_table(self._sr_modes, v_label, n, vec)

    def apply_sr_vec(self, v: Vec, n: int, vec: Vec) -> Vec:
        out: Vec = {}
        for v_lab, c in v.items():
            out = vec_add(out, vec_scale(self.apply_sr(v_lab, n, vec), c))
        return out

    # -- caps ------------------------------------------------------------------

    def left_bound(self, u_label: Label, w_label: Label) -> int:
        return self.left_bounds[(u_label, w_label)]

    def right_bound(self, w_label: Label, u_label: Label) -> int:
        return self.right_bounds[(w_label, u_label)]

    def sr_bound(self, v_label: Label, w_label: Label) -> int:
        return self.right_bounds[(w_label, v_label)]

    def mixed_bound(self, u1_label: Label, u2_label: Label) -> int:
        return self.mixed_bounds[(u1_label, u2_label)]

    def coverage(self) -> int:
        return INF if self.space.complete else self.space.cutoff

    def __repr__(self) -> str:
        return f"BimoduleData({self.name}, dim={self.space.dim()})"


def _apply_table(table: ModeTable, op_label: Label, n: int, vec: Vec) -> Vec:
    cols = table.get((op_label, n))
    if not cols:
        return {}
    out: Vec = {}
    for a_lab, c in vec.items():
        img = cols.get(a_lab)
        if not img:
            continue
        for lab, x in img.items():
            s = out.get(lab, 0) + c * x
            if s:
                out[lab] = s
            else:
                out.pop(lab, None)
    return out


# ---------------------------------------------------------------------------
# constructors


def regular_bimodule(V: MosvaData) -> BimoduleData:
    """V acting on itself on both sides through its own vertex operator."""
    return BimoduleData(
        f"{V.name}[reg]",
        V.space,
        V.modes,
        V.modes,
        V.d,
        V.pole_bounds,
        V.pole_bounds,
        V.pole_bounds,
    )


def sub_bimodule(V: MosvaData, labels: Sequence[Label], name: str) -> BimoduleData:
    """Restriction of the regular bimodule to a span of basis labels.

    Raises ValueError unless the span is closed under both actions and
    under D.
    """
    keep = set(labels)

    def restrict(vec: Vec, context: str) -> Vec:
        for lab in vec:
            if lab not in keep:
                raise ValueError(f"not closed: {context} leaves the span at {lab!r}")
        return vec

    space = GradedSpace(
        name,
        {lab: V.space.weight(lab) for lab in keep},
        V.space.complete,
        V.space.cutoff,
    )
    left: ModeTable = {}
    right: ModeTable = {}
    for (op_lab, n), cols in V.modes.items():
        for arg, img in cols.items():
            if arg in keep:
                restrict(img, f"Y_{n}({op_lab!r}) {arg!r}")
                left.setdefault((op_lab, n), {})[arg] = img
            if op_lab in keep:
                restrict(img, f"Y_{n}({op_lab!r}) {arg!r}")
                right.setdefault((op_lab, n), {})[arg] = img
    d_cols = {}
    for lab in keep:
        img = V.d.apply({lab: Fraction(1)})
        if img:
            d_cols[lab] = restrict(img, f"D {lab!r}")
    vlabels = V.space.labels()
    return BimoduleData(
        name,
        space,
        left,
        right,
        LinOp(d_cols),
        {(u, w): V.pole_bound(u, w) for u in vlabels for w in keep},
        {(w, u): V.pole_bound(w, u) for w in keep for u in vlabels},
        dict(V.pole_bounds),
    )


# ---------------------------------------------------------------------------
# the reversed right action


def y_sr_modes(V: MosvaData, W: BimoduleData) -> ModeTable:
    """Modes of Y^sR(v, x) w = e^{x D_W} Y^R(w, -x) v:

        Y^sR_n(v) w = sum_{l>=0} (-1)^(n+l+1) D_W^l ( Y^R_{n+l}(w) v ) / l! .

    Each summand sits l weights below the result, so the sum is exact at
    any coverage.
    """
    space = W.space
    K = W.coverage()
    max_w = K if K != INF else space.max_weight()
    min_w = space.min_weight()
    modes: ModeTable = {}
    for v_lab in V.space.labels():
        hv = V.space.weight(v_lab)
        for w_lab in space.labels():
            hw = space.weight(w_lab)
            cap = W.right_bound(w_lab, v_lab)
            n_hi = hv + hw - 1 - min_w
            n_lo = hv + hw - 1 - max_w
            for n in range(n_lo, n_hi + 1):
                acc: Vec = {}
                l = 0
                while n + l < cap:
                    base = W.right_image(w_lab, n + l, v_lab)
                    if base:
                        term = base
                        for j in range(1, l + 1):
                            term = vec_scale(W.d.apply(term), Fraction(1, j))
                        acc = vec_add(acc, vec_scale(term, (-1) ** (n + l + 1)))
                    l += 1
                if acc:
                    modes.setdefault((v_lab, n), {})[w_lab] = acc
    return modes


# ---------------------------------------------------------------------------
# chain assembly helpers


def lr_chain_state(
    V: MosvaData,
    W: BimoduleData,
    spec: Sequence[tuple[str, Vec]],
    w: Vec,
    window: int,
) -> dict[tuple, Vec]:
    """State of a mixed chain of left / sR operators applied to w.

    spec lists (side, u) pairs left to right, side in {"L", "sR"}; the
    chain is assembled in the region z_1 >> ... >> z_n.
    """
    W.ensure_sr(V)

    def apply(kind, u_lab, n, vec):
        if kind == "L":
            return W.apply_left(u_lab, n, vec)
        if kind == "sR":
            return W.apply_sr(u_lab, n, vec)
        raise ValueError(f"unknown side {kind!r}")

    return assemble_product(
        spec,
        {(): w},
        apply_mode=apply,
        op_space=V.space,
        target_space=W.space,
        window=window,
    )


def _prepend_op(
    state: Mapping[tuple, Vec],
    op_vec: Vec,
    op_space: GradedSpace,
    apply_vec,
    domain_space: GradedSpace,
    out_space: GradedSpace,
    window: int,
) -> dict[tuple, Vec]:
    """Apply one operator family to a state, prepending one variable.

    apply_vec(op_label, n, component) must return a vector of out_space;
    the state's vectors live in domain_space.  Modes are enumerated from
    the weight bookkeeping against out_space coverage, and the result is
    pruned to the window on suffix sums.
    """
    max_w = out_space.max_weight() if out_space.complete else out_space.cutoff
    min_w = out_space.min_weight()
    new_state: dict[tuple, Vec] = {}
    for op_lab, op_coef in op_vec.items():
        h = op_space.weight(op_lab)
        for mono, vec in state.items():
            inner = sum(mono)
            for omega, comp in vec_weight_split(domain_space, vec).items():
                n_hi = omega + h - 1 - min_w
                n_lo = omega + h - 1 - max_w
                for n in range(n_lo, n_hi + 1):
                    if -n - 1 + inner > window:
                        continue
                    img = apply_vec(op_lab, n, comp)
                    if not img:
                        continue
                    key = (-n - 1,) + mono
                    acc = new_state.setdefault(key, {})
                    for lab, c in img.items():
                        s = acc.get(lab, 0) + op_coef * c
                        if s:
                            acc[lab] = s
                        else:
                            acc.pop(lab, None)
    return {m: v for m, v in new_state.items() if v}


def _composite_series(
    inner_state: Mapping[tuple, Vec],
    inner_space: GradedSpace,
    apply_outer,
    base: Vec,
    base_space: GradedSpace,
    out_space: GradedSpace,
    window: int,
) -> dict[tuple[int, int], Vec]:
    """Series of Op(Y_inner(.., x) .., zeta) base keyed by (zeta, x) exponents.

    apply_outer(y_vec, n, base) applies the outer operator indexed by the
    intermediate vector y (living in inner_space) to the base vector.
    """
    out: dict[tuple[int, int], Vec] = {}
    for (ex,), y in inner_state.items():
        st = _prepend_op(
            {(): base},
            y,
            inner_space,
            lambda y_lab, n, comp: apply_outer({y_lab: Fraction(1)}, n, comp),
            base_space,
            out_space,
            window - ex,
        )
        for (ez,), img in st.items():
            acc = out.setdefault((ez, ex), {})
            for lab, c in img.items():
                s = acc.get(lab, 0) + c
                if s:
                    acc[lab] = s
                else:
                    acc.pop(lab, None)
    return {m: v for m, v in out.items() if v}


# ---------------------------------------------------------------------------
# reconstruction comparison


def _component(state: Mapping[tuple, Vec], label: Label) -> dict:
    return {m: vec[label] for m, vec in state.items() if vec.get(label)}


def _assoc_compare(
    rep: Report,
    *,
    prod_state: Mapping[tuple, Vec],
    comp_state: Mapping[tuple, Vec],
    dual_space: GradedSpace,
    coverage: int,
    T: int,
    pair_cap: int,
    q1_cap: int,
    q2_cap: int,
    window: int,
    witness: str,
    key: str,
):
    """Reconstruct a two-operator product against its substituted form
    for every dual-basis component and require equal rational functions."""
    caps = pair_cap + q1_cap + q2_cap
    for wp_lab in dual_space.labels():
        tau = dual_space.weight(wp_lab) - T
        d = tau + caps
        covered = window >= d and (coverage == INF or dual_space.weight(wp_lab) <= coverage)
        if not covered:
            rep.record(f"{key}-skipped-window")
            continue
        neg = max(caps, -tau)
        s1 = TruncatedLaurent(2, (0, 1), _component(prod_state, wp_lab), window, neg)
        s2 = TruncatedLaurent(2, (0, 1), _component(comp_state, wp_lab), window, neg)
        full = f"{witness}, w'={wp_lab!r}"
        if d < 0:
            rep.require(
                s1.is_zero_on_window() and s2.is_zero_on_window(),
                f"negative-degree component is nonzero at {full}",
                f"{key}-zero",
            )
            continue
        try:
            f1 = reconstruct(s1, {(0, 1): pair_cap}, (q1_cap, q2_cap), d, homogeneous_degree=d)
        except (InconsistentError, UnderdeterminedError) as exc:
            rep.fail(f"product side not rational within bounds at {full}: {exc}")
            continue
        try:
            f2 = reconstruct_affine(
                s2, [{0: 1, 1: 1}, {0: 1}], {(0, 1): pair_cap}, (q1_cap, q2_cap), d
            )
        except (InconsistentError, UnderdeterminedError) as exc:
            rep.fail(f"substituted side not rational within bounds at {full}: {exc}")
            continue
        rep.require(f1 == f2, f"associativity fails at {full}: {f1!r} != {f2!r}", key)


# ---------------------------------------------------------------------------
# structural checks, parameterized over the acting table


def _check_left_structure(
    rep: Report,
    Vlike: MosvaData,
    W: BimoduleData,
    image,
    apply_vec,
    bound,
    tag: str,
):
    """Identity, D-derivative (both forms), caps, and weight bookkeeping
    for a left-action mode table (Y^L, or Y^sR over the reversed algebra)."""
    space = W.space
    vspace = Vlike.space
    K = W.coverage()
    KV = Vlike.coverage()
    w_labels = space.labels()

    for u_lab in vspace.labels():
        hu = vspace.weight(u_lab)
        for w_lab in w_labels:
            hw = space.weight(w_lab)
            # caps and weight bookkeeping on the stored range
            n_hi = hu + hw - space.min_weight()
            n_lo = hu + hw - (K if K != INF else space.max_weight())
            for n in range(n_lo - 1, n_hi + 1):
                img = image(u_lab, n, w_lab)
                if img and n >= bound(u_lab, w_lab):
                    rep.fail(
                        f"{tag}_{n}({u_lab!r}){w_lab!r} != 0 breaches cap "
                        f"{bound(u_lab, w_lab)}"
                    )
                rep.record(f"{tag}-cap")
                want = hu + hw - n - 1
                for lab in img:
                    rep.require(
                        space.weight(lab) == want,
                        f"wt({tag}_{n}({u_lab!r}){w_lab!r}) component {lab!r} is "
                        f"{space.weight(lab)}, expected {want}",
                        f"{tag}-weight",
                    )
                if hu + hw - n > K:
                    continue
                # D-derivative forms, coverage-guarded as in the algebra
                rhs = vec_scale(image(u_lab, n - 1, w_lab), -n)
                if KV == INF or hu + 1 <= KV:
                    du = Vlike.d.apply({u_lab: Fraction(1)})
                    lhs = {}
                    for lab, c in du.items():
                        lhs = vec_add(lhs, vec_scale(image(lab, n, w_lab), c))
                    rep.require(
                        vec_eq(lhs, rhs),
                        f"{tag}_{n}(D {u_lab!r}) {w_lab!r} != -{n} {tag}_{n-1}({u_lab!r}) {w_lab!r}",
                        f"{tag}-d-derivative",
                    )
                else:
                    rep.record(f"{tag}-d-derivative-skipped")
                if K == INF or hw + 1 <= K:
                    comm = vec_sub(
                        W.d.apply(image(u_lab, n, w_lab)),
                        apply_vec({u_lab: Fraction(1)}, n, W.d.apply({w_lab: Fraction(1)})),
                    )
                    rep.require(
                        vec_eq(comm, rhs),
                        f"[D, {tag}_{n}({u_lab!r})] {w_lab!r} != -{n} {tag}_{n-1}({u_lab!r}) {w_lab!r}",
                        f"{tag}-d-commutator",
                    )
                else:
                    rep.record(f"{tag}-d-commutator-skipped")

    # identity property of the acting algebra's vacuum
    for n in range(-2, 2):
        for w_lab in w_labels:
            got = apply_vec(Vlike.vacuum, n, {w_lab: Fraction(1)})
            want = {w_lab: Fraction(1)} if n == -1 else {}
            rep.require(
                vec_eq(got, want),
                f"{tag}_{n}(vacuum) on {w_lab!r} gives {got}, expected {want}",
                f"{tag}-identity",
            )


def _check_left_assoc(
    rep: Report,
    Vlike: MosvaData,
    W: BimoduleData,
    apply_vec,
    bound,
    tag: str,
    max_triple_weight: int | None,
):
    """Two-operator rationality/associativity of a left action:
    the product chain against the chain with the acting algebra's own
    product inserted."""
    space = W.space
    vspace = Vlike.space
    K = W.coverage()
    KV = Vlike.coverage()

    def apply(kind, u_lab, n, vec):
        return apply_vec({u_lab: Fraction(1)}, n, vec)

    for u1_lab, u2_lab in iproduct(vspace.labels(), repeat=2):
        h1, h2 = vspace.weight(u1_lab), vspace.weight(u2_lab)
        for w_lab in space.labels():
            hw = space.weight(w_lab)
            T = h1 + h2 + hw
            if max_triple_weight is not None and T > max_triple_weight:
                rep.record(f"{tag}-assoc-skipped-weight")
                continue
            window = min(
                safe_window(space, hw, [h1, h2]),
                (INF if KV == INF else KV - max(h2, h1 + h2)),
            )
            u1 = {u1_lab: Fraction(1)}
            u2 = {u2_lab: Fraction(1)}
            w = {w_lab: Fraction(1)}
            prod = assemble_product(
                [("op", u1), ("op", u2)],
                {(): w},
                apply_mode=apply,
                op_space=vspace,
                target_space=space,
                window=window,
            )
            inner = assemble_product(
                [("V", u1)],
                {(): u2},
                apply_mode=lambda kind, ul, n, vec: Vlike.apply_mode(ul, n, vec),
                op_space=vspace,
                target_space=vspace,
                window=window,
            )
            comp = _composite_series(
                inner, vspace, apply_vec, w, space, space, window
            )
            _assoc_compare(
                rep,
                prod_state=prod,
                comp_state=comp,
                dual_space=space,
                coverage=K,
                T=T,
                pair_cap=Vlike.pole_bound(u1_lab, u2_lab),
                q1_cap=bound(u1_lab, w_lab),
                q2_cap=bound(u2_lab, w_lab),
                window=window,
                witness=f"(u1={u1_lab!r}, u2={u2_lab!r}, w={w_lab!r})",
                key=f"{tag}-assoc",
            )


# ---------------------------------------------------------------------------
# the full bimodule check


def check_bimodule(
    V: MosvaData,
    W: BimoduleData,
    *,
    mixed_ops: int = 3,
    max_triple_weight: int | None = None,
) -> Report:
    """Left-module, right-module, and compatibility axioms with pole caps.

    ``mixed_ops`` >= 3 adds the three-operator mixed-chain rationality
    sweep (left/sR form); ``max_triple_weight`` limits the summed weight
    of the swept operator tuples on truncated fixtures.
    """
    rep = Report(f"bimodule[{W.name} over {V.name}]")
    space = W.space
    vspace = V.space
    K = W.coverage()
    KV = V.coverage()

    # D_W raises weight by one
    for lab, col in W.d.columns.items():
        w0 = space.weight(lab)
        for lab2 in col:
            rep.require(
                space.weight(lab2) == w0 + 1,
                f"D({lab!r}) has a component of weight {space.weight(lab2)} != {w0}+1",
                "d-grading",
            )

    # left structure
    _check_left_structure(rep, V, W, W.left_image, W.apply_left_vec, W.left_bound, "left")
    _check_left_assoc(rep, V, W, W.apply_left_vec, W.left_bound, "left", max_triple_weight)

    # right structure: caps, weights, creation, D-derivative
    for (w_lab, n), cols in W.right_modes.items():
        hw = space.weight(w_lab)
        for v_lab, img in cols.items():
            if img and n >= W.right_bound(w_lab, v_lab):
                rep.fail(
                    f"R_{n}({w_lab!r}){v_lab!r} != 0 breaches cap "
                    f"{W.right_bound(w_lab, v_lab)}"
                )
            rep.record("right-cap")
            want = hw + vspace.weight(v_lab) - n - 1
            for lab in img:
                rep.require(
                    space.weight(lab) == want,
                    f"wt(R_{n}({w_lab!r}){v_lab!r}) component {lab!r} is "
                    f"{space.weight(lab)}, expected {want}",
                    "right-weight",
                )

    for w_lab in space.labels():
        hw = space.weight(w_lab)
        jmax = (K - hw) if K != INF else (space.max_weight() - hw + 1)
        powers = power_over_factorial(W.d.apply, {w_lab: Fraction(1)}, max(jmax, 0))
        ns = {n for (wl, n) in W.right_modes if wl == w_lab}
        ns |= {-1 - k for k in range(len(powers))} | {0}
        for n in sorted(ns):
            got = W.apply_right(w_lab, n, V.vacuum)
            if n >= 0:
                rep.require(
                    vec_is_zero(got), f"R_{n}({w_lab!r}) vacuum != 0", "right-creation"
                )
            else:
                k = -n - 1
                if k < len(powers) and (K == INF or hw + k <= K):
                    rep.require(
                        vec_eq(got, powers[k]),
                        f"R_{n}({w_lab!r}) vacuum = {got}, expected D^{k}w/{k}!",
                        "right-creation",
                    )
                else:
                    rep.record("right-creation-skipped")

    for w_lab in space.labels():
        hw = space.weight(w_lab)
        for v_lab in vspace.labels():
            hv = vspace.weight(v_lab)
            n_hi = hw + hv - space.min_weight()
            n_lo = hw + hv - (K if K != INF else space.max_weight())
            for n in range(n_lo, n_hi + 1):
                if hw + hv - n > K:
                    continue
                rhs = vec_scale(W.right_image(w_lab, n - 1, v_lab), -n)
                if K == INF or hw + 1 <= K:
                    dw = W.d.apply({w_lab: Fraction(1)})
                    lhs = W.apply_right_vec(dw, n, {v_lab: Fraction(1)})
                    rep.require(
                        vec_eq(lhs, rhs),
                        f"R_{n}(D {w_lab!r}) {v_lab!r} != -{n} R_{n-1}({w_lab!r}) {v_lab!r}",
                        "right-d-derivative",
                    )
                else:
                    rep.record("right-d-derivative-skipped")
                if KV == INF or hv + 1 <= KV:
                    comm = vec_sub(
                        W.d.apply(W.right_image(w_lab, n, v_lab)),
                        W.apply_right(w_lab, n, V.d.apply({v_lab: Fraction(1)})),
                    )
                    rep.require(
                        vec_eq(comm, rhs),
                        f"D R_{n}({w_lab!r}) - R_{n}({w_lab!r}) D != -{n} R_{n-1} at {v_lab!r}",
                        "right-d-commutator",
                    )
                else:
                    rep.record("right-d-commutator-skipped")

    _check_right_assoc(rep, V, W, max_triple_weight)
    _check_compat_assoc(rep, V, W, max_triple_weight)
    if mixed_ops >= 3:
        _check_mixed_rationality(rep, V, W, max_triple_weight)
    return rep


def _check_right_assoc(rep, V: MosvaData, W: BimoduleData, max_triple_weight):
    """<w', R(w, z1) Y(u1, z2) u2> against <w', R(R(w, z1-z2) u1, z2) u2>."""
    space = W.space
    vspace = V.space
    K = W.coverage()
    KV = V.coverage()
    for w_lab in space.labels():
        hw = space.weight(w_lab)
        for u1_lab, u2_lab in iproduct(vspace.labels(), repeat=2):
            h1, h2 = vspace.weight(u1_lab), vspace.weight(u2_lab)
            T = hw + h1 + h2
            if max_triple_weight is not None and T > max_triple_weight:
                rep.record("right-assoc-skipped-weight")
                continue
            window = min(
                INF if KV == INF else KV - max(h2, h1 + h2),
                INF if K == INF else min(K - T, K - (hw + h1)),
            )
            u2 = {u2_lab: Fraction(1)}
            # product: the algebra's operator inside, the right operator in front
            inner_v = assemble_product(
                [("V", {u1_lab: Fraction(1)})],
                {(): u2},
                apply_mode=lambda kind, ul, n, vec: V.apply_mode(ul, n, vec),
                op_space=vspace,
                target_space=vspace,
                window=window,
            )
            prod = _prepend_op(
                inner_v,
                {w_lab: Fraction(1)},
                space,
                W.apply_right,
                vspace,
                space,
                window,
            )
            # substituted: R-modes of w on u1 first, then R of the result on u2
            inner_w = _prepend_op(
                {(): {u1_lab: Fraction(1)}},
                {w_lab: Fraction(1)},
                space,
                W.apply_right,
                vspace,
                space,
                window,
            )
            comp = _composite_series(
                inner_w, space, W.apply_right_vec, u2, vspace, space, window
            )
            _assoc_compare(
                rep,
                prod_state=prod,
                comp_state=comp,
                dual_space=space,
                coverage=K,
                T=T,
                pair_cap=W.right_bound(w_lab, u1_lab),
                q1_cap=W.right_bound(w_lab, u2_lab),
                q2_cap=V.pole_bound(u1_lab, u2_lab),
                window=window,
                witness=f"(w={w_lab!r}, u1={u1_lab!r}, u2={u2_lab!r})",
                key="right-assoc",
            )


def _check_compat_assoc(rep, V: MosvaData, W: BimoduleData, max_triple_weight):
    """<w', L(u, z1) R(w, z2) v> against <w', R(L(u, z1-z2) w, z2) v>."""
    space = W.space
    vspace = V.space
    K = W.coverage()
    for u_lab in vspace.labels():
        hu = vspace.weight(u_lab)
        for w_lab in space.labels():
            hw = space.weight(w_lab)
            for v_lab in vspace.labels():
                hv = vspace.weight(v_lab)
                T = hu + hw + hv
                if max_triple_weight is not None and T > max_triple_weight:
                    rep.record("compat-assoc-skipped-weight")
                    continue
                window = (
                    INF
                    if K == INF
                    else K - max(hw + hv, T, hu + hw)
                )
                # product: right operator on v, then the left operator
                inner_w = _prepend_op(
                    {(): {v_lab: Fraction(1)}},
                    {w_lab: Fraction(1)},
                    space,
                    W.apply_right,
                    vspace,
                    space,
                    window,
                )
                prod = _prepend_op(
                    inner_w,
                    {u_lab: Fraction(1)},
                    vspace,
                    W.apply_left,
                    space,
                    space,
                    window,
                )
                # substituted: left modes of u on w, then right action on v
                inner = _prepend_op(
                    {(): {w_lab: Fraction(1)}},
                    {u_lab: Fraction(1)},
                    vspace,
                    W.apply_left,
                    space,
                    space,
                    window,
                )
                comp = _composite_series(
                    inner, space, W.apply_right_vec, {v_lab: Fraction(1)},
                    vspace, space, window,
                )
                _assoc_compare(
                    rep,
                    prod_state=prod,
                    comp_state=comp,
                    dual_space=space,
                    coverage=K,
                    T=T,
                    pair_cap=W.left_bound(u_lab, w_lab),
                    q1_cap=W.mixed_bound(u_lab, v_lab),
                    q2_cap=W.right_bound(w_lab, v_lab),
                    window=window,
                    witness=f"(u={u_lab!r}, w={w_lab!r}, v={v_lab!r})",
                    key="compat-assoc",
                )


def _chain_caps(W: BimoduleData, V: MosvaData, sides, u_labs, w_lab):
    """Pole caps for a left/sR chain: zero orders per operator over the
    base, pair orders keyed by the operator pair's sides."""
    zeros = []
    for side, u in zip(sides, u_labs):
        zeros.append(W.left_bound(u, w_lab) if side == "L" else W.sr_bound(u, w_lab))
    pairs = {}
    for i in range(len(u_labs)):
        for j in range(i + 1, len(u_labs)):
            si, sj = sides[i], sides[j]
            if si == "L" and sj == "L":
                pairs[(i, j)] = V.pole_bound(u_labs[i], u_labs[j])
            elif si == "sR" and sj == "sR":
                pairs[(i, j)] = V.pole_bound(u_labs[j], u_labs[i])
            else:
                pairs[(i, j)] = W.mixed_bound(u_labs[i], u_labs[j])
    return pairs, tuple(zeros)


def _check_mixed_rationality(rep, V: MosvaData, W: BimoduleData, max_triple_weight):
    """Three-operator left/sR chains reconstruct to rational functions
    within the declared caps (the chain form of compatibility)."""
    W.ensure_sr(V)
    space = W.space
    vspace = V.space
    K = W.coverage()
    for l in range(4):
        sides = ["L"] * l + ["sR"] * (3 - l)
        for u_labs in iproduct(vspace.labels(), repeat=3):
            hs = [vspace.weight(u) for u in u_labs]
            for w_lab in space.labels():
                hw = space.weight(w_lab)
                T = sum(hs) + hw
                if max_triple_weight is not None and T > max_triple_weight:
                    rep.record("mixed-rationality-skipped-weight")
                    continue
                window = safe_window(space, hw, hs)
                state = lr_chain_state(
                    V, W,
                    [(s, {u: Fraction(1)}) for s, u in zip(sides, u_labs)],
                    {w_lab: Fraction(1)},
                    window,
                )
                pairs, zeros = _chain_caps(W, V, sides, u_labs, w_lab)
                caps = sum(pairs.values()) + sum(zeros)
                for wp_lab in space.labels():
                    tau = space.weight(wp_lab) - T
                    d = tau + caps
                    if window < d or (K != INF and space.weight(wp_lab) > K):
                        rep.record("mixed-rationality-skipped-window")
                        continue
                    s = TruncatedLaurent(
                        3, (0, 1, 2), _component(state, wp_lab), window, max(caps, -tau)
                    )
                    witness = f"(sides={''.join(sides)}, us={u_labs!r}, w={w_lab!r}, w'={wp_lab!r})"
                    if d < 0:
                        rep.require(
                            s.is_zero_on_window(),
                            f"negative-degree chain component nonzero at {witness}",
                            "mixed-rationality-zero",
                        )
                        continue
                    try:
                        reconstruct(s, pairs, zeros, d, homogeneous_degree=d)
                    except (InconsistentError, UnderdeterminedError) as exc:
                        rep.fail(f"mixed chain not rational within caps at {witness}: {exc}")
                        continue
                    rep.record("mixed-rationality")


# ---------------------------------------------------------------------------
# left / sR commutativity


def check_lr_commutativity(
    V: MosvaData,
    W: BimoduleData,
    *,
    max_triple_weight: int | None = None,
) -> Report:
    """The reversed right action against the left action.

    First verifies that Y^sR is a left action of the reversed algebra
    (identity, D-derivative, caps, two-operator associativity over
    opposite(V)), then that left and sR operators commute at the level
    of reconstructed rational functions:

        E(Y^L(u1, z1) Y^sR(u2, z2) w) = E(Y^sR(u2, z2) Y^L(u1, z1) w).
    """
    rep = Report(f"lr-commutativity[{W.name} over {V.name}]")
    W.ensure_sr(V)
    Vop = opposite(V)
    _check_left_structure(rep, Vop, W, W.sr_image, W.apply_sr_vec, W.sr_bound, "sr")
    _check_left_assoc(rep, Vop, W, W.apply_sr_vec, W.sr_bound, "sr", max_triple_weight)

    space = W.space
    vspace = V.space
    K = W.coverage()
    for u1_lab, u2_lab in iproduct(vspace.labels(), repeat=2):
        h1, h2 = vspace.weight(u1_lab), vspace.weight(u2_lab)
        for w_lab in space.labels():
            hw = space.weight(w_lab)
            T = h1 + h2 + hw
            if max_triple_weight is not None and T > max_triple_weight:
                rep.record("lr-comm-skipped-weight")
                continue
            window = min(
                safe_window(space, hw, [h1, h2]),
                safe_window(space, hw, [h2, h1]),
            )
            side1 = lr_chain_state(
                V, W,
                [("L", {u1_lab: Fraction(1)}), ("sR", {u2_lab: Fraction(1)})],
                {w_lab: Fraction(1)},
                window,
            )
            side2 = lr_chain_state(
                V, W,
                [("sR", {u2_lab: Fraction(1)}), ("L", {u1_lab: Fraction(1)})],
                {w_lab: Fraction(1)},
                window,
            )
            pair_cap = W.mixed_bound(u1_lab, u2_lab)
            q1_cap = W.left_bound(u1_lab, w_lab)
            q2_cap = W.sr_bound(u2_lab, w_lab)
            caps = pair_cap + q1_cap + q2_cap
            for wp_lab in space.labels():
                tau = space.weight(wp_lab) - T
                d = tau + caps
                if window < d or (K != INF and space.weight(wp_lab) > K):
                    rep.record("lr-comm-skipped-window")
                    continue
                neg = max(caps, -tau)
                s1 = TruncatedLaurent(2, (0, 1), _component(side1, wp_lab), window, neg)
                # side2 is assembled in the order (z2, z1): swap exponents
                # and declare the region with z2 outermost
                s2 = TruncatedLaurent(
                    2, (1, 0),
                    {(m[1], m[0]): c for m, c in _component(side2, wp_lab).items()},
                    window, neg,
                )
                full = f"(u1={u1_lab!r}, u2={u2_lab!r}, w={w_lab!r}, w'={wp_lab!r})"
                if d < 0:
                    rep.require(
                        s1.is_zero_on_window() and s2.is_zero_on_window(),
                        f"negative-degree component nonzero at {full}",
                        "lr-comm-zero",
                    )
                    continue
                try:
                    f1 = reconstruct(
                        s1, {(0, 1): pair_cap}, (q1_cap, q2_cap), d, homogeneous_degree=d
                    )
                    f2 = reconstruct(
                        s2, {(0, 1): pair_cap}, (q1_cap, q2_cap), d, homogeneous_degree=d
                    )
                except (InconsistentError, UnderdeterminedError) as exc:
                    rep.fail(f"commutativity side not rational at {full}: {exc}")
                    continue
                rep.require(
                    f1 == f2,
                    f"left/sR commutativity fails at {full}: {f1!r} != {f2!r}",
                    "lr-comm",
                )
    return rep
