"""Module-valued rational functions and the calculus of operator products.

A ``WValuedRational`` represents a function of (z_1, ..., z_n), defined
wherever z_i != z_j, taking values in the (completed) module W.  It is
stored componentwise against the dual basis: one ``PoleRational`` per
module label, all sharing one table of diagonal pole orders and one
total-weight offset.  For a component at dual label w' the rational
function is homogeneous of degree wt(w') - total_weight.

``e_product`` reconstructs the product of left / reversed-right vertex
operators applied to a suitable base vector as such a function; the
series it assembles converges in the region z_1 > ... > z_n, but the
reconstructed function does not remember the region, and that is
verified by re-assembling in a second admissible order whenever one
exists.  ``apply_front_modes`` applies further operators in front of an
existing function.  The check operations verify, instance by instance,
the exchange and regrouping laws these products satisfy:

  (1) a left operator and a reversed-right operator commute,
  (2) a block of left operators may be regrouped through the algebra's
      own product at a new variable, and
  (3) the mirrored statement for reversed-right operators, whose flat
      side carries the outermost operator at the last variable,

together with the insertion law that a product argument placed inside a
slot agrees with the flat product.  All equalities are checked between
fully reconstructed functions, never between raw series.

On a truncated module the cutoff may certify only the components below
some weight; ``allow_partial`` reconstructs those and records the bound
in ``certified_weight`` instead of raising, and the checks compare the
two sides of each law up to the smaller of their bounds.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import Callable, Mapping, Sequence

from .algebra import MosvaData
from .assemble import assemble_product, safe_window
from .bimodule import BimoduleData, lr_chain_state, _prepend_op
from .graded import GradedSpace, Label, Vec
from .ratfun import (
    INF,
    InconsistentError,
    PoleRational,
    TruncatedLaurent,
    UnderdeterminedError,
    iota_expand,
    reconstruct,
    reconstruct_affine,
)
from .report import Report

ONE = Fraction(1)

Side = str  # "L" or "sR"
OpSpec = tuple[Side, Label]


class WValuedRational:
    """Componentwise storage of a module-valued rational function."""

    __slots__ = (
        "nvars", "space", "components", "pole_orders", "total_weight",
        "var_kinds", "certified_weight",
    )

    def __init__(
        self,
        nvars: int,
        space: GradedSpace,
        components: Mapping[Label, PoleRational],
        pole_orders: Mapping[tuple[int, int], int],
        total_weight: int,
        var_kinds: Sequence[OpSpec] | None = None,
        certified_weight: int = INF,
    ):
        self.nvars = nvars
        self.space = space
        self.pole_orders = {
            (min(i, j), max(i, j)): p for (i, j), p in pole_orders.items() if p
        }
        self.total_weight = total_weight
        self.var_kinds = tuple(var_kinds) if var_kinds is not None else None
        self.certified_weight = certified_weight
        comps: dict[Label, PoleRational] = {}
        for lab, f in components.items():
            if f.is_zero():
                continue
            if space.weight(lab) > certified_weight:
                raise ValueError(f"component {lab!r} lies above the certified weight")
            if f.nvars != nvars:
                raise ValueError(f"component {lab!r} has {f.nvars} variables, expected {nvars}")
            if any(f.zero_orders):
                raise ValueError(f"component {lab!r} has a pole at a coordinate origin")
            for key, p in f.pair_orders.items():
                if p > self.pole_orders.get(key, 0):
                    raise ValueError(
                        f"component {lab!r} exceeds the shared pole table at {key}"
                    )
            want = space.weight(lab) - total_weight
            if f.homogeneous_degree() != want:
                raise ValueError(
                    f"component {lab!r} is not homogeneous of degree {want}"
                )
            comps[lab] = f
        self.components = comps

    @classmethod
    def zero(cls, nvars: int, space: GradedSpace, total_weight: int) -> "WValuedRational":
        return cls(nvars, space, {}, {}, total_weight)

    def is_zero(self) -> bool:
        return not self.components

    def component(self, label: Label) -> PoleRational:
        return self.components.get(label, PoleRational.zero(self.nvars))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, WValuedRational)
            and self.nvars == other.nvars
            and self.components == other.components
        )

    def __repr__(self) -> str:
        return (
            f"WValuedRational(nvars={self.nvars}, T={self.total_weight}, "
            f"{len(self.components)} components)"
        )

    # -- linear structure ------------------------------------------------------

    def add(self, other: "WValuedRational") -> "WValuedRational":
        if (self.nvars, self.total_weight) != (other.nvars, other.total_weight):
            raise ValueError("cannot add functions of different shape or weight")
        comps = dict(self.components)
        for lab, f in other.components.items():
            comps[lab] = comps[lab].add(f) if lab in comps else f
        pairs = dict(self.pole_orders)
        for key, p in other.pole_orders.items():
            pairs[key] = max(pairs.get(key, 0), p)
        kinds = self.var_kinds if self.var_kinds == other.var_kinds else None
        return WValuedRational(
            self.nvars, self.space, comps, pairs, self.total_weight, kinds,
            min(self.certified_weight, other.certified_weight),
        )

    def scale(self, c: Fraction) -> "WValuedRational":
        comps = {} if not c else {lab: f.scale(c) for lab, f in self.components.items()}
        return WValuedRational(
            self.nvars, self.space, comps, self.pole_orders, self.total_weight,
            self.var_kinds, self.certified_weight,
        )

    def sub(self, other: "WValuedRational") -> "WValuedRational":
        return self.add(other.scale(Fraction(-1)))

    def apply_op(self, columns: Mapping[Label, Vec], weight_shift: int) -> "WValuedRational":
        """Apply a graded linear operator of the module to the value.

        columns[w] is the image of basis vector w; the dual-basis
        components transform by the transpose.
        """
        comps: dict[Label, PoleRational] = {}
        for lab, f in self.components.items():
            img = columns.get(lab)
            if not img:
                continue
            for out_lab, c in img.items():
                g = f.scale(c)
                comps[out_lab] = comps[out_lab].add(g) if out_lab in comps else g
        comps = {lab: g for lab, g in comps.items() if not g.is_zero()}
        cert = self.certified_weight
        if cert < INF:
            cert += weight_shift
        return WValuedRational(
            self.nvars, self.space, comps, self.pole_orders,
            self.total_weight + weight_shift, self.var_kinds, cert,
        )

    def partial_derivative(self, i: int) -> "WValuedRational":
        comps = {lab: f.partial_derivative(i) for lab, f in self.components.items()}
        pairs = {
            key: p + (1 if i in key else 0) for key, p in self.pole_orders.items()
        }
        return WValuedRational(
            self.nvars, self.space, comps, pairs, self.total_weight + 1,
            self.var_kinds, self.certified_weight,
        )

    def permute_vars(self, perm: Sequence[int]) -> "WValuedRational":
        """Relabel variables: old variable i becomes variable perm[i]."""
        comps = {lab: f.embed(self.nvars, perm) for lab, f in self.components.items()}
        pairs = {}
        for (i, j), p in self.pole_orders.items():
            a, b = perm[i], perm[j]
            pairs[(min(a, b), max(a, b))] = p
        kinds = None
        if self.var_kinds is not None:
            slots: list = [None] * self.nvars
            for i, k in enumerate(self.var_kinds):
                slots[perm[i]] = k
            kinds = tuple(slots)
        return WValuedRational(
            self.nvars, self.space, comps, pairs, self.total_weight, kinds,
            self.certified_weight,
        )

    def restrict_weight(self, wmax: int) -> "WValuedRational":
        comps = {
            lab: f for lab, f in self.components.items()
            if self.space.weight(lab) <= wmax
        }
        return WValuedRational(
            self.nvars, self.space, comps, self.pole_orders, self.total_weight,
            self.var_kinds, min(self.certified_weight, wmax),
        )


# ---------------------------------------------------------------------------
# caps and preconditions


def chain_pair_cap(V: MosvaData, W: BimoduleData, side_i: Side, u_i: Label,
                   side_j: Side, u_j: Label) -> int:
    """Diagonal pole cap between two operators, the i one applied after
    (to the left of) the j one."""
    if side_i == "L" and side_j == "L":
        return V.pole_bound(u_i, u_j)
    if side_i == "sR" and side_j == "sR":
        return V.pole_bound(u_j, u_i)
    if side_i == "L":
        return W.mixed_bound(u_i, u_j)
    return W.mixed_bound(u_j, u_i)


def spec_pair_table(
    V: MosvaData, W: BimoduleData, kinds: Sequence[OpSpec]
) -> dict[tuple[int, int], int]:
    """Pole table of a chain whose operator order is its variable order."""
    n = len(kinds)
    return {
        (i, j): chain_pair_cap(V, W, kinds[i][0], kinds[i][1], kinds[j][0], kinds[j][1])
        for i in range(n)
        for j in range(i + 1, n)
    }


def no_negative_mode_labels(V: MosvaData, W: BimoduleData) -> set[Label]:
    """Module labels on which every left and reversed-right operator has
    only nonnegative powers of the variable."""
    W.ensure_sr(V)
    bad: set[Label] = set()
    for table in (W.left_modes, W._sr_modes):
        for (_, n), cols in table.items():
            if n >= 0:
                bad.update(w for w, img in cols.items() if img)
    return set(W.space.labels()) - bad


def _base_weight(space: GradedSpace, w: Vec) -> int:
    ws = {space.weight(lab) for lab in w}
    if len(ws) != 1:
        raise ValueError("base vector must be homogeneous")
    return ws.pop()


def expand_components(f: WValuedRational, window: int) -> dict[tuple, Vec]:
    """Expand f in the region z_1 > ... > z_n as a state of module vectors.

    Exact and complete for every monomial with suffix sums at most the
    window, provided total_weight + window stays within f's certified
    weight; the expansion itself introduces no truncation error.
    """
    if f.nvars == 0:
        vec = {lab: g.num.get((), Fraction(0)) for lab, g in f.components.items()}
        vec = {lab: c for lab, c in vec.items() if c}
        return {(): vec} if vec else {}
    region = tuple(range(f.nvars))
    state: dict[tuple, Vec] = {}
    for lab, g in f.components.items():
        for mono, c in iota_expand(g, region, window).coeffs.items():
            if not c:
                continue
            state.setdefault(mono, {})[lab] = c
    return state


# ---------------------------------------------------------------------------
# reconstruction driver


def _finite_window(window: int, space: GradedSpace, T: int, caps: int) -> int:
    """Replace an infinite window by the largest degree any component needs."""
    if window < INF:
        return window
    return max([0] + [space.weight(lab) - T + caps for lab in space.labels()])


def _certified(space: GradedSpace, T: int, window: int, caps: int) -> int:
    """Weight below which every component is pinned by the window."""
    if space.complete:
        return INF
    return T + window - caps


def _reconstruct_components(
    state: Mapping[tuple, Vec],
    *,
    space: GradedSpace,
    nvars: int,
    region: tuple,
    pairs: Mapping[tuple[int, int], int],
    total_weight: int,
    window: int,
    allow_partial: bool,
    what: str,
    affine: Sequence[Mapping[int, int]] | None = None,
    out_pairs: Mapping[tuple[int, int], int] | None = None,
) -> dict[Label, PoleRational]:
    """Reconstruct every dual-basis component of an assembled state.

    With ``affine`` the state lives in auxiliary coordinates and the
    result is a function of the listed physical forms with out_pairs as
    its diagonal table; otherwise the state's variables are the
    function's variables.  A component needing more window than we have
    raises UnderdeterminedError, or is skipped under allow_partial (the
    caller records the certified weight).
    """
    if affine is None:
        out_pairs = pairs
    assert out_pairs is not None
    caps = sum(out_pairs.values())
    comps: dict[Label, PoleRational] = {}
    for wp_lab in space.labels():
        tau = space.weight(wp_lab) - total_weight
        d = tau + caps
        comp = {m: vec[wp_lab] for m, vec in state.items() if vec.get(wp_lab)}
        if d < 0 or not comp:
            s = TruncatedLaurent(nvars, region, comp, window, max(caps, -tau, 0))
            if not s.is_zero_on_window():
                raise InconsistentError(
                    wp_lab, f"{what}: nonzero series where the weight forces zero"
                )
            continue
        if window < d:
            if allow_partial:
                continue
            raise UnderdeterminedError(
                d, window,
                f"{what}: component {wp_lab!r} needs window {d}, have {window}; "
                f"raise the cutoff by {d - window}",
            )
        s = TruncatedLaurent(nvars, region, comp, window, max(caps, -tau, 0))
        if affine is None:
            g = reconstruct(s, pairs, None, d, homogeneous_degree=d)
        else:
            g = reconstruct_affine(s, affine, out_pairs, None, d)
        if not g.is_zero():
            comps[wp_lab] = g
    return comps


# ---------------------------------------------------------------------------
# E-products


def _validate_spec(spec: Sequence[OpSpec]):
    seen_sr = False
    for side, _ in spec:
        if side not in ("L", "sR"):
            raise ValueError(f"sides must be 'L' or 'sR', got {side!r}")
        if side == "sR":
            seen_sr = True
        elif seen_sr:
            raise ValueError("left operators must precede reversed-right operators")


def e_product(
    spec: Sequence[OpSpec],
    w: Vec,
    V: MosvaData,
    W: BimoduleData,
    *,
    allow_partial: bool = False,
) -> WValuedRational:
    """Reconstruct the product of the listed operators applied to w.

    spec pairs a side ("L" or "sR") with an algebra basis label, listed
    left to right; all left operators must precede all reversed-right
    ones.  The base vector must be homogeneous and admit no negative
    modes.  Raises UnderdeterminedError when the module's cutoff cannot
    certify every component (under allow_partial the certifiable ones
    are kept and the bound recorded) and InconsistentError if the series
    fails to be rational within the declared caps (an upstream axiom
    violation), including any disagreement between assembly regions.
    """
    _validate_spec(spec)
    eligible = no_negative_mode_labels(V, W)
    if not set(w) <= eligible:
        raise ValueError(
            f"base vector has negative modes: {sorted(set(w) - eligible, key=str)!r}"
        )
    hw = _base_weight(W.space, w)
    n = len(spec)
    if n == 0:
        comps = {lab: PoleRational(0, {(): c}) for lab, c in w.items()}
        return WValuedRational(0, W.space, comps, {}, hw, ())

    hs = [V.space.weight(u) for _, u in spec]
    T = sum(hs) + hw
    pairs = spec_pair_table(V, W, spec)
    caps = sum(pairs.values())
    window = _finite_window(safe_window(W.space, hw, hs), W.space, T, caps)

    ops = [(side, {u: ONE}) for side, u in spec]
    state = lr_chain_state(V, W, ops, w, window)
    comps = _reconstruct_components(
        state,
        space=W.space,
        nvars=n,
        region=tuple(range(n)),
        pairs=pairs,
        total_weight=T,
        window=window,
        allow_partial=allow_partial,
        what=f"e_product({spec!r})",
    )
    cert = _certified(W.space, T, window, caps)
    result = WValuedRational(n, W.space, comps, pairs, T, tuple(spec), cert)

    # region independence: the reversed-right block may be assembled in
    # front of the left block; both orders must reconstruct identically
    l = sum(1 for side, _ in spec if side == "L")
    if 0 < l < n:
        swapped = list(spec[l:]) + list(spec[:l])
        order = list(range(l, n)) + list(range(l))
        ops2 = [(side, {u: ONE}) for side, u in swapped]
        state2 = lr_chain_state(V, W, ops2, w, window)
        remapped: dict[tuple, Vec] = {}
        for mono, vec in state2.items():
            key = [0] * n
            for pos, var in enumerate(order):
                key[var] = mono[pos]
            remapped[tuple(key)] = vec
        comps2 = _reconstruct_components(
            remapped,
            space=W.space,
            nvars=n,
            region=tuple(order),
            pairs=pairs,
            total_weight=T,
            window=window,
            allow_partial=allow_partial,
            what=f"e_product({spec!r}) swapped order",
        )
        if comps2 != comps:
            raise InconsistentError(
                spec, "assembly regions disagree; operator exchange fails upstream"
            )
    return result


def apply_front_modes(
    op_spec: Sequence[OpSpec],
    f: WValuedRational,
    V: MosvaData,
    W: BimoduleData,
    *,
    pair_to_old: Callable[[Side, Label, int], int] | None = None,
    allow_partial: bool = False,
) -> WValuedRational:
    """Apply further operators in front of an existing function.

    The new operators take the first ``len(op_spec)`` variables and f's
    variables shift up.  Diagonal caps between a new operator and f's
    j-th variable come from ``pair_to_old(side, u, j)``, defaulting to
    the table lookup against f's recorded operator kinds.
    """
    if not op_spec:
        return f
    if pair_to_old is None:
        if f.var_kinds is None or any(k is None for k in f.var_kinds):
            raise ValueError("f does not record its operators; supply pair_to_old")

        def pair_to_old(side: Side, u: Label, j: int) -> int:
            side_j, u_j = f.var_kinds[j]
            return chain_pair_cap(V, W, side, u, side_j, u_j)

    m = len(op_spec)
    n_old = f.nvars
    nvars = m + n_old
    hs = [V.space.weight(u) for _, u in op_spec]
    T = sum(hs) + f.total_weight

    pairs = spec_pair_table(V, W, op_spec)
    for i, (side, u) in enumerate(op_spec):
        for j in range(n_old):
            pairs[(i, m + j)] = pair_to_old(side, u, j)
    for (i, j), p in f.pole_orders.items():
        pairs[(m + i, m + j)] = p
    caps = sum(pairs.values())

    window = safe_window(W.space, f.total_weight, hs)
    if f.certified_weight < INF:
        window = min(window, f.certified_weight - f.total_weight)
    window = _finite_window(window, W.space, T, caps)

    base = expand_components(f, window)
    W.ensure_sr(V)

    def apply(kind, u_lab, k, vec):
        return W.apply_left(u_lab, k, vec) if kind == "L" else W.apply_sr(u_lab, k, vec)

    state = assemble_product(
        [(side, {u: ONE}) for side, u in op_spec],
        base,
        apply_mode=apply,
        op_space=V.space,
        target_space=W.space,
        window=window,
    )
    comps = _reconstruct_components(
        state,
        space=W.space,
        nvars=nvars,
        region=tuple(range(nvars)),
        pairs=pairs,
        total_weight=T,
        window=window,
        allow_partial=allow_partial,
        what=f"apply_front_modes({op_spec!r})",
    )
    kinds = None
    if f.var_kinds is not None and all(k is not None for k in f.var_kinds):
        kinds = tuple(op_spec) + f.var_kinds
    cert = _certified(W.space, T, window, caps)
    return WValuedRational(nvars, W.space, comps, pairs, T, kinds, cert)


# ---------------------------------------------------------------------------
# grouped (inserted-argument) series


def inserted_front_series(
    side: Side,
    inner: Sequence[Label],
    f: WValuedRational,
    V: MosvaData,
    W: BimoduleData,
    *,
    window: int,
    inner_window: int | None = None,
) -> dict[tuple, Vec]:
    """Series of the operator Y(inner-product at offsets, zeta) applied to f.

    The operator argument is the algebra chain Y_V(inner[0], x_1) ...
    Y_V(inner[-1], x_m) applied to the unit; the result is keyed by
    (zeta exponent, x_1 ... x_m exponents, f's variables).  Because f's
    variables may carry negative exponents, the offset block must be
    assembled past the window by f's total pole order; callers pass that
    as inner_window.
    """
    W.ensure_sr(V)
    if inner_window is None:
        inner_window = window
    inner_state = assemble_product(
        [("V", {u: ONE}) for u in inner],
        {(): V.vacuum},
        apply_mode=lambda kind, ul, k, vec: V.apply_mode(ul, k, vec),
        op_space=V.space,
        target_space=V.space,
        window=inner_window,
    )
    base = expand_components(f, window)

    def apply_vec(y_lab, k, vec):
        if side == "L":
            return W.apply_left(y_lab, k, vec)
        return W.apply_sr(y_lab, k, vec)

    out: dict[tuple, Vec] = {}
    for mono_x, y in inner_state.items():
        st = _prepend_op(
            base, y, V.space, apply_vec, W.space, W.space, window - sum(mono_x)
        )
        for key, vec in st.items():
            full = (key[0],) + tuple(mono_x) + key[1:]
            acc = out.setdefault(full, {})
            for lab, c in vec.items():
                s = acc.get(lab, 0) + c
                if s:
                    acc[lab] = s
                else:
                    acc.pop(lab, None)
    return {k: v for k, v in out.items() if v}


def _inserted_front_function(
    side: Side,
    inner: Sequence[Label],
    f: WValuedRational,
    V: MosvaData,
    W: BimoduleData,
    *,
    phys_kinds: Sequence[OpSpec],
    phys_pairs: Mapping[tuple[int, int], int] | None = None,
    allow_partial: bool = False,
) -> WValuedRational:
    """Reconstruct Y(chain at zeta) f as a function of the physical
    variables z_i = zeta + x_i followed by f's variables.

    phys_kinds lists the (side, label) each physical variable pairs as
    against f's variables; phys_pairs gives the caps among the physical
    variables themselves and must reflect the operator order of the flat
    arrangement (for the reversed-right side that order is reversed), by
    default the variable order.
    """
    m = len(inner)
    n_old = f.nvars
    out_nvars = m + n_old

    out_pairs = dict(phys_pairs) if phys_pairs is not None else spec_pair_table(
        V, W, phys_kinds
    )
    for i in range(m):
        for j in range(n_old):
            side_j, u_j = f.var_kinds[j]  # type: ignore[misc]
            out_pairs[(i, m + j)] = chain_pair_cap(
                V, W, phys_kinds[i][0], phys_kinds[i][1], side_j, u_j
            )
    old_pole_total = sum(f.pole_orders.values())
    for (i, j), p in f.pole_orders.items():
        out_pairs[(m + i, m + j)] = p

    hs = [V.space.weight(u) for u in inner]
    T = sum(hs) + f.total_weight
    caps = sum(out_pairs.values())
    window = min(
        safe_window(W.space, f.total_weight, [sum(hs)]),
        safe_window(V.space, 0, hs) - old_pole_total,
    )
    if f.certified_weight < INF:
        window = min(window, f.certified_weight - f.total_weight)
    window = _finite_window(window, W.space, T, caps)

    state = inserted_front_series(
        side, inner, f, V, W, window=window, inner_window=window + old_pole_total
    )
    # coordinates: zeta, x_1 ... x_m, then f's variables
    affine = [{0: 1, 1 + i: 1} for i in range(m)]
    affine += [{1 + m + j: 1} for j in range(n_old)]
    comps = _reconstruct_components(
        state,
        space=W.space,
        nvars=1 + m + n_old,
        region=tuple(range(1 + m + n_old)),
        pairs={},
        total_weight=T,
        window=window,
        allow_partial=allow_partial,
        what=f"inserted {side} chain {inner!r}",
        affine=affine,
        out_pairs=out_pairs,
    )
    cert = _certified(W.space, T, window, caps)
    return WValuedRational(
        out_nvars, W.space, comps, out_pairs, T, tuple(phys_kinds), cert
    )


# ---------------------------------------------------------------------------
# checks


def _eligible_bases(V: MosvaData, W: BimoduleData) -> list[Label]:
    return sorted(
        no_negative_mode_labels(V, W), key=lambda lab: (W.space.weight(lab), str(lab))
    )


def _gate(max_total_weight, *weights) -> bool:
    return max_total_weight is not None and sum(weights) > max_total_weight


def _run_instance(rep: Report, key: str, describe: str, floor: int, fn):
    """One law instance: fn builds the two sides; compare them up to the
    smaller certified weight, skipping when nothing is certified."""
    try:
        lhs, rhs = fn()
    except UnderdeterminedError:
        rep.record(f"{key}-skipped-window")
        return
    except InconsistentError as exc:
        rep.require(False, f"{describe}: {exc}", key)
        return
    wc = min(lhs.certified_weight, rhs.certified_weight)
    if wc < floor:
        rep.record(f"{key}-skipped-window")
        return
    rep.require(lhs.restrict_weight(wc) == rhs.restrict_weight(wc), describe, key)
    if wc < INF:
        rep.record(f"{key}-partial")


def check_extended_associativity(
    V: MosvaData,
    W: BimoduleData,
    *,
    max_ops: int = 3,
    max_total_weight: int | None = None,
) -> Report:
    """Exchange and regrouping laws for operator products, as equalities
    of reconstructed functions, on basis instances of at most max_ops
    operators."""
    rep = Report(f"extended-associativity[{W.name} over {V.name}]")
    floor = W.space.min_weight()
    vlabels = V.space.labels()
    bases = _eligible_bases(V, W)
    wt = V.space.weight

    def f_specs(budget: int):
        yield []
        if budget >= 1:
            for u in vlabels:
                yield [("L", u)]
                yield [("sR", u)]
        if budget >= 2:
            for u1, u2 in iproduct(vlabels, repeat=2):
                for shape in (("L", "L"), ("L", "sR"), ("sR", "sR")):
                    yield [(shape[0], u1), (shape[1], u2)]

    # part (1): exchange of a left and a reversed-right operator
    for w_lab in bases:
        hw = W.space.weight(w_lab)
        for fs in f_specs(max_ops - 2):
            for u1, u2 in iproduct(vlabels, repeat=2):
                if _gate(max_total_weight, hw, wt(u1), wt(u2), *(wt(u) for _, u in fs)):
                    rep.record("exchange-skipped-weight")
                    continue

                def exchange(fs=fs, u1=u1, u2=u2, w_lab=w_lab):
                    f = e_product(fs, {w_lab: ONE}, V, W, allow_partial=True)
                    lhs = apply_front_modes(
                        [("L", u1), ("sR", u2)], f, V, W, allow_partial=True
                    )
                    rhs = apply_front_modes(
                        [("sR", u2), ("L", u1)], f, V, W, allow_partial=True
                    )
                    swap = [1, 0] + list(range(2, 2 + f.nvars))
                    return lhs, rhs.permute_vars(swap)

                _run_instance(
                    rep, "exchange",
                    f"exchange fails at (u1={u1!r}, u2={u2!r}, f={fs!r}, w={w_lab!r})",
                    floor, exchange,
                )

    # parts (2) and (3): regrouping a block through the algebra's product
    for part, side in (("front-assoc-left", "L"), ("front-assoc-right", "sR")):
        for w_lab in bases:
            hw = W.space.weight(w_lab)
            for m in range(1, max_ops + 1):
                for fs in f_specs(max_ops - m):
                    for us in iproduct(vlabels, repeat=m):
                        if _gate(
                            max_total_weight, hw, *(wt(u) for u in us),
                            *(wt(u) for _, u in fs),
                        ):
                            rep.record(f"{part}-skipped-weight")
                            continue

                        def grouped(fs=fs, us=us, w_lab=w_lab, side=side):
                            f = e_product(fs, {w_lab: ONE}, V, W, allow_partial=True)
                            mm = len(us)
                            if side == "L":
                                flat = [("L", u) for u in us]
                                lhs = apply_front_modes(
                                    flat, f, V, W, allow_partial=True
                                )
                                phys_pairs = None
                            else:
                                flat = [("sR", u) for u in us]
                                lhs = apply_front_modes(
                                    list(reversed(flat)), f, V, W, allow_partial=True
                                )
                                perm = list(reversed(range(mm))) + list(
                                    range(mm, mm + f.nvars)
                                )
                                lhs = lhs.permute_vars(perm)
                                # flat operator order is reversed here, so the
                                # cap for (z_i, z_j), i < j, pairs u_j acting
                                # after u_i
                                phys_pairs = {
                                    (i, j): chain_pair_cap(
                                        V, W, "sR", us[j], "sR", us[i]
                                    )
                                    for i in range(mm)
                                    for j in range(i + 1, mm)
                                }
                            rhs = _inserted_front_function(
                                side, list(us), f, V, W,
                                phys_kinds=flat, phys_pairs=phys_pairs,
                                allow_partial=True,
                            )
                            return lhs, rhs

                        _run_instance(
                            rep, part,
                            f"regrouping fails at (side={side}, us={us!r}, "
                            f"f={fs!r}, w={w_lab!r})",
                            floor, grouped,
                        )
    return rep


def insertion_series_check(
    V: MosvaData,
    W: BimoduleData,
    *,
    max_total_weight: int | None = None,
) -> Report:
    """A two-operator product argument inserted into the first slot of a
    product agrees with the flat product (operator count up to three)."""
    rep = Report(f"insertion[{W.name} over {V.name}]")
    floor = W.space.min_weight()
    vlabels = V.space.labels()
    bases = _eligible_bases(V, W)
    wt = V.space.weight

    shapes: list[tuple[str, list[OpSpec]]] = [("L", [])]
    for u3 in vlabels:
        shapes.append(("L", [("L", u3)]))
        shapes.append(("L", [("sR", u3)]))
    # the mirrored single-slot case
    shapes.append(("sR", []))

    for w_lab in bases:
        hw = W.space.weight(w_lab)
        for u1, u2 in iproduct(vlabels, repeat=2):
            for side, rest in shapes:
                if _gate(
                    max_total_weight, hw, wt(u1), wt(u2), *(wt(u) for _, u in rest)
                ):
                    rep.record("insertion-skipped-weight")
                    continue

                def inserted(side=side, rest=rest, u1=u1, u2=u2, w_lab=w_lab):
                    f = e_product(rest, {w_lab: ONE}, V, W, allow_partial=True)
                    if side == "L":
                        flat_spec = [("L", u1), ("L", u2)] + list(rest)
                        flat = e_product(
                            flat_spec, {w_lab: ONE}, V, W, allow_partial=True
                        )
                        got = _inserted_front_function(
                            "L", [u1, u2], f, V, W,
                            phys_kinds=flat_spec[:2], allow_partial=True,
                        )
                    else:
                        # reversed-right flat product carries the outermost
                        # operator at the last variable
                        flat = e_product(
                            [("sR", u2), ("sR", u1)], {w_lab: ONE}, V, W,
                            allow_partial=True,
                        )
                        got = _inserted_front_function(
                            "sR", [u1, u2], f, V, W,
                            phys_kinds=[("sR", u1), ("sR", u2)],
                            phys_pairs={
                                (0, 1): chain_pair_cap(V, W, "sR", u2, "sR", u1)
                            },
                            allow_partial=True,
                        )
                        got = got.permute_vars([1, 0])
                    return flat, got

                _run_instance(
                    rep, "insertion",
                    f"insertion fails at (side={side}, u1={u1!r}, u2={u2!r}, "
                    f"rest={rest!r}, w={w_lab!r})",
                    floor, inserted,
                )
    return rep
