"""Assembly of iterated vertex-operator series with certified windows.

A product Op_1(z_1) Op_2(z_2) ... Op_r(z_r) w is computed right to left:
the state after applying the last j operators is a sparse map

    exponent tuple (of z_{r-j+1}, ..., z_r)  ->  vector

and each further operator contributes one more variable on the left.
The assembly region is z_1 >> z_2 >> ... >> z_r (region tuple
(0, 1, ..., r-1) in ratfun terms).

Truncated spaces force a window: an intermediate vector of weight above
the space's coverage is unknown, so monomials whose suffix sums exceed

    C_eff = coverage - max over suffixes j of (wt w + sum_{i>=j} wt u_i)

cannot be trusted.  ``safe_window`` computes that bound; the assembly
itself prunes every intermediate to the coverage and every monomial to
the requested window, which keeps the state small and, for any window
<= C_eff, provably complete (absent monomial = zero coefficient).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .graded import GradedSpace, Vec, vec_weight_split
from .ratfun import INF, Mono, TruncatedLaurent, wdeg

# an operator in a chain: (kind, u) where u is a vector of the acting
# space and kind tells the mode map to use ("V", "L", "sR", ...)
OpSpec = tuple[str, Vec]

# apply_mode(kind, u_label, n, vec) -> Vec
ModeApplier = Callable[[str, object, int, Vec], Vec]


def coverage_of(space: GradedSpace) -> int:
    return INF if space.complete else space.cutoff


def max_intermediate_weight(space: GradedSpace) -> int:
    """Largest weight an intermediate vector may carry and stay exact."""
    return space.max_weight() if space.complete else space.cutoff


def safe_window(
    space: GradedSpace,
    base_max_weight: int,
    op_weights: Sequence[int],
) -> int:
    """Largest window the chain can certify in the given space.

    op_weights are listed left to right; the j-th intermediate weight is
    wt(base) + (suffix sum of op weights) + (suffix exponent sum), and
    the suffix exponent sum of a kept monomial is at most the window.
    """
    if space.complete:
        return INF
    worst = base_max_weight
    suffix = base_max_weight
    for h in reversed(op_weights):
        suffix += h
        worst = max(worst, suffix)
    return space.cutoff - worst


def vec_weight(space: GradedSpace, u: Vec) -> int:
    """Weight of a homogeneous vector (raises on mixed weights)."""
    ws = {space.weight(lab) for lab in u}
    if len(ws) != 1:
        raise ValueError(f"vector is not homogeneous: weights {sorted(ws)}")
    return ws.pop()


def assemble_product(
    ops: Sequence[OpSpec],
    base_state: Mapping[Mono, Vec],
    *,
    apply_mode: ModeApplier,
    op_space: GradedSpace,
    target_space: GradedSpace,
    window: int,
) -> dict[Mono, Vec]:
    """Apply the chain of operators to a state, right to left.

    base_state maps exponent tuples of the existing variables to vectors
    of target_space; each operator prepends one variable.  The result is
    complete for monomials with suffix sums <= window provided the caller
    chose window <= safe_window(...) for the whole chain (existing
    variables included in the suffix order, after the new ones).
    """
    region_len = len(next(iter(base_state), ())) if base_state else 0
    max_w = max_intermediate_weight(target_space)
    min_w = target_space.min_weight()

    def prune(state: dict[Mono, Vec], rl: int) -> dict[Mono, Vec]:
        out: dict[Mono, Vec] = {}
        for mono, vec in state.items():
            if wdeg(mono, tuple(range(rl))) > window:
                continue
            if vec:
                out[mono] = vec
        return out

    state = prune({tuple(m): dict(v) for m, v in base_state.items()}, region_len)
    for kind, u in reversed(list(ops)):
        new_state: dict[Mono, Vec] = {}
        for u_lab, u_coef in u.items():
            h = op_space.weight(u_lab)
            for mono, vec in state.items():
                for omega, comp in vec_weight_split(target_space, vec).items():
                    # result weight omega + h - n - 1 must land in [min_w, max_w]
                    n_hi = omega + h - 1 - min_w
                    n_lo = omega + h - 1 - max_w
                    for n in range(n_lo, n_hi + 1):
                        img = apply_mode(kind, u_lab, n, comp)
                        if not img:
                            continue
                        key = (-n - 1,) + mono
                        acc = new_state.setdefault(key, {})
                        for lab, c in img.items():
                            s = acc.get(lab, 0) + u_coef * c
                            if s:
                                acc[lab] = s
                            else:
                                acc.pop(lab, None)
        region_len += 1
        state = prune(new_state, region_len)
    return state


def state_component(state: Mapping[Mono, Vec], label) -> dict[Mono, Fraction]:
    """Extract the coefficient series of one target basis label."""
    out = {}
    for mono, vec in state.items():
        c = vec.get(label)
        if c:
            out[mono] = c
    return out


def state_to_series(
    state: Mapping[Mono, Vec],
    label,
    nvars: int,
    window: int,
    neg: int,
) -> TruncatedLaurent:
    return TruncatedLaurent(
        nvars, tuple(range(nvars)), state_component(state, label), window, neg
    )
