"""Cohomology dimensions from exact rational linear algebra.

Two regimes, one reporting surface:

* Weight zero.  Every cochain is a constant multilinear map, so each
  degree is finite dimensional with basis indexed by argument tuples and
  module labels.  The coboundary matrices are read off columnwise by
  running basis cochains through the same circle operations used
  everywhere else, and consecutive matrices are checked to compose to
  zero exactly.

* Graded.  The full complex has no finite basis, but the degree-one
  slice does once the spaces are truncated: a one-variable value at a
  pair (argument label, component label) is a single monomial pinned by
  homogeneity, and pairs that would need a negative power are excluded
  because values carry no pole at the origin.  The shift properties
  become linear constraints on the monomial coefficients, derivation
  cochains are the kernel of the coboundary matrix on the constrained
  space, and inner ones are the image of the degree-zero coboundary.
  Dimensions from this path are relative to the truncation; the
  monotonicity probe rebuilds everything one weight higher and reports
  whether they moved, it does not claim they will not.

A bar-complex oracle, written directly against structure constants and
sharing none of the machinery above, cross-checks the weight-zero
dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Sequence

from .algebra import MosvaData
from .bimodule import BimoduleData
from .cochain import (
    Cochain,
    argument_pair_cap,
    coboundary,
    coboundary0,
    constant_cochain,
    vacuum_like_basis,
    weight_bounded_tuples,
)
from .ratfun import INF, PoleRational, p_mul, p_sub, p_var
from .scalars import Matrix, rank_kernel_image, solve
from .wvalued import WValuedRational

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# bar-complex oracle on raw structure constants


def _bar_basis(dim_a: int, dim_m: int, k: int) -> list[tuple[tuple[int, ...], int]]:
    return [(t, m) for t in product(range(dim_a), repeat=k) for m in range(dim_m)]


def _bar_matrix(A, left, right, k: int) -> Matrix:
    """Matrix of the classical differential from k-linear to (k+1)-linear
    maps into the bimodule, in the indicator basis."""
    dim_a = len(A)
    dim_m = len(left[0])
    dom = _bar_basis(dim_a, dim_m, k)
    cod = _bar_basis(dim_a, dim_m, k + 1)
    dom_index = {key: i for i, key in enumerate(dom)}
    rows = [[ZERO] * len(dom) for _ in cod]
    row = 0
    for s in product(range(dim_a), repeat=k + 1):
        for p in range(dim_m):
            out = rows[row]
            for m in range(dim_m):
                c = left[s[0]][m][p]
                if c:
                    out[dom_index[(s[1:], m)]] += c
                c = right[s[k]][m][p]
                if c:
                    out[dom_index[(s[:k], m)]] += c * (-ONE) ** (k + 1)
            for i in range(1, k + 1):
                for b, cb in enumerate(A[s[i - 1]][s[i]]):
                    if cb:
                        t = s[: i - 1] + (b,) + s[i + 1 :]
                        out[dom_index[(t, p)]] += cb * (-ONE) ** i
            row += 1
    return Matrix(rows)


def _check_associative(A) -> None:
    dim = len(A)
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                for q in range(dim):
                    lhs = sum(A[i][j][p] * A[p][k][q] for p in range(dim))
                    rhs = sum(A[j][k][p] * A[i][p][q] for p in range(dim))
                    if lhs != rhs:
                        raise ValueError(
                            f"structure constants are not associative at "
                            f"({i}, {j}, {k})"
                        )


def _check_bimodule(A, left, right) -> None:
    dim_a = len(A)
    dim_m = len(left[0])
    rng = range(dim_m)
    for i in range(dim_a):
        for j in range(dim_a):
            for m in rng:
                for p in rng:
                    two_left = sum(left[j][m][q] * left[i][q][p] for q in rng)
                    via_prod = sum(A[i][j][b] * left[b][m][p] for b in range(dim_a))
                    if two_left != via_prod:
                        raise ValueError("left action is not associative")
                    two_right = sum(right[i][m][q] * right[j][q][p] for q in rng)
                    via_prod = sum(A[i][j][b] * right[b][m][p] for b in range(dim_a))
                    if two_right != via_prod:
                        raise ValueError("right action is not associative")
                    mixed = sum(left[i][m][q] * right[j][q][p] for q in rng)
                    other = sum(right[j][m][q] * left[i][q][p] for q in rng)
                    if mixed != other:
                        raise ValueError("left and right actions do not commute")


def hochschild_oracle(A, M, n: int) -> int:
    """Degree-n Hochschild cohomology dimension of an associative algebra
    with coefficients in a bimodule, from the bar complex.

    A[i][j] lists the coordinates of the product of basis elements i and
    j; M is a pair (left, right) with left[i][m] the coordinates of the
    i-th algebra element acting on the m-th module element and
    right[j][m] those of the action from the other side.  Everything is
    built from these tables alone, so the result is an independent check
    on the cochain complex, not a restatement of it.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    A = [[[Fraction(c) for c in col] for col in row] for row in A]
    left, right = M
    left = [[[Fraction(c) for c in col] for col in row] for row in left]
    right = [[[Fraction(c) for c in col] for col in row] for row in right]
    _check_associative(A)
    _check_bimodule(A, left, right)
    d_n = _bar_matrix(A, left, right, n)
    _, ker, _ = rank_kernel_image(d_n)
    if n == 0:
        return len(ker)
    d_prev = _bar_matrix(A, left, right, n - 1)
    if not d_n.mul(d_prev).is_zero():
        raise ArithmeticError("bar differential does not square to zero")
    rank_prev, _, _ = rank_kernel_image(d_prev)
    return len(ker) - rank_prev


def weight_zero_constants(V: MosvaData, W: BimoduleData):
    """Structure constants of a weight-zero fixture in oracle form.

    Returns (A, (left, right)) over the label orders of the two spaces.
    Only the single surviving mode enters; this is input extraction, the
    oracle itself never touches the graded machinery.
    """
    if V.space.max_weight() != 0 or W.space.max_weight() != 0:
        raise ValueError("oracle form needs all weights zero")
    va = V.space.labels()
    vm = W.space.labels()
    mi = {lab: i for i, lab in enumerate(vm)}

    def coords(vec, index, size):
        out = [ZERO] * size
        for lab, c in vec.items():
            out[index[lab]] = Fraction(c)
        return out

    ai = {lab: i for i, lab in enumerate(va)}
    A = [
        [coords(V.apply_mode(u, -1, {v: ONE}), ai, len(va)) for v in va]
        for u in va
    ]
    left = [
        [coords(W.apply_left(u, -1, {m: ONE}), mi, len(vm)) for m in vm]
        for u in va
    ]
    right = [
        [coords(W.right_image(m, -1, u), mi, len(vm)) for m in vm]
        for u in va
    ]
    return A, (left, right)


# ---------------------------------------------------------------------------
# slices of the cochain complex


@dataclass
class ComplexSlice:
    """One degree of the complex, with its outgoing coboundary matrix.

    keys index the ambient coordinate space of the degree; basis, when
    present, lists coordinate vectors spanning the actual cochain space
    inside it (the graded degree-one slice is cut out by the shift
    constraints), and None means the ambient space itself.  delta maps
    basis coordinates to the next degree's coordinates; rank and
    kernel_dim are its exact invariants.
    """

    degree: int
    keys: list
    basis: list[list[Fraction]] | None
    delta: Matrix
    rank: int
    kernel_dim: int
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis) if self.basis is not None else len(self.keys)


@dataclass
class CohomologyReport:
    """Per-degree kernel, incoming-image, and cohomology dimensions."""

    kernels: dict[int, int]
    images: dict[int, int]
    dims: dict[int, int]

    def describe(self) -> str:
        lines = []
        for n in sorted(self.dims):
            lines.append(
                f"degree {n}: kernel {self.kernels[n]}, "
                f"image {self.images[n]}, cohomology {self.dims[n]}"
            )
        return "\n".join(lines)


def cohomology_dims(slices: Sequence[ComplexSlice]) -> CohomologyReport:
    """Assemble cohomology dimensions from consecutive slices.

    The dimension at each degree is the kernel of the outgoing matrix
    minus the rank of the incoming one; a negative difference means the
    matrices do not form a complex and is an error, not a result.
    """
    by_deg = {s.degree: s for s in slices}
    kernels: dict[int, int] = {}
    images: dict[int, int] = {}
    dims: dict[int, int] = {}
    for n in sorted(by_deg):
        s = by_deg[n]
        prev = by_deg.get(n - 1)
        im = prev.rank if prev is not None else 0
        h = s.kernel_dim - im
        if h < 0:
            raise ArithmeticError(
                f"degree {n}: image {im} exceeds kernel {s.kernel_dim}; "
                f"the matrices do not compose to zero"
            )
        kernels[n], images[n], dims[n] = s.kernel_dim, im, h
    return CohomologyReport(kernels, images, dims)


# ---------------------------------------------------------------------------
# weight zero: the full complex, columnwise


def _weight_zero_keys(V: MosvaData, W: BimoduleData, degree: int) -> list:
    labs = W.space.labels()
    return [
        (t, lab)
        for t in weight_bounded_tuples(V.space, degree, 0)
        for lab in labs
    ]


def _constant_coords(value, keys_index: Mapping, t, column, col: int) -> None:
    zero_mono = (0,) * value.nvars
    if value.certified_weight < INF:
        raise ArithmeticError("weight-zero coboundary column is not fully pinned")
    for lab in value.space.labels():
        g = value.component(lab)
        if g.num:
            column[keys_index[(t, lab)]][col] = g.num[zero_mono]


def _weight_zero_complex(V: MosvaData, W: BimoduleData, n_max: int) -> list[ComplexSlice]:
    keys = {n: _weight_zero_keys(V, W, n) for n in range(1, n_max + 2)}
    index = {n: {key: i for i, key in enumerate(ks)} for n, ks in keys.items()}

    slices: list[ComplexSlice] = []
    wl = vacuum_like_basis(V, W)
    rows0 = [[ZERO] * len(wl) for _ in keys[1]]
    for col, w in enumerate(wl):
        d0 = coboundary0(w, V, W)
        for t in d0.tuples():
            _constant_coords(d0.value(t), index[1], t, rows0, col)
    m0 = Matrix(rows0)
    rank0, ker0, _ = rank_kernel_image(m0)
    key0 = [tuple(sorted(w.vec.items(), key=str)) for w in wl]
    slices.append(ComplexSlice(0, key0, None, m0, rank0, len(ker0)))

    for n in range(1, n_max + 1):
        rows = [[ZERO] * len(keys[n]) for _ in keys[n + 1]]
        for col, (t, lab) in enumerate(keys[n]):
            phi = constant_cochain(V, W, n, {t: {lab: ONE}}, INF)
            dphi = coboundary(phi)
            for t2 in dphi.tuples():
                _constant_coords(dphi.value(t2), index[n + 1], t2, rows, col)
        m = Matrix(rows)
        if not m.mul(slices[-1].delta).is_zero():
            raise ArithmeticError(
                f"coboundary matrices at degrees {n - 1} and {n} do not "
                f"compose to zero"
            )
        rank, ker, _ = rank_kernel_image(m)
        slices.append(ComplexSlice(n, keys[n], None, m, rank, len(ker)))
    return slices


# ---------------------------------------------------------------------------
# graded: the degree-one slice at the spaces' truncation


def _pair_power(k: int) -> dict:
    """Numerator polynomial (first variable minus second) to the power k."""
    out = p_sub(p_var(2, 0), p_var(2, 1))
    acc = {(0, 0): ONE}
    for _ in range(k):
        acc = p_mul(acc, out)
    return acc


def _iota_fit_matrix(p: int, d: int, B: int) -> Matrix:
    """Expansion coefficients of bounded-pole forms on a coefficient window.

    Column j is the second-variable coefficient profile, on powers 0..B,
    of (first - second)^(-p) times the degree-d numerator monomial with
    second-variable exponent j.  A series fits some such form exactly
    when it lies in the column span.
    """
    rows = []
    for b in range(B + 1):
        row = []
        for j in range(d + 1):
            if b < j:
                row.append(ZERO)
            elif p == 0:
                row.append(ONE if b == j else ZERO)
            else:
                row.append(Fraction(comb(p - 1 + b - j, b - j)))
        rows.append(row)
    return Matrix(rows)


def _front_constraints(V: MosvaData, W: BimoduleData, cands: list) -> list[dict]:
    """Linear conditions making every stored front action of a candidate
    a rational function with its poles on the allowed diagonal.

    The shift properties alone do not grant this: an operator acting in
    front of an arbitrary monomial family produces a series that need
    not fit any bounded-pole form, and the assembly engine would reject
    such a candidate as inconsistent rather than quietly truncate it.
    The windows and caps here mirror the engine's exactly, so a
    candidate passing these rows assembles cleanly everywhere the engine
    trusts its data.
    """
    wt_v = V.space.weight
    wt_w = W.space.weight
    vmax = V.space.max_weight()
    wmax = W.space.max_weight()
    cand_index = {key: i for i, key in enumerate(cands)}
    W.ensure_sr(V)
    rows: list[dict] = []

    def action(side, u, n, lab):
        if side == "L":
            return W.left_image(u, n, lab)
        return W.apply_sr(u, n, {lab: ONE})

    for u in V.space.labels():
        for v in V.space.labels():
            if wt_v(u) + wt_v(v) > vmax:
                continue
            B = wmax - wt_v(v) - wt_v(u)
            if B < 0:
                continue
            p = argument_pair_cap(V, W, u, v)
            for side in ("L", "sR"):
                # the weight rule leaves one mode per (source, component)
                # pair, so each power contributes one row of coefficients
                for mu in W.space.labels():
                    tau = wt_w(mu) - wt_v(u) - wt_v(v)
                    d = tau + p
                    if d > B:
                        continue
                    coeff_rows: list[dict] = []
                    for b in range(B + 1):
                        row: dict = {}
                        for lab in W.space.labels_of_weight(wt_v(v) + b):
                            if (v, lab) not in cand_index:
                                continue
                            n = wt_v(u) + wt_w(lab) - wt_w(mu) - 1
                            c = action(side, u, n, lab).get(mu)
                            if c:
                                row[(v, lab)] = row.get((v, lab), ZERO) + c
                        coeff_rows.append(row)
                    if not any(coeff_rows):
                        continue
                    if d < 0:
                        rows.extend(r for r in coeff_rows if r)
                        continue
                    fit = _iota_fit_matrix(p, d, B)
                    fit_t = Matrix([fit.column(j) for j in range(fit.ncols)])
                    _, null, _ = rank_kernel_image(fit_t)
                    for nv in null:
                        combined: dict = {}
                        for b, nb in enumerate(nv):
                            if nb:
                                for key, c in coeff_rows[b].items():
                                    combined[key] = combined.get(key, ZERO) + nb * c
                        combined = {k: c for k, c in combined.items() if c}
                        if combined:
                            rows.append(combined)
    return rows
    """Linear conditions the two shift properties impose on the monomial
    coefficients of a degree-one cochain."""
    cand_index = {key: i for i, key in enumerate(cands)}
    wt_v = V.space.weight
    wt_w = W.space.weight
    vmax = V.space.max_weight()
    rows: list[list[Fraction]] = []

    def new_row():
        rows.append([ZERO] * len(cands))
        return rows[-1]

    for v in V.space.labels():
        # value at the shifted argument = coordinate derivative of the value;
        # at the top weight the shifted argument is not stored, so there is
        # nothing to compare
        if V.space.complete or wt_v(v) + 1 <= vmax:
            col = V.d.columns.get(v, {})
            for lab in W.space.labels():
                if wt_w(lab) < wt_v(v) + 1:
                    continue
                row = new_row()
                for b, c in col.items():
                    row[cand_index[(b, lab)]] += c
                row[cand_index[(v, lab)]] -= wt_w(lab) - wt_v(v)
        # module shift of the value = coordinate derivative; components the
        # shift would push past the truncation are simply absent, so every
        # stored row is complete
        for mu in W.space.labels():
            if wt_w(mu) < wt_v(v) + 1:
                continue
            row = new_row()
            for lab in W.space.labels_of_weight(wt_w(mu) - 1):
                c = W.d.columns.get(lab, {}).get(mu)
                if c and wt_w(lab) >= wt_v(v):
                    row[cand_index[(v, lab)]] += c
            row[cand_index[(v, mu)]] -= wt_w(mu) - wt_v(v)
    return Matrix(rows) if rows else Matrix.zeros(0, len(cands))


def monomial_cochain(V: MosvaData, W: BimoduleData, coeffs: Mapping,
                     declared_m: int = 1) -> Cochain:
    """Degree-one cochain from monomial coefficients keyed by
    (argument label, component label) pairs.

    Homogeneity fixes each component to a single power, so the
    coefficients are the whole function.  The claim that one level of
    composition is available is structural: in the truncated model every
    insertion is a finite exact computation and the engine certifies or
    skips each output weight on its own.
    """
    wt_v = V.space.weight
    wt_w = W.space.weight
    cert = INF if W.space.complete else W.space.max_weight()
    vals = {}
    for (v,) in weight_bounded_tuples(V.space, 1, V.space.max_weight()):
        comps = {}
        for lab in W.space.labels():
            c = coeffs.get((v, lab), ZERO)
            if c:
                d = wt_w(lab) - wt_v(v)
                if d < 0:
                    raise ValueError(
                        f"coefficient at ({v!r}, {lab!r}) would need a pole "
                        f"at the origin"
                    )
                comps[lab] = PoleRational.monomial(1, (d,), c)
        vals[(v,)] = WValuedRational(1, W.space, comps, {}, wt_v(v), None, cert)
    return Cochain(1, V, W, vals, declared_m, V.space.max_weight())


def _graded_degree_one(V: MosvaData, W: BimoduleData) -> list[ComplexSlice]:
    wt_v = V.space.weight
    wt_w = W.space.weight
    vmax = V.space.max_weight()
    cands = [
        (v, lab)
        for v in V.space.labels()
        for lab in W.space.labels()
        if wt_w(lab) >= wt_v(v)
    ]
    constraints = _shift_constraints(V, W, cands)
    _, basis, _ = rank_kernel_image(constraints)

    # outgoing coboundary of each basis cochain, flattened over a common
    # denominator; only component weights certified in every column enter
    images = []
    for vec in basis:
        phi = monomial_cochain(V, W, {k: c for k, c in zip(cands, vec) if c})
        images.append(coboundary(phi, out_upto=vmax, allow_partial=True))
    floors: dict = {}
    skipped = 0
    if images:
        for t in images[0].tuples():
            floors[t] = min(im.value(t).certified_weight for im in images)
            skipped += sum(
                1 for lab in W.space.labels() if wt_w(lab) > floors[t]
            )
    entries: list[dict] = [dict() for _ in images]
    row_keys: list = []
    row_index: dict = {}
    for col, im in enumerate(images):
        for t in im.tuples():
            cap = argument_pair_cap(V, W, t[0], t[1])
            val = im.value(t)
            for lab in W.space.labels():
                if wt_w(lab) > floors[t]:
                    continue
                g = val.component(lab)
                if not g.num:
                    continue
                p = g.pair_orders.get((0, 1), 0)
                num = p_mul(g.num, _pair_power(cap - p)) if cap > p else g.num
                for mono, c in num.items():
                    key = (t, lab, mono)
                    if key not in row_index:
                        row_index[key] = len(row_keys)
                        row_keys.append(key)
                    entries[col][row_index[key]] = entries[col].get(
                        row_index[key], ZERO
                    ) + c
    rows = [[ZERO] * len(basis) for _ in row_keys]
    for col, ent in enumerate(entries):
        for r, c in ent.items():
            rows[r][col] = c
    delta1 = Matrix(rows) if row_keys else Matrix.zeros(0, len(basis))
    rank1, ker1, _ = rank_kernel_image(delta1)

    # inner cochains: degree-zero coboundaries of the shift-killed
    # weight-zero vectors, expressed in the constrained basis
    wl = vacuum_like_basis(V, W)
    cand_index = {key: i for i, key in enumerate(cands)}
    span = Matrix.from_columns(basis) if basis else Matrix.zeros(len(cands), 0)
    inner_cols = []
    for w in wl:
        d0 = coboundary0(w, V, W, arg_upto=vmax)
        y = [ZERO] * len(cands)
        for (v,) in d0.tuples():
            val = d0.value((v,))
            if val.certified_weight < (INF if W.space.complete else W.space.max_weight()):
                raise ArithmeticError(
                    "degree-zero coboundary is not pinned through the truncation"
                )
            for lab in W.space.labels():
                g = val.component(lab)
                if g.num:
                    y[cand_index[(v, lab)]] = g.num[(wt_w(lab) - wt_v(v),)]
        coords, _ = solve(span, y)
        if coords is None:
            raise ArithmeticError(
                "an inner cochain escapes the constrained degree-one space"
            )
        if any(c != 0 for c in delta1.apply(coords)):
            raise ArithmeticError(
                "coboundary of an inner cochain is nonzero at the matrix level"
            )
        inner_cols.append(coords)
    delta0 = (
        Matrix.from_columns(inner_cols)
        if inner_cols
        else Matrix.zeros(len(basis), 0)
    )
    rank0, ker0, _ = rank_kernel_image(delta0)
    key0 = [tuple(sorted(w.vec.items(), key=str)) for w in wl]

    meta = {"cutoff": vmax, "skipped_components": skipped}
    return [
        ComplexSlice(0, key0, None, delta0, rank0, len(ker0), dict(meta)),
        ComplexSlice(1, cands, basis, delta1, rank1, len(ker1), dict(meta)),
    ]


# ---------------------------------------------------------------------------
# entry points


def build_complex(V: MosvaData, W: BimoduleData, n_max: int,
                  cutoff: int | None = None) -> list[ComplexSlice]:
    """Slices of the cochain complex through degree n_max.

    Weight-zero data gets the full finite complex.  Graded data gets the
    degree-one slice only, the one degree whose truncated cochain space
    is finite dimensional; asking higher is an error rather than a
    partial answer.  The truncation is the one baked into the spaces;
    passing a different cutoff here is rejected so that a report can
    never mix weights from two models.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if cutoff is not None and cutoff != V.space.max_weight():
        raise ValueError(
            f"the spaces are truncated at {V.space.max_weight()}; rebuild the "
            f"fixture to change that"
        )
    if V.space.max_weight() == 0 and W.space.max_weight() == 0:
        return _weight_zero_complex(V, W, n_max)
    if n_max > 1:
        raise ValueError(
            "graded data only has a finite degree-one slice; higher degrees "
            "have no finite basis to put in a matrix"
        )
    slices = _graded_degree_one(V, W)
    return slices[: n_max + 1]


def derivations_and_inner(V: MosvaData, W: BimoduleData) -> tuple[int, int]:
    """Dimensions of the derivation-like degree-one cocycles and of the
    inner ones among them."""
    slices = build_complex(V, W, 1)
    return slices[1].kernel_dim, slices[0].rank


def first_cohomology(V: MosvaData, W: BimoduleData) -> int:
    der, inner = derivations_and_inner(V, W)
    return der - inner


def monotonicity_probe(
    make_pair: Callable[[int], tuple[MosvaData, BimoduleData]], cutoff: int
) -> dict:
    """Rebuild the degree-one slice one truncation step higher.

    Returns both dimension triples and whether they agree; agreement is
    evidence of stability, not a proof, and the caller is expected to
    report it as such.
    """
    out: dict = {}
    for key, c in (("at", cutoff), ("above", cutoff + 1)):
        V, W = make_pair(c)
        der, inner = derivations_and_inner(V, W)
        out[key] = {
            "cutoff": c,
            "derivations": der,
            "inner": inner,
            "first_cohomology": der - inner,
        }
    out["stable"] = all(
        out["at"][k] == out["above"][k]
        for k in ("derivations", "inner", "first_cohomology")
    )
    return out
