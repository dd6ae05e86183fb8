"""Concrete algebras and bimodules used by the test suite and the CLI.

Two families:

  * associative algebras with a derivation, turned into vertex structures
    by ``from_associative_algebra`` (all finite-dimensional, exact);
  * the rank-one free boson ("heisenberg"), generated independently from
    the normal-ordered field formula, truncated at a weight cutoff.

The free-boson generator is deliberately self-contained: modes come from
the classical recursion for normal-ordered products of derivative
fields, not from any axiom-driven machinery in this package, so the
axiom checkers run against genuinely external data.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .algebra import MosvaData, from_associative_algebra
from .graded import GradedSpace, LinOp, Vec, vec_add, vec_scale

# ---------------------------------------------------------------------------
# associative fixtures


def trivial() -> MosvaData:
    return from_associative_algebra(
        "trivial", {"1": 0}, {"1": Fraction(1)}, {("1", "1"): {"1": Fraction(1)}}
    )


def dual_numbers() -> MosvaData:
    """Q[x] / (x^2), everything in weight zero."""
    labels = ["1", "x"]
    mult = {}
    for a in labels:
        for b in labels:
            if a == "1":
                mult[(a, b)] = {b: Fraction(1)}
            elif b == "1":
                mult[(a, b)] = {a: Fraction(1)}
            else:
                mult[(a, b)] = {}
    return from_associative_algebra(
        "dual_numbers", {lab: 0 for lab in labels}, {"1": Fraction(1)}, mult
    )


def _matrix_units(keep: list[tuple[int, int]], name: str) -> MosvaData:
    labels = [f"e{i}{j}" for i, j in keep]
    unit: Vec = {}
    for i, j in keep:
        if i == j:
            unit[f"e{i}{j}"] = Fraction(1)
    mult = {}
    for i, j in keep:
        for k, l in keep:
            key = (f"e{i}{j}", f"e{k}{l}")
            mult[key] = {f"e{i}{l}": Fraction(1)} if j == k and (i, l) in keep else {}
    return from_associative_algebra(name, {lab: 0 for lab in labels}, unit, mult)


def matrices_2x2() -> MosvaData:
    return _matrix_units([(1, 1), (1, 2), (2, 1), (2, 2)], "m2q")


def upper_triangular_2x2() -> MosvaData:
    return _matrix_units([(1, 1), (1, 2), (2, 2)], "ut2")


def truncated_polynomials(power: int = 4) -> MosvaData:
    """Q[t] / (t^power) with D = t^2 d/dt and wt(t^j) = j.

    t^2 d/dt is a derivation of Q[t] that preserves the ideal (t^power)
    and raises the weight by one, giving the one associative fixture with
    a genuinely nonzero translation operator: Y(t, x) 1 = t + x t^2 + ...
    """
    labels = [f"t{j}" for j in range(power)]
    weights = {f"t{j}": j for j in range(power)}
    mult = {}
    for a in range(power):
        for b in range(power):
            tgt = a + b
            mult[(f"t{a}", f"t{b}")] = {f"t{tgt}": Fraction(1)} if tgt < power else {}
    d_cols = {
        f"t{j}": {f"t{j+1}": Fraction(j)} for j in range(1, power - 1)
    }
    return from_associative_algebra(
        "truncated_poly", weights, {"t0": Fraction(1)}, mult, LinOp(d_cols)
    )


ASSOCIATIVE_FIXTURES = {
    "trivial": trivial,
    "dual_numbers": dual_numbers,
    "m2q": matrices_2x2,
    "ut2": upper_triangular_2x2,
    "truncated_poly": truncated_polynomials,
}


# ---------------------------------------------------------------------------
# rank-one free boson, truncated at a weight cutoff
#
# Basis: partitions (tuples sorted descending); the label (n1, ..., nr)
# stands for the product of creation operators a_{-n1} ... a_{-nr} on the
# ground state ().  Weight = sum of parts.


Partition = tuple[int, ...]


def _insert(part: Partition, k: int) -> Partition:
    out = sorted(part + (k,), reverse=True)
    return tuple(out)


def _remove(part: Partition, k: int) -> Partition:
    out = list(part)
    out.remove(k)
    return tuple(out)


def _gbinom(top: int, k: int) -> int:
    """binomial(top, k) for any integer top and k >= 0."""
    if k < 0:
        return 0
    if top >= 0:
        return comb(top, k)
    return (-1) ** k * comb(-top + k - 1, k)


class _BosonGenerator:
    """Normal-ordered field modes on the truncated Fock space."""

    def __init__(self, cutoff: int):
        self.cutoff = cutoff
        self.labels = self._partitions(cutoff)
        self.cache: dict[tuple[Partition, int, Partition], Vec] = {}

    @staticmethod
    def _partitions(max_sum: int) -> list[Partition]:
        out: list[Partition] = []

        def rec(prefix: list[int], largest: int, left: int):
            out.append(tuple(prefix))
            for k in range(min(largest, left), 0, -1):
                rec(prefix + [k], k, left - k)

        rec([], max_sum, max_sum)
        return sorted(out, key=lambda p: (sum(p), p))

    def a_create(self, k: int, v: Vec) -> Vec:
        return {_insert(lab, k): c for lab, c in v.items()}

    def a_annihilate(self, k: int, v: Vec) -> Vec:
        out: Vec = {}
        for lab, c in v.items():
            m = lab.count(k)
            if m:
                key = _remove(lab, k)
                s = out.get(key, 0) + c * k * m
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return out

    def mode(self, u: Partition, n: int, v: Partition) -> Vec:
        """Image of the basis vector v under the n-th mode of the field of u."""
        key = (u, n, v)
        if key in self.cache:
            return self.cache[key]
        out: Vec = {}
        if not u:
            if n == -1:
                out = {v: Fraction(1)}
        else:
            # peel the largest creation factor: the field of u is the
            # normal-ordered product of the (m-1)-th derivative field,
            # m = u[0], with the field of the rest
            m = u[0]
            rest = u[1:]
            result_weight = sum(u) + sum(v) - n - 1
            if 0 <= result_weight <= self.cutoff:
                # annihilation half: a_j with j >= 1 acts first
                for j in set(v):
                    inner = self.a_annihilate(j, {v: Fraction(1)})
                    coef = Fraction(_gbinom(-j - 1, m - 1))
                    if not coef:
                        continue
                    b = n - m - j
                    for lab, c in inner.items():
                        img = self.mode(rest, b, lab)
                        if img:
                            out = vec_add(out, vec_scale(img, c * coef))
                # creation half: a_j with j <= -1 acts last; the inner
                # result carries weight result_weight + j, bounded below by 0
                for j in range(-1, -result_weight - 1, -1):
                    coef = Fraction(_gbinom(-j - 1, m - 1))
                    if not coef:
                        continue
                    b = n - m - j
                    img = self.mode(rest, b, v)
                    if img:
                        out = vec_add(out, vec_scale(self.a_create(-j, img), coef))
        self.cache[key] = out
        return out


def heisenberg(cutoff: int = 4) -> MosvaData:
    """Rank-one free boson truncated at the given weight."""
    gen = _BosonGenerator(cutoff)
    labels = gen.labels
    weights = {lab: sum(lab) for lab in labels}
    space = GradedSpace("heisenberg", weights, complete=False, cutoff=cutoff)

    modes: dict = {}
    top_mode: dict[tuple[Partition, Partition], int] = {}
    for u in labels:
        hu = sum(u)
        for v in labels:
            hv = sum(v)
            for n in range(hu + hv - 1 - cutoff, hu + hv):
                img = gen.mode(u, n, v)
                if img:
                    modes.setdefault((u, n), {})[v] = img
                    cur = top_mode.get((u, v), -1)
                    if n > cur:
                        top_mode[(u, v)] = n

    # pole caps: tight when every nonnegative mode result is inside the
    # cutoff (then the stored modes are the whole story), else the weight
    # bound wt u + wt v
    pole_bounds = {}
    for u in labels:
        for v in labels:
            hu, hv = sum(u), sum(v)
            if hu + hv <= cutoff + 1:
                pole_bounds[(u, v)] = max(top_mode.get((u, v), -1) + 1, 0)
            else:
                pole_bounds[(u, v)] = hu + hv

    d_cols: dict = {}
    for lab in labels:
        img: Vec = {}
        for k in set(lab):
            if sum(lab) + 1 <= cutoff:
                target = _insert(_remove(lab, k), k + 1)
                c = Fraction(k * lab.count(k))
                img[target] = img.get(target, 0) + c
        img = {t: c for t, c in img.items() if c}
        if img:
            d_cols[lab] = img
    vacuum: Vec = {(): Fraction(1)}
    return MosvaData("heisenberg", space, vacuum, modes, LinOp(d_cols), pole_bounds)
