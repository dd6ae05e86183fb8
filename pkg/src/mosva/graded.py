"""Graded vector spaces over Q with explicit basis labels.

A ``GradedSpace`` enumerates basis labels and their integer weights.
Spaces come in two flavors:

  * ``complete=True``: the listed labels span the whole space (finite
    total dimension), so every computation in it is exact;
  * ``complete=False``: the labels enumerate every weight <= ``cutoff``
    and nothing above it.  Vectors are then trustworthy only as far as
    the cutoff, and the callers that propagate through such spaces must
    do their own window accounting.

Vectors are sparse dicts from basis label to ``Fraction``; an absent
label means coefficient zero.  Linear operators store their columns
sparsely the same way.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .scalars import Matrix

Label = Hashable
Vec = dict  # Label -> Fraction


class TruncationError(Exception):
    """A computation needed basis data above the space's cutoff."""


class GradedSpace:
    __slots__ = ("name", "weights", "complete", "cutoff", "_by_weight")

    def __init__(
        self,
        name: str,
        weights: Mapping[Label, int],
        complete: bool,
        cutoff: int | None = None,
    ):
        if not complete and cutoff is None:
            raise ValueError("a truncated space needs a cutoff")
        self.name = name
        self.weights = dict(weights)
        self.complete = complete
        self.cutoff = cutoff if not complete else None
        by_weight: dict[int, list[Label]] = {}
        for lab, w in self.weights.items():
            by_weight.setdefault(w, []).append(lab)
        self._by_weight = {w: sorted(labs, key=repr) for w, labs in by_weight.items()}
        if not complete:
            for w in self._by_weight:
                if w > cutoff:
                    raise ValueError(f"label above cutoff: weight {w} > {cutoff}")

    def weight(self, label: Label) -> int:
        return self.weights[label]

    def labels(self) -> list[Label]:
        return [lab for w in sorted(self._by_weight) for lab in self._by_weight[w]]

    def labels_of_weight(self, w: int) -> list[Label]:
        return self._by_weight.get(w, [])

    def weights_present(self) -> list[int]:
        return sorted(self._by_weight)

    def min_weight(self) -> int:
        return min(self._by_weight) if self._by_weight else 0

    def max_weight(self) -> int:
        return max(self._by_weight) if self._by_weight else 0

    def dim(self) -> int:
        return len(self.weights)

    def covers_weight(self, w: int) -> bool:
        """Is the basis at weight w fully enumerated?"""
        return self.complete or w <= self.cutoff

    def check_vec(self, v: Vec):
        for lab in v:
            if lab not in self.weights:
                raise KeyError(f"unknown label {lab!r} in {self.name}")

    def basis_vec(self, label: Label) -> Vec:
        if label not in self.weights:
            raise KeyError(f"unknown label {label!r} in {self.name}")
        return {label: Fraction(1)}

    def __repr__(self) -> str:
        kind = "complete" if self.complete else f"cutoff={self.cutoff}"
        return f"GradedSpace({self.name}, dim={self.dim()}, {kind})"


# ---------------------------------------------------------------------------
# sparse vector helpers


def vec_zero() -> Vec:
    return {}

def vec_add(a: Vec, b: Vec) -> Vec:
    out = dict(a)
    for lab, c in b.items():
        s = out.get(lab, 0) + c
        if s:
            out[lab] = s
        else:
            out.pop(lab, None)
    return out

def vec_sub(a: Vec, b: Vec) -> Vec:
    return vec_add(a, vec_scale(b, -1))

def vec_scale(a: Vec, c) -> Vec:
    c = Fraction(c)
    if c == 0:
        return {}
    return {lab: c * x for lab, x in a.items()}

def vec_is_zero(a: Vec) -> bool:
    return all(c == 0 for c in a.values())

def vec_eq(a: Vec, b: Vec) -> bool:
    return vec_is_zero(vec_sub(a, b))

def vec_component(space: GradedSpace, a: Vec, w: int) -> Vec:
    return {lab: c for lab, c in a.items() if space.weight(lab) == w}

def vec_weight_split(space: GradedSpace, a: Vec) -> dict[int, Vec]:
    out: dict[int, Vec] = {}
    for lab, c in a.items():
        out.setdefault(space.weight(lab), {})[lab] = c
    return out

def vec_max_weight(space: GradedSpace, a: Vec) -> int | None:
    return max((space.weight(lab) for lab in a), default=None)

def vec_filter_weight(space: GradedSpace, a: Vec, max_w: int) -> Vec:
    return {lab: c for lab, c in a.items() if space.weight(lab) <= max_w}

def pair(dual_label: Label, a: Vec) -> Fraction:
    """Pairing of a vector against the dual-basis functional of a label."""
    return Fraction(a.get(dual_label, 0))


# ---------------------------------------------------------------------------
# linear operators


class LinOp:
    """A linear operator given by sparse columns on basis labels.

    ``columns[lab]`` is the image of the basis vector ``lab``; missing
    columns act as zero.
    """

    __slots__ = ("columns",)

    def __init__(self, columns: Mapping[Label, Vec] | None = None):
        self.columns = {
            lab: {l2: Fraction(c) for l2, c in col.items() if c}
            for lab, col in (columns or {}).items()
        }
        self.columns = {lab: col for lab, col in self.columns.items() if col}

    @classmethod
    def from_callable(cls, labels: Iterable[Label], fn: Callable[[Label], Vec]) -> "LinOp":
        return cls({lab: fn(lab) for lab in labels})

    @classmethod
    def identity(cls, labels: Iterable[Label]) -> "LinOp":
        return cls({lab: {lab: Fraction(1)} for lab in labels})

    def apply(self, v: Vec) -> Vec:
        out: Vec = {}
        for lab, c in v.items():
            col = self.columns.get(lab)
            if not col:
                continue
            for l2, x in col.items():
                s = out.get(l2, 0) + c * x
                if s:
                    out[l2] = s
                else:
                    out.pop(l2, None)
        return out

    def add(self, other: "LinOp") -> "LinOp":
        cols = dict(self.columns)
        for lab, col in other.columns.items():
            cols[lab] = vec_add(cols.get(lab, {}), col)
        return LinOp(cols)

    def scale(self, c) -> "LinOp":
        return LinOp({lab: vec_scale(col, c) for lab, col in self.columns.items()})

    def compose(self, other: "LinOp") -> "LinOp":
        """self after other."""
        return LinOp({lab: self.apply(col) for lab, col in other.columns.items()})

    def commutator(self, other: "LinOp", labels: Iterable[Label]) -> "LinOp":
        a = self.compose(other)
        b = other.compose(self)
        return LinOp({lab: vec_sub(a.apply({lab: Fraction(1)}), b.apply({lab: Fraction(1)}))
                      for lab in labels})

    def to_matrix(self, domain: Sequence[Label], codomain: Sequence[Label]) -> Matrix:
        index = {lab: i for i, lab in enumerate(codomain)}
        m = Matrix.zeros(len(codomain), len(domain))
        for j, lab in enumerate(domain):
            for l2, c in self.columns.get(lab, {}).items():
                if l2 not in index:
                    raise KeyError(f"image label {l2!r} outside the codomain enumeration")
                m.rows[index[l2]][j] = c
        return m

    def __repr__(self) -> str:
        return f"LinOp({len(self.columns)} columns)"


def vectors_to_matrix(vectors: Sequence[Vec], labels: Sequence[Label]) -> Matrix:
    """Stack vectors as columns on an explicit label enumeration."""
    index = {lab: i for i, lab in enumerate(labels)}
    m = Matrix.zeros(len(labels), len(vectors))
    for j, v in enumerate(vectors):
        for lab, c in v.items():
            if lab not in index:
                raise KeyError(f"label {lab!r} outside the enumeration")
            m.rows[index[lab]][j] = c
    return m


def power_over_factorial(apply_op: Callable[[Vec], Vec], v: Vec, jmax: int) -> list[Vec]:
    """[v, Op v, Op^2 v / 2!, ..., Op^jmax v / jmax!]."""
    out = [dict(v)]
    cur = v
    for j in range(1, jmax + 1):
        cur = vec_scale(apply_op(cur), Fraction(1, j))
        out.append(cur)
    return out
