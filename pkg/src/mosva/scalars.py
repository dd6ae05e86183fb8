"""Exact scalar arithmetic and fraction-free linear algebra.

Scalars are ``fractions.Fraction`` throughout the package: every value is
kept in lowest terms with a positive denominator, sums and products are
exact, and equality is decidable.  This module adds the small amount of
exact linear algebra the rest of the package needs: a dense matrix type
and rank / kernel / image computation via fraction-free Bareiss
elimination (rows are cleared to integers first, so the elimination never
leaves Z until the final back-substitution).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def as_scalar(x) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions to an exact scalar."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


class Matrix:
    """Dense matrix of Fractions with just the operations the package uses."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, rows: Sequence[Sequence[Fraction]]):
        self.rows = [[as_scalar(x) for x in row] for row in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for row in self.rows:
            if len(row) != self.ncols:
                raise ValueError("ragged rows")

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls([[ZERO] * ncols for _ in range(nrows)])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        m = cls.zeros(n, n)
        for i in range(n):
            m.rows[i][i] = ONE
        return m

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[Fraction]]) -> "Matrix":
        if not cols:
            return cls([])
        nrows = len(cols[0])
        return cls([[cols[j][i] for j in range(len(cols))] for i in range(nrows)])

    def column(self, j: int) -> list[Fraction]:
        return [self.rows[i][j] for i in range(self.nrows)]

    def mul(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = Matrix.zeros(self.nrows, other.ncols)
        for i in range(self.nrows):
            row = self.rows[i]
            for k, a in enumerate(row):
                if a == 0:
                    continue
                orow = other.rows[k]
                trow = out.rows[i]
                for j, b in enumerate(orow):
                    if b != 0:
                        trow[j] += a * b
        return out

    def apply(self, vec: Sequence[Fraction]) -> list[Fraction]:
        if len(vec) != self.ncols:
            raise ValueError("shape mismatch")
        return [
            sum((row[j] * vec[j] for j in range(self.ncols)), ZERO)
            for row in self.rows
        ]

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.rows for x in row)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"Matrix({self.rows!r})"


def _integer_rows(m: Matrix) -> list[list[int]]:
    """Scale each row by the lcm of denominators; rank/kernel are unchanged."""
    out = []
    for row in m.rows:
        lcm = 1
        for x in row:
            d = x.denominator
            lcm = lcm // gcd(lcm, d) * d
        out.append([int(x * lcm) for x in row])
    return out


def _bareiss_echelon(rows: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form.

    Returns the eliminated integer rows and the list of pivot column
    indices.  Divisions in the Bareiss update are exact by construction.
    """
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    rows = [row[:] for row in rows]
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                rows[i][j] = (rows[r][c] * rows[i][j] - rows[i][c] * rows[r][j]) // prev
            rows[i][c] = 0
        prev = rows[r][c]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank_kernel_image(
    m: Matrix,
) -> tuple[int, list[list[Fraction]], list[list[Fraction]]]:
    """Rank, kernel basis and image basis of an exact matrix.

    The kernel basis vectors (columns of length ncols) satisfy m @ k = 0
    exactly; the image basis is the original matrix columns at the pivot
    positions, so image vectors are honest columns of m.
    """
    if m.ncols == 0:
        return 0, [], []
    if m.nrows == 0:
        kernel = [
            [ONE if i == j else ZERO for i in range(m.ncols)] for j in range(m.ncols)
        ]
        return 0, kernel, []
    ech, pivots = _bareiss_echelon(_integer_rows(m))
    rank = len(pivots)
    free_cols = [c for c in range(m.ncols) if c not in pivots]
    kernel: list[list[Fraction]] = []
    for fc in free_cols:
        vec = [ZERO] * m.ncols
        vec[fc] = ONE
        # Back-substitute through the echelon rows, bottom row first.
        for r in range(rank - 1, -1, -1):
            pc = pivots[r]
            s = sum(
                (Fraction(ech[r][j]) * vec[j] for j in range(pc + 1, m.ncols)),
                ZERO,
            )
            vec[pc] = -s / ech[r][pc]
        kernel.append(vec)
    image = [m.column(c) for c in pivots]
    return rank, kernel, image


def solve(
    m: Matrix, rhs: Sequence[Fraction]
) -> tuple[list[Fraction] | None, list[list[Fraction]]]:
    """Solve m @ x = rhs exactly.

    Returns (particular solution or None if inconsistent, kernel basis).
    Eliminates the augmented matrix so consistency is decided exactly.
    """
    if len(rhs) != m.nrows:
        raise ValueError("shape mismatch")
    aug = Matrix([list(row) + [rhs[i]] for i, row in enumerate(m.rows)])
    ech, pivots = _bareiss_echelon(_integer_rows(aug))
    if any(pc == m.ncols for pc in pivots):
        _, kernel, _ = rank_kernel_image(m)
        return None, kernel
    x = [ZERO] * m.ncols
    for r in range(len(pivots) - 1, -1, -1):
        pc = pivots[r]
        s = sum(
            (Fraction(ech[r][j]) * x[j] for j in range(pc + 1, m.ncols)),
            ZERO,
        )
        x[pc] = (Fraction(ech[r][m.ncols]) - s) / ech[r][pc]
    _, kernel, _ = rank_kernel_image(m)
    return x, kernel


def dot(a: Iterable[Fraction], b: Iterable[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)
