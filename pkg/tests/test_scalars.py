from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from mosva.scalars import Matrix, dot, rank_kernel_image, solve

F = Fraction


def test_identity_full_rank():
    rank, kernel, image = rank_kernel_image(Matrix.identity(2))
    assert rank == 2
    assert kernel == []
    assert image == [[1, 0], [0, 1]]


def test_zero_matrix_kernel_is_everything():
    rank, kernel, image = rank_kernel_image(Matrix.zeros(3, 4))
    assert rank == 0
    assert len(kernel) == 4
    assert image == []


def test_rank_one_kernel():
    rank, kernel, _ = rank_kernel_image(Matrix([[1, 2], [2, 4]]))
    assert rank == 1
    assert len(kernel) == 1
    # Kernel is spanned by (2, -1); normalize the free coordinate.
    k = kernel[0]
    assert k[0] / k[1] == F(-2)


def test_fractional_entries():
    m = Matrix([[F(1, 2), F(1, 3)], [F(3, 2), F(1)]])
    rank, kernel, _ = rank_kernel_image(m)
    assert rank == 1
    assert len(kernel) == 1
    assert all(x == 0 for x in m.apply(kernel[0]))


def test_solve_consistent_and_inconsistent():
    m = Matrix([[1, 2], [2, 4]])
    x, kernel = solve(m, [F(3), F(6)])
    assert x is not None
    assert m.apply(x) == [F(3), F(6)]
    assert len(kernel) == 1
    none, _ = solve(m, [F(3), F(7)])
    assert none is None


small_fractions = st.fractions(
    min_value=-4, max_value=4, max_denominator=6
)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.lists(small_fractions, min_size=3, max_size=3),
        min_size=2,
        max_size=4,
    )
)
def test_rank_nullity_and_kernel_annihilation(rows):
    m = Matrix(rows)
    rank, kernel, image = rank_kernel_image(m)
    assert rank + len(kernel) == m.ncols
    assert len(image) == rank
    for k in kernel:
        assert all(x == 0 for x in m.apply(k))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.lists(small_fractions, min_size=2, max_size=2),
        min_size=2,
        max_size=2,
    ),
    st.lists(small_fractions, min_size=2, max_size=2),
)
def test_solve_reproduces_rhs_built_from_solution(rows, x):
    m = Matrix(rows)
    rhs = m.apply(x)
    sol, kernel = solve(m, rhs)
    assert sol is not None
    assert m.apply(sol) == rhs
    # Any kernel shift is also a solution.
    for k in kernel:
        shifted = [sol[i] + k[i] for i in range(2)]
        assert m.apply(shifted) == rhs


def test_dot():
    assert dot([F(1, 2), F(2)], [F(4), F(3)]) == F(8)
