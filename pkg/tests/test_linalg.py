import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from bispectral.algebra import Q
from bispectral.linalg import ExactMatrix, SparseNullspace, solve_linear_exact


@st.composite
def systems(draw):
    m = draw(st.integers(1, 20))
    n = draw(st.integers(1, 20))
    entry = st.one_of(st.just(0), st.integers(-9, 9), st.fractions(min_value=-9, max_value=9, max_denominator=7))
    rows = [[draw(entry) for _ in range(n)] for _ in range(m)]
    b = [draw(entry) for _ in range(m)]
    return ExactMatrix.from_rows(rows), b


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
@given(systems())
def test_back_substitution(system):
    A, b = system
    sol = solve_linear_exact(A, b)
    if sol.consistent:
        assert A.matvec(sol.particular) == [Q(v) for v in b]
    for v in sol.null_basis:
        assert all(r == 0 for r in A.matvec(v))


def test_inconsistent_system():
    A = ExactMatrix.from_rows([[1, 1], [2, 2]])
    sol = solve_linear_exact(A, [1, 3])
    assert not sol.consistent and sol.particular is None


def test_unique_solution_is_exact():
    A = ExactMatrix.from_rows([[3, 1], [1, 2]])
    sol = solve_linear_exact(A, [Q(1), Q(0)])
    assert sol.unique
    assert sol.particular == [Q(2, 5), Q(-1, 5)]


def test_bad_shapes():
    with pytest.raises(ValueError):
        ExactMatrix(2, 2, ((1, 2),))
    with pytest.raises(ValueError):
        solve_linear_exact(ExactMatrix.identity(2), [1])


def test_sparse_nullspace_matches_dense():
    rng = random.Random(3)
    for _ in range(20):
        cols = [f"c{k}" for k in range(rng.randint(2, 12))]
        rows = []
        for _ in range(rng.randint(1, 10)):
            rows.append({c: rng.randint(-3, 3) for c in rng.sample(cols, rng.randint(1, len(cols)))})
        ns = SparseNullspace(cols)
        for r in rows:
            ns.add_row(r)
        dense = solve_linear_exact(
            ExactMatrix.from_rows([[r.get(c, 0) for c in cols] for r in rows]), [0] * len(rows)
        )
        basis = ns.basis()
        assert len(basis) == len(dense.null_basis)
        for v in basis:
            for r in rows:
                assert sum(Q(a) * v.get(c, 0) for c, a in r.items()) == 0
