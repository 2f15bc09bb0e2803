import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsqcontrol.corrector import assemble_operator, h1_gram, inner_variant, BOUNDARY_H1
from lsqcontrol.grid import SpaceTag, make_grid
from lsqcontrol.linalg import IndefiniteMatrixError, assemble, cg_solve


def test_assemble_sums_duplicates():
    A = assemble(2, [(0, 0, 1.0), (0, 0, 1.0)])
    assert A.data.tolist() == [2.0]
    assert A.toarray().tolist() == [[2.0, 0.0], [0.0, 0.0]]


def test_assemble_empty():
    A = assemble(3, [])
    assert A.data.size == 0
    assert A.indptr.tolist() == [0, 0, 0, 0]
    assert np.all(A @ np.ones(3) == 0)


def test_assemble_rejects_out_of_range():
    with pytest.raises(ValueError):
        assemble(2, [(2, 0, 1.0)])
    with pytest.raises(ValueError):
        assemble(2, [(0, -1, 1.0)])


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.floats(-10, 10)), max_size=40))
def test_assemble_matches_dense_accumulation(triplets):
    dense = np.zeros((6, 6))
    for r, c, v in triplets:
        dense[r, c] += v
    A = assemble(6, triplets)
    np.testing.assert_allclose(A.toarray(), dense, atol=1e-12)
    for row in range(6):
        cols = A.indices[A.indptr[row]:A.indptr[row + 1]]
        assert np.all(np.diff(cols) > 0)


def test_cg_identity_one_iteration():
    A = assemble(5, [(i, i, 1.0) for i in range(5)])
    b = np.array([1.0, -2.0, 3.0, 0.5, 7.0])
    x, rep = cg_solve(A, b)
    np.testing.assert_array_equal(x, b)
    assert rep.iterations == 1 and rep.converged


def test_cg_two_by_two():
    A = assemble(2, [(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)])
    x, rep = cg_solve(A, [1.0, 2.0], tol=1e-14)
    oracle = np.linalg.inv(A.toarray()) @ [1.0, 2.0]
    np.testing.assert_allclose(x, oracle, rtol=1e-14)
    np.testing.assert_allclose(x, [1 / 11, 7 / 11], rtol=1e-14)


def test_cg_laplacian_forward_multiply():
    h = 0.25
    trip = []
    for i in range(3):
        trip.append((i, i, 2 / h))
        if i > 0:
            trip += [(i, i - 1, -1 / h), (i - 1, i, -1 / h)]
    A = assemble(3, trip)
    xs = np.array([0.3, -1.2, 2.5])
    x, rep = cg_solve(A, A @ xs, tol=1e-12)
    assert rep.converged
    np.testing.assert_allclose(x, xs, rtol=1e-11)


def test_cg_zero_rhs_returns_zero():
    A = assemble(2, [(0, 0, 2.0), (1, 1, 3.0)])
    x, rep = cg_solve(A, np.zeros(2))
    assert np.all(x == 0) and rep.iterations == 0 and rep.converged


def test_cg_rejects_non_positive_diagonal():
    A = assemble(2, [(0, 0, 1.0), (1, 1, 0.0)])
    with pytest.raises(IndefiniteMatrixError):
        cg_solve(A, np.ones(2))
    A = assemble(2, [(0, 0, 1.0), (1, 1, -1.0)])
    with pytest.raises(IndefiniteMatrixError):
        cg_solve(A, np.ones(2))


def test_cg_reports_non_convergence():
    g = make_grid(1.0, 16, 16)
    A = assemble_operator(g, BOUNDARY_H1)
    x, rep = cg_solve(A, np.ones(A.n), tol=1e-12, maxit=2)
    assert not rep.converged and rep.iterations == 2 and rep.residual > 1e-12


def test_cg_error_energy_norm_non_increasing():
    g = make_grid(1.0, 16, 16)
    A = assemble_operator(g, BOUNDARY_H1)
    rng = np.random.default_rng(0)
    xs = rng.standard_normal(A.n)
    b = A @ xs
    errs = []

    def cb(k, x):
        e = x - xs
        errs.append(e @ (A @ e))

    cg_solve(A, b, tol=1e-12, callback=cb)
    assert np.all(np.diff(errs) <= 1e-12 * errs[0])


@pytest.mark.parametrize("N", [8, 32, 128])
@pytest.mark.parametrize("which", ["h10", "gram", "inner"])
def test_assembled_systems_roundtrip(N, which):
    g = make_grid(1.0, N, N)
    if which == "h10":
        A = assemble_operator(g, BOUNDARY_H1)
    elif which == "inner":
        A = assemble_operator(g, inner_variant(0.25, 0.75))
    else:
        A = h1_gram(g, SpaceTag.VARIATION_BOUNDARY)
    assert A.asymmetry() <= 1e-12 * np.abs(A.data).max()
    b = np.random.default_rng(N).standard_normal(A.n)
    x, rep = cg_solve(A, b, tol=1e-12)
    assert rep.converged
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_cg_is_deterministic():
    g = make_grid(1.0, 24, 24)
    A = assemble_operator(g, BOUNDARY_H1)
    b = np.random.default_rng(3).standard_normal(A.n)
    x1, _ = cg_solve(A, b)
    x2, _ = cg_solve(A, b)
    assert x1.tobytes() == x2.tobytes()
