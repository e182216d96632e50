import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapdecay import tridiag
from lyapdecay.core import SparseMatrix, as_dense
from lyapdecay.decay_bounds import SegmentSpec, entry_envelope
from lyapdecay.equation_solvers import solve_spectral
from lyapdecay.errors import TermFailureError
from lyapdecay.sparse_rhs import (
    SparsifyReport,
    SplitPlan,
    predict_pattern,
    split_solve,
    split_solve_dense,
    threshold_sparsify,
)

from conftest import random_spd_banded


def _example_rhs(n=100):
    B = np.zeros((n, 11))
    B[np.arange(49, 60), np.arange(11)] = 1.0
    return B @ B.T


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.booleans())
def test_plan_reconstructs_rhs(n, seed, symmetric):
    rng = np.random.default_rng(seed)
    D = np.where(rng.uniform(size=(n, n)) < 0.3, rng.standard_normal((n, n)), 0.0)
    if symmetric:
        D = D + D.T
    plan = SplitPlan.from_rhs(SparseMatrix.from_dense(D))
    assert np.array_equal(plan.to_dense(), D)
    fused = [t for t in plan.terms if t.fused]
    if symmetric:
        assert all(t.i < t.j for t in fused)
    else:
        assert not fused


def test_single_term_is_scaled_solve():
    A = tridiag(20, -1.0, 3.0)
    D = np.zeros((20, 20))
    D[4, 4] = 2.5
    X = split_solve_dense(A, D)
    E = np.zeros((20, 20))
    E[4, 4] = 1.0
    ref = 2.5 * solve_spectral(A, E)
    assert np.abs(X - ref).max() <= 1e-14 * np.abs(ref).max()


def test_random_diagonal_linearity(rng):
    A = tridiag(100, -1.0, 2.0)
    D = np.diag(rng.uniform(size=100))
    S, rep = split_solve(A, SparseMatrix.from_dense(D), threshold=0.0)
    X = solve_spectral(A, D)
    assert np.linalg.norm(S.to_dense() - X) <= 1e-10 * np.linalg.norm(X)
    assert rep.dropped_fro == 0.0


def test_symmetric_offdiagonal_rhs(rng):
    A = random_spd_banded(rng, 15, 2)
    D = np.zeros((15, 15))
    D[2, 7] = D[7, 2] = 1.5
    D[3, 3] = -0.5
    X = split_solve_dense(A, D)
    assert np.array_equal(X, X.T)
    assert np.allclose(X, solve_spectral(A, D), atol=1e-13)


def test_projection_per_term_solver():
    A = tridiag(60, -1.0, 4.0)
    D = np.diag(np.r_[np.zeros(20), np.linspace(1, 2, 5), np.zeros(35)])
    X = split_solve_dense(A, D, per_term_solver="projection", tol=1e-13)
    assert np.allclose(X, solve_spectral(A, D), atol=1e-12)


def test_peaks_follow_diagonal_block(rng):
    A = tridiag(100, -1.0, 2.0)
    d = np.zeros(100)
    d[49:70] = rng.uniform(size=21)
    X = split_solve_dense(A, np.diag(d))
    row_peaks = np.argmax(np.abs(X), axis=1)
    assert np.all((row_peaks >= 40) & (row_peaks <= 79))
    big = np.abs(X) >= 0.5 * np.abs(X).max()
    i, j = np.nonzero(big)
    assert i.min() >= 40 and j.max() <= 79


def test_deterministic_across_workers():
    A = tridiag(100, -1.0, 4.0)
    D = SparseMatrix.from_dense(_example_rhs())
    a, ra = split_solve(A, D, 1e-5, workers=1)
    b, rb = split_solve(A, D, 1e-5, workers=4)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.col_idx, b.col_idx)
    assert ra == rb


def test_term_failures_aggregated():
    A = np.diag([1.0, -1.0, 2.0])
    with pytest.raises(TermFailureError) as exc:
        split_solve_dense(A, np.eye(3))
    assert [k for k, _ in exc.value.failures] == [0, 1, 2]


def test_per_term_truncation_flag():
    A = tridiag(100, -1.0, 4.0)
    D = _example_rhs()
    S, rep = split_solve(A, D, 1e-5, truncate_terms=True)
    S0, rep0 = split_solve(A, D, 1e-5)
    assert rep.nnz_after <= rep0.nnz_after + 10
    assert np.abs(S.to_dense() - S0.to_dense()).max() < 1e-4


def test_threshold_trivial(rng):
    X = rng.standard_normal((10, 10))
    S, rep = threshold_sparsify(X, 0.0)
    assert np.array_equal(S.to_dense(), X) and rep.dropped_fro == 0.0 and rep.dropped_2 == 0.0
    S, rep = threshold_sparsify(X, np.abs(X).max() * 2)
    assert S.nnz == 0
    assert rep.dropped_fro == pytest.approx(np.linalg.norm(X))
    assert rep.singular_values_above_threshold == 0
    with pytest.raises(ValueError):
        threshold_sparsify(X, -1.0)


def test_threshold_is_strict():
    S, rep = threshold_sparsify(np.array([[1e-5, 2e-5], [5e-6, 0.0]]), 1e-5)
    assert S.triplets == [(0, 0, 1e-5), (0, 1, 2e-5)]
    assert rep.nnz_before == 3 and rep.nnz_after == 2


def test_example_thresholding_counts():
    X = solve_spectral(tridiag(100, -1.0, 4.0), _example_rhs())
    assert X[49, 49] == pytest.approx(0.13924265909553182, rel=1e-12)
    S, rep = threshold_sparsify(X, 1e-5)
    assert rep.nnz_after == 219
    assert 1e-6 <= rep.dropped_2 <= 1e-4
    assert rep.singular_values_nonzero == 19
    assert SparsifyReport.from_dict(rep.to_dict()) == rep


def test_predict_pattern_single_term_equals_envelope():
    A = tridiag(40, -1.0, 3.0)
    lam = np.linalg.eigvalsh(as_dense(A))
    D = np.zeros((40, 40))
    D[9, 9] = 1.0
    env = predict_pattern(SegmentSpec(lam[0], lam[-1], 1), D, 1e-8)
    ref = entry_envelope(lam[0], lam[-1], 1, (40, 40), (10, 10))
    assert np.allclose(env.bounds, ref.bounds, rtol=1e-14)


def test_predict_pattern_mask_is_sound(rng):
    A = tridiag(100, -1.0, 4.0)
    lam = np.linalg.eigvalsh(as_dense(A))
    spec = SegmentSpec(lam[0], lam[-1], 1)
    for D in (_example_rhs(), np.diag(np.r_[np.zeros(49), rng.uniform(size=21), np.zeros(30)])):
        X = solve_spectral(A, D)
        env = predict_pattern(spec, D, 1e-5)
        assert not np.any(env.negligible & (np.abs(X) >= 1e-5))
        assert env.negligible[0, 99] and env.negligible[99, 0]
        assert not env.negligible[59, 59]
