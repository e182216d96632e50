import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lyapdecay import core
from lyapdecay.core import (
    BandedSymmetricMatrix,
    KroneckerSumOperator,
    SparseMatrix,
    kron_sum_apply,
    laplacian2d,
    linear_to_pair,
    pair_to_linear,
    sym_eig,
    tridiag,
    unvec,
    vec,
)
from lyapdecay.errors import DimensionError

from conftest import random_spd_banded


def test_vec_is_column_major():
    X = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(vec(X), [0.0, 3.0, 1.0, 4.0, 2.0, 5.0])
    assert np.array_equal(unvec(vec(X), 2), X)


def test_unvec_rejects_bad_length():
    with pytest.raises(DimensionError):
        unvec(np.zeros(7), 2)


def test_linear_index_decoding():
    assert linear_to_pair(35, 10) == (5, 4)
    assert linear_to_pair(1, 10) == (1, 1)
    assert linear_to_pair(100, 10) == (10, 10)
    with pytest.raises(ValueError):
        linear_to_pair(101, 10)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n * n))))
def test_linear_index_roundtrip(nt):
    n, t = nt
    assert pair_to_linear(*linear_to_pair(t, n), n) == t


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_kron_sum_apply_matches_assembled(n, beta, seed):
    rng = np.random.default_rng(seed)
    beta = min(beta, max(n - 1, 0))
    A = random_spd_banded(rng, n, beta)
    x = rng.standard_normal(n * n)
    K = np.kron(np.eye(n), A) + np.kron(A, np.eye(n))
    expected = K @ x
    assert np.allclose(kron_sum_apply(A, x), expected, rtol=1e-12, atol=1e-12)
    Ab = BandedSymmetricMatrix.from_dense(A, beta=max(beta, 1) if n > 1 else 1)
    assert np.allclose(kron_sum_apply(Ab, x), expected, rtol=1e-12, atol=1e-12)


def test_banded_roundtrip_and_matvec(rng):
    A = random_spd_banded(rng, 9, 2)
    B = BandedSymmetricMatrix.from_dense(A)
    assert B.beta == 2
    assert np.array_equal(B.to_dense(), A)
    x = rng.standard_normal((9, 3))
    assert np.allclose(B @ x, A @ x)
    assert np.allclose(B.to_scipy().toarray(), A)
    assert np.isclose(B.fro_norm(), np.linalg.norm(A))
    assert np.allclose((-B).to_dense(), -A)
    assert np.allclose(B.shift(2.0).to_dense(), A + 2 * np.eye(9))


def test_banded_bands_are_read_only():
    B = tridiag(4, -1.0, 2.0)
    with pytest.raises(ValueError):
        B.bands[0, 0] = 5.0


def test_tridiag_nonsymmetric_is_dense():
    A = tridiag(5, 1.0, 2.0, -1.0)
    assert isinstance(A, np.ndarray)
    assert A[1, 0] == 1.0 and A[0, 1] == -1.0 and A[2, 2] == 2.0


def test_kronecker_operator():
    K = laplacian2d(4)
    assert isinstance(K, KroneckerSumOperator)
    assert K.n == 16 and K.grid == 4 and K.beta == 4
    M = tridiag(4, -1.0, 2.0).to_dense()
    dense = np.kron(M, np.eye(4)) + np.kron(np.eye(4), M)
    assert np.array_equal(K.to_dense(), dense)
    assert np.allclose(K.to_scipy().toarray(), dense)
    assert np.isclose(K.fro_norm(), np.linalg.norm(dense))
    x = np.arange(16.0)
    assert np.allclose(K @ x, dense @ x)
    assert core.bandwidth(dense) == 4


def test_sparse_matrix_canonical():
    S = SparseMatrix(3, 3, [2, 0, 0, 1], [1, 2, 2, 1], [1.0, 2.0, 3.0, 0.0])
    assert S.triplets == [(0, 2, 5.0), (2, 1, 1.0)]
    assert S.nnz == 2
    assert np.array_equal(SparseMatrix.from_scipy(sp.csr_matrix(S.to_dense())).values, S.values)
    assert not S.is_symmetric()
    T = SparseMatrix.from_dense(S.to_dense() + S.to_dense().T)
    assert T.is_symmetric()
    with pytest.raises(DimensionError):
        SparseMatrix(2, 2, [2], [0], [1.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 25), st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_sym_eig_against_lapack(n, beta, seed):
    rng = np.random.default_rng(seed)
    A = random_spd_banded(rng, n, min(beta, n - 1)) - 0.5 * np.eye(n)
    eig = sym_eig(A)
    ref = np.linalg.eigvalsh(A)
    scale = max(np.abs(ref).max(), 1.0)
    assert np.all(np.diff(eig.values) >= 0)
    assert np.allclose(eig.values, ref, atol=1e-12 * scale)
    U = eig.vectors
    assert np.linalg.norm(U.T @ U - np.eye(n)) <= 1e-12 * n
    assert np.linalg.norm(eig.reconstruct() - A) <= 1e-12 * scale * n


def test_sym_eig_tridiagonal_closed_form():
    n = 40
    eig = sym_eig(tridiag(n, -1.0, 2.0))
    k = np.arange(1, n + 1)
    exact = 2.0 - 2.0 * np.cos(k * np.pi / (n + 1))
    assert np.allclose(eig.values, exact, atol=1e-13)


def test_sym_eig_identity():
    eig = sym_eig(np.eye(5))
    assert np.array_equal(eig.values, np.ones(5))
    assert np.allclose(np.abs(eig.vectors), np.eye(5))


@given(arrays(float, (4, 4), elements=st.floats(-10, 10)))
def test_sym_eig_symmetrized_random(M):
    A = M + M.T
    eig = sym_eig(A)
    assert np.allclose(eig.values, np.linalg.eigvalsh(A), atol=1e-10 * max(1.0, np.abs(A).max()))


def test_sym_eig_tiny_offdiagonal_entries():
    # entries far below eps * ||A|| must deflate instead of stalling the iteration
    A = np.array([[0.0, 1.0, 1e-251], [1.0, 0.0, 1e-251], [1e-251, 1e-251, 0.0]])
    eig = sym_eig(A)
    assert np.allclose(eig.values, [-1.0, 0.0, 1.0], atol=1e-15)
