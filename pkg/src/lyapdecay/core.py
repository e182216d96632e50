"""Matrix containers, vec/unvec, the Kronecker-sum operator and a symmetric
eigensolver (Householder tridiagonalization + implicit-shift QL).

Dense operands are plain ``numpy.ndarray`` objects.  Vectorization is
column-major throughout: entry ``(i, j)`` of an ``n x m`` matrix lands at
0-based position ``j * n + i`` of ``vec(X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionError, LyapunovError, SymmetryError

__all__ = [
    "vec",
    "unvec",
    "BandedSymmetricMatrix",
    "KroneckerSumOperator",
    "SparseMatrix",
    "EigenDecomposition",
    "kron_sum_apply",
    "sym_eig",
    "as_dense",
    "matvec_of",
    "fro_norm_of",
    "tridiag",
    "laplacian2d",
    "linear_to_pair",
    "pair_to_linear",
]


def vec(X):
    """Stack the columns of ``X`` into one vector."""
    X = np.asarray(X)
    if X.ndim != 2:
        raise DimensionError(f"vec expects a 2-D array, got ndim={X.ndim}")
    return X.reshape(-1, order="F").copy()


def unvec(x, rows):
    """Inverse of :func:`vec`: reshape ``x`` into a matrix with ``rows`` rows."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise DimensionError("unvec expects a 1-D vector")
    rows = int(rows)
    if rows <= 0 or x.size % rows:
        raise DimensionError(f"length {x.size} is not divisible by rows={rows}")
    return x.reshape((rows, x.size // rows), order="F").copy()


def linear_to_pair(t, n):
    """Decode a 1-based column-major linear index into a 1-based ``(row, col)``.

    ``t = (col - 1) * n + row``, so ``linear_to_pair(35, 10) == (5, 4)``.
    """
    if not 1 <= t <= n * n:
        raise DimensionError(f"linear index {t} outside 1..{n * n}")
    return (t - 1) % n + 1, (t - 1) // n + 1


def pair_to_linear(row, col, n):
    return (col - 1) * n + row


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BandedSymmetricMatrix:
    """Real symmetric matrix with half-bandwidth ``beta``.

    Only the lower triangle is stored: ``bands[k, i] = a[i + k, i]`` for
    ``i < n - k``; trailing slots of each band are zero.
    """

    n: int
    beta: int
    bands: np.ndarray

    def __post_init__(self):
        bands = np.atleast_2d(np.asarray(self.bands, dtype=float))
        if bands.shape != (self.beta + 1, self.n):
            raise DimensionError(
                f"bands must have shape {(self.beta + 1, self.n)}, got {bands.shape}"
            )
        if not np.all(np.isfinite(bands)):
            raise ValueError("bands contain non-finite values")
        bands = bands.copy()
        for k in range(1, self.beta + 1):
            bands[k, self.n - k:] = 0.0
        object.__setattr__(self, "bands", _frozen(bands))

    @classmethod
    def from_dense(cls, A, beta=None, rtol=1e-12):
        A = np.asarray(A, dtype=float)
        _check_square(A)
        _check_symmetric(A, rtol)
        n = A.shape[0]
        if beta is None:
            beta = bandwidth(A)
        elif bandwidth(A) > beta:
            raise DimensionError(f"matrix has entries outside bandwidth {beta}")
        bands = np.zeros((beta + 1, n))
        for k in range(beta + 1):
            bands[k, : n - k] = np.diagonal(A, -k)
        return cls(n, beta, bands)

    @property
    def shape(self):
        return (self.n, self.n)

    def to_dense(self):
        A = np.diag(self.bands[0].copy())
        for k in range(1, self.beta + 1):
            d = self.bands[k, : self.n - k]
            A += np.diag(d, -k) + np.diag(d, k)
        return A

    def to_scipy(self):
        offsets, data = [0], [self.bands[0]]
        for k in range(1, self.beta + 1):
            d = self.bands[k, : self.n - k]
            data += [d, d]
            offsets += [-k, k]
        return sp.diags(data, offsets, shape=self.shape, format="csr")

    def matvec(self, x):
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise DimensionError(f"operand has {x.shape[0]} rows, expected {self.n}")
        y = self.bands[0].reshape((-1,) + (1,) * (x.ndim - 1)) * x
        for k in range(1, self.beta + 1):
            d = self.bands[k, : self.n - k].reshape((-1,) + (1,) * (x.ndim - 1))
            y[k:] += d * x[:-k]
            y[:-k] += d * x[k:]
        return y

    def __matmul__(self, other):
        return self.matvec(other)

    def __neg__(self):
        return BandedSymmetricMatrix(self.n, self.beta, -self.bands)

    def fro_norm(self):
        s = np.sum(self.bands[0] ** 2) + 2.0 * np.sum(self.bands[1:] ** 2)
        return math.sqrt(s)

    def shift(self, sigma):
        """Return ``A + sigma * I``."""
        bands = self.bands.copy()
        bands[0] += sigma
        return BandedSymmetricMatrix(self.n, self.beta, bands)


@dataclass(frozen=True)
class KroneckerSumOperator:
    """Matrix-free ``M (x) I + I (x) M`` acting on vectors of length ``k**2``.

    Applying it to ``vec(Z)`` gives ``vec(M Z + Z M^T)``; the ``k**2 x k**2``
    matrix is never formed unless :meth:`to_dense` is called.
    """

    m_factor: BandedSymmetricMatrix

    @property
    def grid(self):
        return self.m_factor.n

    @property
    def n(self):
        return self.m_factor.n ** 2

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def beta(self):
        return self.grid * self.m_factor.beta

    def matvec(self, x):
        x = np.asarray(x)
        if x.ndim == 2:
            return np.column_stack([self.matvec(c) for c in x.T])
        return kron_sum_apply(self.m_factor, x)

    def __matmul__(self, other):
        return self.matvec(other)

    def __neg__(self):
        return KroneckerSumOperator(-self.m_factor)

    def to_dense(self):
        M = self.m_factor.to_dense()
        eye = np.eye(self.grid)
        return np.kron(M, eye) + np.kron(eye, M)

    def to_scipy(self):
        M = self.m_factor.to_scipy()
        eye = sp.identity(self.grid, format="csr")
        return (sp.kron(M, eye) + sp.kron(eye, M)).tocsr()

    def fro_norm(self):
        M = self.m_factor
        trace = float(np.sum(M.bands[0]))
        return math.sqrt(2.0 * M.n * M.fro_norm() ** 2 + 2.0 * trace**2)


@dataclass(frozen=True)
class SparseMatrix:
    """Coordinate-format sparse matrix in canonical (row-major, deduplicated,
    zero-free) order. Indices are 0-based."""

    rows: int
    cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.row_idx, dtype=np.int64).ravel()
        c = np.asarray(self.col_idx, dtype=np.int64).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if not (r.size == c.size == v.size):
            raise DimensionError("triplet arrays differ in length")
        if r.size and (r.min() < 0 or r.max() >= self.rows or c.min() < 0 or c.max() >= self.cols):
            raise DimensionError("triplet index out of range")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite sparse values")
        # canonicalize: sum duplicates, drop zeros, sort row-major
        key = r * self.cols + c
        uniq, inv = np.unique(key, return_inverse=True)
        vals = np.zeros(uniq.size)
        np.add.at(vals, inv, v)
        keep = vals != 0.0
        uniq, vals = uniq[keep], vals[keep]
        for name, arr in (("row_idx", uniq // self.cols), ("col_idx", uniq % self.cols)):
            arr = arr.astype(np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "values", _frozen(vals))

    @classmethod
    def from_triplets(cls, rows, cols, triplets):
        triplets = list(triplets)
        if not triplets:
            return cls(rows, cols, [], [], [])
        r, c, v = zip(*triplets)
        return cls(rows, cols, r, c, v)

    @classmethod
    def from_dense(cls, X):
        X = np.asarray(X, dtype=float)
        r, c = np.nonzero(X)
        return cls(X.shape[0], X.shape[1], r, c, X[r, c])

    @classmethod
    def from_scipy(cls, S):
        S = sp.coo_matrix(S)
        return cls(S.shape[0], S.shape[1], S.row, S.col, S.data)

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def nnz(self):
        return int(self.values.size)

    @property
    def triplets(self):
        return list(zip(self.row_idx.tolist(), self.col_idx.tolist(), self.values.tolist()))

    def to_dense(self):
        X = np.zeros(self.shape)
        X[self.row_idx, self.col_idx] = self.values
        return X

    def to_scipy(self):
        return sp.csr_matrix((self.values, (self.row_idx, self.col_idx)), shape=self.shape)

    def transpose(self):
        return SparseMatrix(self.cols, self.rows, self.col_idx, self.row_idx, self.values)

    @property
    def T(self):
        return self.transpose()

    def is_symmetric(self):
        if self.rows != self.cols:
            return False
        t = self.transpose()
        return (
            np.array_equal(t.row_idx, self.row_idx)
            and np.array_equal(t.col_idx, self.col_idx)
            and np.array_equal(t.values, self.values)
        )

    def fro_norm(self):
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class EigenDecomposition:
    """``A = vectors @ diag(values) @ vectors.T`` with ascending ``values``."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.T


def bandwidth(A):
    """Smallest ``beta`` with ``A[i, j] == 0`` whenever ``|i - j| > beta``."""
    A = np.asarray(A)
    r, c = np.nonzero(A)
    return int(np.max(np.abs(r - c))) if r.size else 0


def _check_square(A):
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")


def _check_symmetric(A, rtol=1e-12):
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > rtol * scale:
        raise SymmetryError("matrix is not symmetric")


def as_dense(A):
    """Dense ``ndarray`` view of any supported operand."""
    if isinstance(A, (BandedSymmetricMatrix, KroneckerSumOperator, SparseMatrix)):
        return A.to_dense()
    if sp.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)


def matvec_of(A):
    """Return a callable applying ``A`` to a vector or a block of columns."""
    if isinstance(A, (BandedSymmetricMatrix, KroneckerSumOperator)):
        return A.matvec
    if isinstance(A, SparseMatrix):
        S = A.to_scipy()
        return lambda x: S @ x
    if sp.issparse(A) or isinstance(A, np.ndarray):
        return lambda x: A @ x
    if hasattr(A, "matvec"):
        return lambda x: A.matvec(x) if np.ndim(x) == 1 else A.matmat(x)
    if callable(A):
        return A
    raise TypeError(f"unsupported operator type {type(A).__name__}")


def fro_norm_of(A):
    """Frobenius norm when cheaply available, else ``None``."""
    if isinstance(A, (BandedSymmetricMatrix, KroneckerSumOperator, SparseMatrix)):
        return A.fro_norm()
    if sp.issparse(A):
        return float(spla.norm(A))
    if isinstance(A, np.ndarray):
        return float(np.linalg.norm(A))
    return None


def kron_sum_apply(A, x):
    """Apply ``I (x) A + A (x) I`` to ``x`` without forming the Kronecker sum.

    Equals ``vec(A @ unvec(x) + unvec(x) @ A.T)``.
    """
    x = np.asarray(x)
    if isinstance(A, BandedSymmetricMatrix):
        n = A.n
        if x.shape != (n * n,):
            raise DimensionError(f"expected vector of length {n * n}, got shape {x.shape}")
        Z = x.reshape((n, n), order="F")
        return vec(A.matvec(Z) + A.matvec(Z.T).T)
    A = as_dense(A)
    _check_square(A)
    n = A.shape[0]
    if x.shape != (n * n,):
        raise DimensionError(f"expected vector of length {n * n}, got shape {x.shape}")
    Z = x.reshape((n, n), order="F")
    return vec(A @ Z + Z @ A.T)


# ---------------------------------------------------------------------------
# symmetric eigensolver


def _householder_tridiagonalize(A):
    """Reduce symmetric ``A`` to tridiagonal form ``Q^T A Q``.

    Returns ``(diag, offdiag, Q)``.
    """
    a = np.array(A, dtype=float, copy=True)
    n = a.shape[0]
    Q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        alpha = -math.copysign(math.hypot(x[0], tail), x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = p - (v @ p) * v
        a[k + 1:, k + 1:] = sub - 2.0 * np.outer(v, w) - 2.0 * np.outer(w, v)
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v)
    return np.diagonal(a).copy(), np.diagonal(a, -1).copy(), Q


def _tridiagonal_ql(d, e, Zt, max_iter=60):
    """Implicit-shift QL on the symmetric tridiagonal ``(d, e)``.

    ``Zt`` holds the accumulated transformation by rows (``Zt = Q.T``) and is
    updated in place together with ``d``.
    """
    n = d.size
    e = np.append(e, 0.0)
    eps = np.finfo(float).eps
    # absolute floor: off-diagonals below eps*||T|| are noise either way
    floor = eps * float(np.max(np.abs(d) + np.abs(e))) if n else 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd or abs(e[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise LyapunovError(f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = Zt[i + 1].copy()
                Zt[i + 1] = s * Zt[i] + c * zi1
                Zt[i] = c * Zt[i] - s * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def sym_eig(A):
    """Eigendecomposition of a real symmetric matrix.

    Householder reduction to tridiagonal form followed by implicit-shift QL
    with accumulated rotations.  Tridiagonal banded input skips the
    reduction.  Eigenvalues are returned in ascending order.
    """
    if isinstance(A, BandedSymmetricMatrix) and A.beta <= 1:
        n = A.n
        d = A.bands[0].copy()
        e = A.bands[1, : n - 1].copy() if A.beta == 1 else np.zeros(max(n - 1, 0))
        Q = np.eye(n)
    else:
        A = as_dense(A)
        _check_square(A)
        if not np.all(np.isfinite(A)):
            raise ValueError("matrix contains non-finite values")
        _check_symmetric(A)
        A = 0.5 * (A + A.T)
        d, e, Q = _householder_tridiagonalize(A)
    Zt = np.ascontiguousarray(Q.T)
    if d.size > 1:
        _tridiagonal_ql(d, e, Zt)
    order = np.argsort(d, kind="stable")
    values = _frozen(d[order])
    vectors = _frozen(Zt[order].T)
    return EigenDecomposition(values, vectors)


# ---------------------------------------------------------------------------
# generators


def tridiag(n, sub, diag, sup=None):
    """``tridiag(sub, diag, sup)`` of order ``n``.

    Symmetric input (``sup`` omitted or equal to ``sub``) gives a
    :class:`BandedSymmetricMatrix`; otherwise a dense ``ndarray``.
    """
    if sup is None or sup == sub:
        bands = np.zeros((2, n))
        bands[0] = diag
        bands[1, : n - 1] = sub
        return BandedSymmetricMatrix(n, 1, bands)
    return diag * np.eye(n) + sub * np.eye(n, k=-1) + sup * np.eye(n, k=1)


def laplacian2d(k):
    """Five-point stiffness matrix on a ``k x k`` grid, ``T (x) I + I (x) T``
    with ``T = tridiag(-1, 2, -1)`` (unscaled, SPD)."""
    return KroneckerSumOperator(tridiag(k, -1.0, 2.0))
