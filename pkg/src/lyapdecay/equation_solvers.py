"""Dense solvers for ``A X + X A^T = D``.

* :func:`solve_kron_oracle` assembles the Kronecker sum ``I (x) A + A (x) I``
  and solves the ``n^2`` linear system. It is slow and exists to check the
  other solvers; it does not use :func:`lyapdecay.core.sym_eig`.
* :func:`solve_spectral` diagonalizes ``A`` once and divides entrywise.
* :func:`solve_integral_resolvent` and :func:`solve_integral_exponential`
  evaluate the two integral representations by quadrature.

The integral representations

    (1/2pi) int (i w I - A)^{-1} D (i w I - A)^{-H} dw,   int_0^inf e^{At} D e^{A^T t} dt

converge only for stable ``A`` (all eigenvalues negative), and for such
``A`` both equal ``-X``.  The integral solvers therefore return the negated
integral, so every solver in this module returns the solution of the same
equation.  For SPD coefficients use :func:`solve_via_stable`, which applies
``X(A, D) = -X(-A, D)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import roots_legendre

from .core import EigenDecomposition, as_dense, linear_to_pair, sym_eig
from .errors import (
    ConventionError,
    DimensionError,
    QuadratureError,
    SizeLimitError,
    SolvabilityError,
)

__all__ = [
    "QuadratureSpec",
    "SolveReport",
    "ORACLE_CAP",
    "SINGULARITY_RTOL",
    "solve_kron_oracle",
    "solve_spectral",
    "solve_integral_resolvent",
    "solve_integral_exponential",
    "resolvent_integral",
    "exponential_integral",
    "solve_via_stable",
    "lyapunov_residual",
    "solve_with_report",
    "refinement_history",
    "inverse_kron_column",
]

ORACLE_CAP = 100
SINGULARITY_RTOL = 1e-13
_DENSE_ORACLE_MAX = 1600


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre rule after a change of variables.

    ``node_count`` nodes are used first; the count is doubled up to
    ``refinement_limit`` times until two successive estimates agree to
    ``rtol`` (relative, max-norm).  ``refinement_limit=0`` evaluates the
    rule once with exactly ``node_count`` nodes.
    """

    node_count: int = 32
    refinement_limit: int = 6
    rtol: float = 1e-12

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError("node_count must be at least 2")
        if self.refinement_limit < 0:
            raise ValueError("refinement_limit must be nonnegative")


@dataclass
class SolveReport:
    method: str
    n: int
    residual_fro: float
    elapsed: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schema": 1,
            "method": self.method,
            "n": self.n,
            "residual_fro": self.residual_fro,
            "elapsed": self.elapsed,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["method"], d["n"], d["residual_fro"], d["elapsed"], dict(d.get("extra", {})))


@lru_cache(maxsize=64)
def _legendre(n):
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _as_rhs(D, n):
    D = as_dense(D)
    if D.shape != (n, n):
        raise DimensionError(f"right-hand side has shape {D.shape}, expected {(n, n)}")
    return D


def lyapunov_residual(A, X, D):
    """``||A X + X A^T - D||_F`` for dense operands."""
    A = as_dense(A)
    X = as_dense(X)
    D = as_dense(D)
    return float(np.linalg.norm(A @ X + X @ A.T - D))


def _check_pair_sums(values, scale, tol=SINGULARITY_RTOL):
    s = values[:, None] + values[None, :]
    bad = np.abs(s) <= tol * scale
    if np.any(bad):
        i, j = map(int, np.argwhere(bad)[0])
        raise SolvabilityError(
            f"eigenvalue pair ({i}, {j}) sums to {s[i, j]:.3e}; "
            "the Lyapunov operator is singular",
            pair=(i, j),
            value=complex(s[i, j]),
        )
    return s


def solve_kron_oracle(A, D, cap=ORACLE_CAP):
    """Solve through the assembled ``n^2 x n^2`` Kronecker sum.

    Works for general (also nonsymmetric) real ``A``.  Systems up to
    1600 unknowns are factorized densely, larger ones through a sparse LU of
    the assembled operator.
    """
    A = as_dense(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected square A, got shape {A.shape}")
    n = A.shape[0]
    if n > cap:
        raise SizeLimitError(f"n={n} exceeds the oracle cap {cap}")
    D = _as_rhs(D, n)
    if np.allclose(A, A.T, rtol=0, atol=1e-14 * max(np.max(np.abs(A)), 1.0)):
        lam = np.linalg.eigvalsh(0.5 * (A + A.T))
    else:
        lam = np.linalg.eigvals(A)
    _check_pair_sums(lam, np.max(np.abs(lam)) if lam.size else 1.0)
    b = D.reshape(-1, order="F")
    if n * n <= _DENSE_ORACLE_MAX:
        eye = np.eye(n)
        K = np.kron(eye, A) + np.kron(A, eye)
        x = np.linalg.solve(K, b)
    else:
        As = sp.csr_matrix(A)
        eye = sp.identity(n, format="csr")
        K = (sp.kron(eye, As) + sp.kron(As, eye)).tocsc()
        x = spla.spsolve(K, b)
    return x.reshape((n, n), order="F")


def _eig_of(A, eig):
    if eig is not None:
        return eig
    return sym_eig(A)


def solve_spectral(A, D, eig: EigenDecomposition | None = None):
    """Solve by diagonalizing ``A = U diag(lam) U^T``.

    ``X = U Xt U^T`` with ``Xt[i, j] = (U^T D U)[i, j] / (lam_i + lam_j)``.
    For symmetric ``D`` the result is symmetric bit for bit.  A precomputed
    decomposition may be passed as ``eig`` to amortize it over many
    right-hand sides.
    """
    eig = _eig_of(A, eig)
    lam, U = eig.values, eig.vectors
    n = lam.size
    D = _as_rhs(D, n)
    scale = np.max(np.abs(lam)) if n else 1.0
    s = _check_pair_sums(lam, scale)
    Dt = U.T @ D @ U
    symmetric = np.array_equal(D, D.T)
    if symmetric:
        Dt = 0.5 * (Dt + Dt.T)
    X = U @ (Dt / s) @ U.T
    if symmetric:
        X = 0.5 * (X + X.T)
    return X


def solve_via_stable(solver, A, D, *args, **kwargs):
    """Solve with an SPD (anti-stable) ``A`` through a stable-only solver:
    ``X(A, D) = -solver(-A, D)``."""
    return -solver(-as_dense(A), D, *args, **kwargs)


def _stable_eig(A, eig):
    eig = _eig_of(A, eig)
    if eig.values.size and eig.values[-1] >= 0:
        raise ConventionError(
            f"coefficient has eigenvalue {eig.values[-1]:.3e} >= 0; the integral "
            "forms need a stable matrix. Pass -A (see solve_via_stable)."
        )
    return eig


def _refine(weights_at, q: QuadratureSpec, label, history=None):
    """Evaluate ``weights_at(N)`` at ``N = node_count * 2**k`` until converged.

    Every evaluated ``(N, W)`` is appended to ``history`` when given.
    """
    if history is not None:
        inner = weights_at

        def weights_at(N):
            W = inner(N)
            history.append((N, W))
            return W

    N = q.node_count
    W = weights_at(N)
    if q.refinement_limit == 0:
        return W, N, None
    err = None
    for _ in range(q.refinement_limit):
        N *= 2
        W2 = weights_at(N)
        err = np.max(np.abs(W2 - W)) / max(np.max(np.abs(W2)), np.finfo(float).tiny)
        W = W2
        if err <= q.rtol:
            return W, N, err
    raise QuadratureError(
        f"{label} quadrature not converged after {q.refinement_limit} doublings "
        f"({N} nodes, last relative change {err:.3e})",
        estimate=W,
        error_estimate=err,
    )


def _resolvent_weights(lam, N):
    """Entrywise value of (1/2pi) int 1/((iw - l_k)(-iw - l_l)) dw, with
    w = c tan(theta) and c = |lam_max|."""
    c = abs(lam[-1])
    x, wts = _legendre(N)
    theta = 0.5 * np.pi * x
    wt = 0.5 * np.pi * wts
    omega = c * np.tan(theta)
    jac = wt * c / np.cos(theta) ** 2
    W = np.zeros((lam.size, lam.size))
    for om, j in zip(omega, jac):
        r = 1.0 / (1j * om - lam)
        W += j * np.real(np.outer(r, np.conj(r)))
    return W / (2.0 * np.pi)


def _exponential_weights(lam, N):
    """Entrywise value of int_0^inf exp((l_k + l_l) t) dt, with
    t = c u / (1 - u) on (0, 1) and c = 1 / sqrt(|lam_min lam_max|)."""
    c = 1.0 / np.sqrt(abs(lam[0] * lam[-1]))
    x, wts = _legendre(N)
    u = 0.5 * (x + 1.0)
    t = c * u / (1.0 - u)
    jac = 0.5 * wts * c / (1.0 - u) ** 2
    W = np.zeros((lam.size, lam.size))
    for tk, j in zip(t, jac):
        e = np.exp(lam * tk)
        W += j * np.outer(e, e)
    return W


def _integral(A, D, q, eig, weights, label, history=None):
    eig = _stable_eig(A, eig)
    lam, U = eig.values, eig.vectors
    D = _as_rhs(D, lam.size)
    W, nodes, err = _refine(lambda N: weights(lam, N), q, label, history)
    Dt = U.T @ D @ U
    symmetric = np.array_equal(D, D.T)

    def assemble(W):
        Xint = U @ (W * Dt) @ U.T
        return 0.5 * (Xint + Xint.T) if symmetric else Xint

    if history is not None:
        history[:] = [(N, -assemble(Wk)) for N, Wk in history]
    return assemble(W), nodes, err


def resolvent_integral(A, D, q: QuadratureSpec = QuadratureSpec(), eig=None):
    """Quadrature value of (1/2pi) int (i w I - A)^{-1} D (i w I - A)^{-H} dw
    for stable symmetric ``A``.

    The resolvents are applied through one eigendecomposition of ``A``
    reused at every node.
    """
    return _integral(A, D, q, eig, _resolvent_weights, "resolvent")[0]


def exponential_integral(A, D, q: QuadratureSpec = QuadratureSpec(), eig=None):
    """Quadrature value of int_0^inf e^{At} D e^{A^T t} dt for stable
    symmetric ``A``; the exponentials come from one eigendecomposition."""
    return _integral(A, D, q, eig, _exponential_weights, "exponential")[0]


def solve_integral_resolvent(A, D, q: QuadratureSpec = QuadratureSpec(), eig=None):
    """Solve ``A X + X A^T = D`` (stable ``A``) as minus the resolvent integral."""
    return -resolvent_integral(A, D, q, eig)


def solve_integral_exponential(A, D, q: QuadratureSpec = QuadratureSpec(), eig=None):
    """Solve ``A X + X A^T = D`` (stable ``A``) as minus the exponential integral."""
    return -exponential_integral(A, D, q, eig)


def refinement_history(A, D, kind="resolvent", q: QuadratureSpec = QuadratureSpec()):
    """Solutions produced by each rule the refinement loop evaluated.

    Returns a list of ``(node_count, X)`` in evaluation order, where ``X``
    is the integral solver's answer for that rule.  Useful for watching the
    error fall under node doubling.
    """
    weights = {"resolvent": _resolvent_weights, "exponential": _exponential_weights}[kind]
    history = []
    try:
        _integral(A, D, q, None, weights, kind, history)
    except QuadratureError:
        pass
    return history


def inverse_kron_column(A, t, method="spectral"):
    """Column ``t`` (1-based, column-major) of ``(I (x) A + A (x) I)^{-1}``.

    It equals ``vec(X)`` for the unit right-hand side ``e_t1 e_t2^T`` with
    ``t = (t2 - 1) n + t1``.
    """
    A = as_dense(A)
    n = A.shape[0]
    t1, t2 = linear_to_pair(t, n)
    D = np.zeros((n, n))
    D[t1 - 1, t2 - 1] = 1.0
    X = _METHODS[method](A, D)
    return X.reshape(-1, order="F")


_METHODS = {
    "oracle": solve_kron_oracle,
    "spectral": solve_spectral,
    "resolvent": solve_integral_resolvent,
    "exponential": solve_integral_exponential,
}


def solve_with_report(A, D, method="spectral", **kwargs):
    """Run one of the dense solvers and time it.

    The integral methods accept SPD ``A`` here as well; they are then routed
    through :func:`solve_via_stable`.
    """
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(_METHODS)}")
    Ad = as_dense(A)
    Dd = as_dense(D)
    extra = {}
    t0 = time.perf_counter()
    if method in ("resolvent", "exponential") and np.max(np.linalg.eigvalsh(Ad)) > 0:
        X = solve_via_stable(_METHODS[method], Ad, Dd, **kwargs)
        extra["convention"] = "spd-bridge"
    else:
        X = _METHODS[method](Ad, Dd, **kwargs)
    elapsed = time.perf_counter() - t0
    res = lyapunov_residual(Ad, X, Dd)
    extra["relative_residual"] = res / max(np.linalg.norm(Dd), np.finfo(float).tiny)
    return X, SolveReport(method, Ad.shape[0], res, elapsed, extra)

