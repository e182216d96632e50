"""Galerkin projection onto a Krylov space for ``A X + X A = b b^T``.

The basis ``V_m`` of ``span{b, Ab, ..., A^{m-1} b}`` is built by Lanczos
with full reorthogonalization, giving ``A V = V T + t v e_m^T`` with ``T``
symmetric tridiagonal.  The reduced equation

    T Y + Y T = ||b||^2 e_1 e_1^T

is solved from scratch each step and the residual norm is obtained without
forming ``X`` through ``||R||_F = sqrt(2) |t| ||Y e_m||_2``.

Both sign conventions are accepted.  For stable ``A`` (negative definite)
``Y`` and ``X`` are negative semidefinite, for SPD ``A`` they are positive
semidefinite; :class:`LowRankFactor` keeps the sign next to each column.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import as_dense, fro_norm_of, matvec_of
from .decay_bounds import y_lastcol_bound
from .equation_solvers import solve_spectral
from .errors import DimensionError, IndefiniteFactorWarning, LyapunovError, UnboundedError

__all__ = [
    "KrylovDecomposition",
    "LowRankFactor",
    "TraceRecord",
    "ConvergenceTrace",
    "lanczos_extend",
    "galerkin_solve",
    "residual_explicit",
    "truncate_factor",
]

BREAKDOWN_RTOL = 1e-14


@dataclass(frozen=True)
class KrylovDecomposition:
    """State of the Lanczos process after ``m`` steps.

    ``A V = V T + v_next * t_next * e_m^T``.  ``b_norm`` is ``||b||`` so that
    ``b = V[:, 0] * b_norm``.
    """

    V: np.ndarray
    T: np.ndarray
    t_next: float
    v_next: np.ndarray
    b_norm: float
    a_norm: float
    breakdown: bool = False

    @property
    def m(self):
        return self.V.shape[1]

    @property
    def n(self):
        return self.V.shape[0]

    def orthonormality_error(self):
        return float(np.linalg.norm(self.V.T @ self.V - np.eye(self.m)))

    def relation_residual(self, A):
        """``||A V - V T - v t e_m^T||_F``."""
        AV = matvec_of(A)(self.V)
        R = AV - self.V @ self.T
        R[:, -1] -= self.t_next * self.v_next
        return float(np.linalg.norm(R))


def _gram_schmidt_twice(V, w):
    for _ in range(2):
        w = w - V @ (V.T @ w)
    return w


def lanczos_extend(A, state: KrylovDecomposition | None = None, b=None) -> KrylovDecomposition:
    """Add one basis vector.  Start from ``b`` when ``state`` is ``None``.

    The new state shares its first ``m`` columns with the old one.  A
    breakdown (``|t_next| <= 1e-14 ||A||_F``) is recorded in the returned
    state; extending such a state raises :class:`LyapunovError`.
    """
    apply = matvec_of(A)
    if state is None:
        if b is None:
            raise ValueError("need a starting vector b for an empty state")
        b = np.asarray(b, dtype=float).ravel()
        b_norm = float(np.linalg.norm(b))
        if b_norm == 0.0:
            raise ValueError("starting vector is zero")
        a_norm = fro_norm_of(A)
        if a_norm is None:
            a_norm = float(np.linalg.norm(as_dense(A)))
        v = b / b_norm
        V = v[:, None]
        T = np.zeros((0, 0))
    else:
        if state.breakdown:
            raise LyapunovError("cannot extend past a breakdown: the space is invariant")
        V = np.column_stack([state.V, state.v_next])
        T = state.T
        b_norm, a_norm = state.b_norm, state.a_norm
        v = state.v_next

    m = V.shape[1]
    w = np.asarray(apply(v), dtype=float)
    if w.shape != v.shape:
        raise DimensionError("operator and starting vector sizes differ")
    alpha = float(v @ w)
    w = _gram_schmidt_twice(V, w)
    t_next = float(np.linalg.norm(w))

    T_new = np.zeros((m, m))
    T_new[: m - 1, : m - 1] = T
    T_new[m - 1, m - 1] = alpha
    if m > 1:
        T_new[m - 1, m - 2] = T_new[m - 2, m - 1] = state.t_next

    breakdown = t_next <= BREAKDOWN_RTOL * a_norm
    v_next = np.zeros_like(w) if breakdown else w / t_next
    if breakdown:
        t_next = 0.0
    return KrylovDecomposition(V, T_new, t_next, v_next, b_norm, a_norm, breakdown)


@dataclass
class LowRankFactor:
    """``X = Z diag(signs) Z^T``."""

    Z: np.ndarray
    signs: np.ndarray
    truncation_tol: float = 0.0

    def __post_init__(self):
        self.Z = np.asarray(self.Z, dtype=float)
        if self.Z.ndim != 2:
            raise DimensionError("factor must be two-dimensional")
        self.signs = np.asarray(self.signs, dtype=float).ravel()
        if self.signs.size != self.Z.shape[1]:
            raise DimensionError("one sign per column is required")

    @property
    def rank(self):
        return self.Z.shape[1]

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def definite_sign(self):
        """+1 or -1 when all columns share a sign, 0 otherwise (or when empty)."""
        if self.rank == 0:
            return 0
        if np.all(self.signs > 0):
            return 1
        if np.all(self.signs < 0):
            return -1
        return 0

    def to_dense(self):
        return (self.Z * self.signs) @ self.Z.T

    def matvec(self, x):
        return (self.Z * self.signs) @ (self.Z.T @ x)


def truncate_factor(Y, V=None, tol=1e-14) -> LowRankFactor:
    """Low-rank factor of ``V Y V^T`` from the eigendecomposition of ``Y``.

    Eigenvalues with ``|lam| < tol * max|lam|`` are dropped and
    ``Z = V Q diag(sqrt|lam|)``.  A warning is issued when eigenvalues of
    both signs exceed ``max(tol, m * eps) * max|lam|`` in magnitude.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        raise DimensionError("Y must be square")
    if not np.allclose(Y, Y.T, rtol=1e-12, atol=1e-14 * max(np.abs(Y).max(initial=0.0), 1e-300)):
        raise ValueError("Y must be symmetric")
    lam, Q = np.linalg.eigh(0.5 * (Y + Y.T))
    scale = np.abs(lam).max(initial=0.0)
    keep = np.abs(lam) >= tol * scale if scale > 0 else np.zeros(lam.size, bool)
    lam, Q = lam[keep], Q[:, keep]
    order = np.argsort(-np.abs(lam), kind="stable")
    lam, Q = lam[order], Q[:, order]
    # eigenvalues of opposite sign below roundoff level do not count
    noise = max(tol, Y.shape[0] * np.finfo(float).eps) * scale
    if np.any(lam > noise) and np.any(lam < -noise):
        warnings.warn(
            "matrix is indefinite; factor columns carry individual signs",
            IndefiniteFactorWarning,
            stacklevel=2,
        )
    Z = Q * np.sqrt(np.abs(lam))
    if V is not None:
        V = np.asarray(V, dtype=float)
        if V.shape[1] != Y.shape[0]:
            raise DimensionError("basis and Y sizes differ")
        Z = V @ Z
    return LowRankFactor(Z, np.sign(lam), tol)


def residual_explicit(A, X, D):
    """``||A X + X A^T - D||_F`` from the assembled residual.

    ``X`` may be dense or a :class:`LowRankFactor`; ``D`` may be a matrix or
    a vector ``b`` standing for ``b b^T``.
    """
    apply = matvec_of(A)
    D = np.asarray(as_dense(D) if not isinstance(D, np.ndarray) else D, dtype=float)
    if D.ndim == 1:
        D = np.outer(D, D)
    if isinstance(X, LowRankFactor):
        if X.n != D.shape[0]:
            raise DimensionError("factor and right-hand side sizes differ")
        AZ = np.asarray(apply(X.Z)).reshape(X.Z.shape)
        ZS = X.Z * X.signs
        R = AZ @ ZS.T + ZS @ AZ.T - D
    else:
        X = as_dense(X)
        if X.shape != D.shape:
            raise DimensionError(f"X has shape {X.shape}, D has shape {D.shape}")
        AX = np.asarray(apply(X))
        R = AX + np.asarray(apply(np.ascontiguousarray(X.T))).T - D
    return float(np.linalg.norm(R))


@dataclass(frozen=True)
class TraceRecord:
    m: int
    residual_norm: float
    t_next: float
    ye_norm: float
    predicted_bound: float


def _json_float(x):
    # NaN and inf are not valid JSON; both mean "no estimate"
    return None if isinstance(x, float) and not math.isfinite(x) else x


_TRACE_FIELDS = ("m", "residual_norm", "t_next", "ye_norm", "predicted_bound")


@dataclass
class ConvergenceTrace:
    records: list = field(default_factory=list)
    convention: str = "stable"
    converged: bool = False
    breakdown: bool = False
    tol: float = 0.0
    Y: np.ndarray | None = None
    krylov: KrylovDecomposition | None = None

    def __len__(self):
        return len(self.records)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def to_dict(self):
        return {
            "schema": 1,
            "convention": self.convention,
            "converged": self.converged,
            "breakdown": self.breakdown,
            "tol": self.tol,
            "records": [
                {k: _json_float(getattr(r, k)) for k in _TRACE_FIELDS} for r in self.records
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_dict(cls, d):
        recs = [
            TraceRecord(**{k: math.nan if v is None else v for k, v in r.items()})
            for r in d["records"]
        ]
        return cls(recs, d["convention"], d["converged"], d["breakdown"], d["tol"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_TRACE_FIELDS)
        for r in self.records:
            w.writerow([r.m] + [repr(float(getattr(r, k))) for k in _TRACE_FIELDS[1:]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, **kwargs):
        rows = list(csv.DictReader(io.StringIO(text)))
        recs = [
            TraceRecord(int(r["m"]), *(float(r[k]) for k in _TRACE_FIELDS[1:])) for r in rows
        ]
        return cls(recs, **kwargs)


def _predicted(T, m, b_norm, t_next):
    if m <= 3:
        return math.nan
    theta = np.abs(np.linalg.eigvalsh(T))
    lo, hi = float(theta.min()), float(theta.max())
    if not 0 < lo < hi:
        return math.nan
    try:
        return math.sqrt(2.0) * abs(t_next) * y_lastcol_bound(m, lo, hi, b_norm)
    except (UnboundedError, LyapunovError):
        return math.inf


def galerkin_solve(A, b, tol=1e-8, m_max=100, truncation_tol=1e-14, predict=False):
    """Projection solver for ``A X + X A = b b^T`` with symmetric definite ``A``.

    Iterates until ``||R||_F <= tol * ||b||^2``, a breakdown, or ``m_max``.
    Returns ``(LowRankFactor, ConvergenceTrace)``; ``trace.converged`` is
    False when ``m_max`` was hit first.  With ``predict=True`` every record
    also carries the a-priori residual estimate built from the last-column
    bound on ``Y`` (``nan`` for ``m <= 3``).
    """
    b = np.asarray(b, dtype=float).ravel()
    state = lanczos_extend(A, b=b)
    target = tol * state.b_norm**2
    trace = ConvergenceTrace(tol=tol)
    while True:
        m = state.m
        rhs = np.zeros((m, m))
        rhs[0, 0] = state.b_norm**2
        Y = solve_spectral(state.T, rhs)
        ye = float(np.linalg.norm(Y[:, -1]))
        res = math.sqrt(2.0) * abs(state.t_next) * ye
        pred = _predicted(state.T, m, state.b_norm, state.t_next) if predict else math.nan
        trace.records.append(TraceRecord(m, res, state.t_next, ye, pred))
        if state.breakdown or res <= target:
            trace.converged = True
            trace.breakdown = state.breakdown
            break
        if m >= m_max:
            break
        state = lanczos_extend(A, state)
    trace.convention = "stable" if state.T[0, 0] < 0 else "spd"
    trace.Y = Y
    trace.krylov = state
    return truncate_factor(Y, state.V, truncation_tol), trace
