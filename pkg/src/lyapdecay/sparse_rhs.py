"""Sparse right-hand sides: split ``D`` into rank-one terms, solve each term,
sum, and threshold the result.

By linearity ``X = sum_j X_j`` where ``A X_j + X_j A = D_j``.  For symmetric
``D`` the pairs ``(i, j)`` and ``(j, i)`` are merged into one term with
right-hand side ``d_ij (e_i e_j^T + e_j e_i^T)`` so that every partial sum is
symmetric.  Terms are always accumulated in plan order, so results do not
depend on the number of worker threads.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .core import SparseMatrix, as_dense, sym_eig
from .decay_bounds import DecayEnvelope, SegmentSpec, entry_bound_table
from .equation_solvers import solve_spectral
from .errors import DimensionError, LyapunovError, TermFailureError
from .krylov import galerkin_solve

__all__ = [
    "SplitTerm",
    "SplitPlan",
    "SparsifyReport",
    "split_solve",
    "split_solve_dense",
    "threshold_sparsify",
    "predict_pattern",
]

SV_ZERO = 1e-14


@dataclass(frozen=True)
class SplitTerm:
    i: int
    j: int
    value: float
    fused: bool = False

    def matrix(self, n):
        M = np.zeros((n, n))
        M[self.i, self.j] += self.value
        if self.fused:
            M[self.j, self.i] += self.value
        return M


@dataclass(frozen=True)
class SplitPlan:
    """Rank-one terms (0-based indices) whose matrices sum to ``D``."""

    n: int
    terms: tuple
    per_term_solver: str = "spectral"

    @classmethod
    def from_rhs(cls, D, per_term_solver="spectral", fuse=True):
        D = _as_sparse(D)
        if D.rows != D.cols:
            raise DimensionError("right-hand side must be square")
        fuse = fuse and D.is_symmetric()
        terms = []
        for i, j, v in D.triplets:
            if fuse and i > j:
                continue
            terms.append(SplitTerm(int(i), int(j), float(v), fused=fuse and i != j))
        return cls(D.rows, tuple(terms), per_term_solver)

    def __len__(self):
        return len(self.terms)

    def to_dense(self):
        D = np.zeros((self.n, self.n))
        for term in self.terms:
            D[term.i, term.j] += term.value
            if term.fused:
                D[term.j, term.i] += term.value
        return D


@dataclass
class SparsifyReport:
    threshold: float
    nnz_before: int
    nnz_after: int
    dropped_fro: float
    dropped_2: float
    singular_values_above_threshold: int
    singular_values_nonzero: int

    def to_dict(self):
        return {"schema": 1, **asdict(self)}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        d = {k: v for k, v in d.items() if k != "schema"}
        return cls(**d)


def _as_sparse(D):
    if isinstance(D, SparseMatrix):
        return D
    if sp.issparse(D):
        return SparseMatrix.from_scipy(D)
    return SparseMatrix.from_dense(np.asarray(D, dtype=float))


def threshold_sparsify(X, tau):
    """Zero every entry with ``|x| < tau`` and report what was lost.

    Singular values of the result are counted both above ``tau`` and above
    ``1e-14``.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    X = as_dense(X)
    keep = np.abs(X) >= tau
    Xt = np.where(keep, X, 0.0)
    E = X - Xt
    sv = np.linalg.svd(Xt, compute_uv=False) if Xt.size else np.zeros(0)
    report = SparsifyReport(
        threshold=float(tau),
        nnz_before=int(np.count_nonzero(X)),
        nnz_after=int(np.count_nonzero(Xt)),
        dropped_fro=float(np.linalg.norm(E)),
        dropped_2=float(np.linalg.norm(E, 2)) if E.size else 0.0,
        singular_values_above_threshold=int(np.sum(sv > tau)),
        singular_values_nonzero=int(np.sum(sv > SV_ZERO)),
    )
    return SparseMatrix.from_dense(Xt), report


def _default_workers():
    env = os.environ.get("LYAPDECAY_THREADS")
    return int(env) if env else 1


def split_solve_dense(A, D, per_term_solver="spectral", workers=None, term_threshold=None,
                      tol=1e-12, m_max=None):
    """Dense sum of the per-term solutions.

    ``per_term_solver`` is ``"spectral"`` or ``"projection"``; the projection
    solver is used for diagonal terms only, off-diagonal terms fall back to
    the spectral solver.  With ``term_threshold`` each term is thresholded
    before being added.
    """
    plan = D if isinstance(D, SplitPlan) else SplitPlan.from_rhs(D, per_term_solver)
    if per_term_solver not in ("spectral", "projection"):
        raise ValueError(f"unknown per-term solver {per_term_solver!r}")
    Ad = as_dense(A)
    n = plan.n
    if Ad.shape != (n, n):
        raise DimensionError(f"A has shape {Ad.shape}, D is {n} x {n}")
    eig = sym_eig(Ad)
    if m_max is None:
        m_max = n

    def solve_term(term):
        if per_term_solver == "projection" and term.i == term.j:
            b = np.zeros(n)
            b[term.i] = np.sqrt(abs(term.value))
            factor, _ = galerkin_solve(A, b, tol=tol, m_max=m_max)
            Xj = np.sign(term.value) * factor.to_dense()
        else:
            Xj = solve_spectral(Ad, term.matrix(n), eig=eig)
        if term_threshold is not None:
            Xj = np.where(np.abs(Xj) < term_threshold, 0.0, Xj)
        return Xj

    def guarded(k_term):
        k, term = k_term
        try:
            return k, solve_term(term), None
        except LyapunovError as exc:
            return k, None, exc

    workers = _default_workers() if workers is None else workers
    jobs = list(enumerate(plan.terms))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(guarded, jobs))
    else:
        results = [guarded(job) for job in jobs]

    failures = [(k, exc) for k, _, exc in results if exc is not None]
    if failures:
        raise TermFailureError(failures)
    X = np.zeros((n, n))
    for _, Xj, _ in results:
        X += Xj
    return X


def split_solve(A, D, threshold=0.0, per_term_solver="spectral", workers=None,
                truncate_terms=False, **kwargs):
    """Solve ``A X + X A = D`` term by term and threshold the sum.

    Returns ``(SparseMatrix, SparsifyReport)``.  ``truncate_terms=True``
    also thresholds every term at ``threshold`` before it is added.
    """
    X = split_solve_dense(
        A,
        D,
        per_term_solver=per_term_solver,
        workers=workers,
        term_threshold=threshold if truncate_terms else None,
        **kwargs,
    )
    return threshold_sparsify(X, threshold)


def predict_pattern(A_spec: SegmentSpec, D, tau, q=None):
    """Certified sparsity mask from the superposed entry bounds.

    The bound for ``X`` is ``sum |d_ij| * bound(k; (i, j))`` over the nonzeros
    of ``D``; entries whose bound is below ``tau`` are marked negligible.
    """
    lam_min, lam_max = A_spec.real_extremes
    D = _as_sparse(D)
    if D.rows != D.cols:
        raise DimensionError("right-hand side must be square")
    n = D.rows
    kwargs = {} if q is None else {"q": q}
    T = entry_bound_table(lam_min, lam_max, A_spec.beta, n, **kwargs)
    idx = np.arange(n)
    bounds = np.zeros((n, n))
    for i, j, v in D.triplets:
        bounds += abs(v) * T[np.abs(idx - i)[:, None], np.abs(idx - j)[None, :]]
    meta = np.full((n, n), "superposed", dtype=object)
    return DecayEnvelope(
        (n, n),
        bounds,
        meta,
        negligible=bounds < tau,
        info={"tau": float(tau), "terms": int(D.nnz)},
    )
