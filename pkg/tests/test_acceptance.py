"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also repeated in the terminal summary.  ``python3 tests/test_acceptance.py``
runs the gate without pytest.
"""

import sys

import numpy as np

from lyapdecay import laplacian2d, tridiag
from lyapdecay.core import as_dense, linear_to_pair
from lyapdecay.decay_bounds import (
    SegmentSpec,
    demko_bound,
    entry_bound,
    freund_bound,
    kron_decay_envelope,
    y_diag_bound,
    y_lastcol_bound,
)
from lyapdecay.equation_solvers import (
    QuadratureSpec,
    inverse_kron_column,
    lyapunov_residual,
    refinement_history,
    solve_integral_exponential,
    solve_integral_resolvent,
    solve_kron_oracle,
    solve_spectral,
)
from lyapdecay.krylov import galerkin_solve, residual_explicit
from lyapdecay.sparse_rhs import split_solve, threshold_sparsify

RESULTS = {}
SEED = 42
ROUNDOFF_FLOOR = 1e-14


def record(number, title, ok, detail):
    line = f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def _random_spd_banded(rng, n, beta):
    A = np.zeros((n, n))
    for k in range(beta + 1):
        d = rng.uniform(-1.0, 1.0, n - k)
        A += np.diag(d, -k)
        if k:
            A += np.diag(d, k)
    lam = np.linalg.eigvalsh(A)
    return A + (0.1 - lam[0] + rng.uniform()) * np.eye(n)


def _laplacian_setting():
    A = laplacian2d(30)
    b = np.random.default_rng(SEED).uniform(size=A.n)
    return A, b


def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(SEED)
    worst_err = worst_res = 0.0
    for _ in range(50):
        n = int(rng.integers(5, 41))
        A = _random_spd_banded(rng, n, 1)
        M = rng.standard_normal((n, n))
        D = M + M.T
        X = solve_spectral(A, D)
        Xo = solve_kron_oracle(A, D)
        nd = np.linalg.norm(D)
        worst_err = max(worst_err, np.linalg.norm(X - Xo) / np.linalg.norm(Xo))
        worst_res = max(worst_res, lyapunov_residual(A, X, D) / nd, lyapunov_residual(A, Xo, D) / nd)
    ok = worst_err <= 1e-10 and worst_res <= 1e-10
    record(1, "oracle equivalence", ok,
           f"max rel error {worst_err:.2e}, max rel residual {worst_res:.2e} (limit 1e-10)")


def test_criterion_2_example_reproduction():
    n = 100
    A = tridiag(n, -1.0, 4.0)
    B = np.zeros((n, 11))
    B[np.arange(49, 60), np.arange(11)] = 1.0
    X = solve_spectral(A, B @ B.T)
    eig_count = int(np.sum(np.linalg.eigvalsh(X) > 1e-14))
    S, rep = threshold_sparsify(X, 1e-5)
    checks = {
        "eigenvalues>1e-14 in 25+-2": abs(eig_count - 25) <= 2,
        "nnz within 10% of 219": abs(rep.nnz_after - 219) <= 21.9,
        "singular values>tau in 19+-2": abs(rep.singular_values_above_threshold - 19) <= 2,
        "||X-Xt||_2 in [1e-6,1e-4]": 1e-6 <= rep.dropped_2 <= 1e-4,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (
        f"eigenvalues>1e-14={eig_count}, nnz={rep.nnz_after}, "
        f"sv>tau={rep.singular_values_above_threshold} (sv>1e-14={rep.singular_values_nonzero}), "
        f"||X-Xt||_2={rep.dropped_2:.2e}, nnz(X)={rep.nnz_before} (reported only)"
    )
    if failed:
        detail += "; failing: " + ", ".join(failed)
    record(2, "worked example reproduction", not failed, detail)


def test_criterion_3_residual_identity():
    A, b = _laplacian_setting()
    worst = 0.0
    for m in range(1, 31):
        F, trace = galerkin_solve(A, b, tol=0.0, m_max=m, truncation_tol=0.0)
        explicit = residual_explicit(A, F, b)
        identity = trace.records[-1].residual_norm
        worst = max(worst, abs(explicit - identity) / explicit)
    record(3, "residual identity", worst <= 1e-8,
           f"max |explicit - identity| / explicit over m<=30: {worst:.2e} (limit 1e-8)")


def test_criterion_4_bound_soundness():
    rng = np.random.default_rng(SEED)
    violations = {}

    # Demko: 100 random SPD banded matrices, all entries
    v = 0
    for _ in range(100):
        n = int(rng.integers(5, 41))
        beta = int(rng.integers(1, 5))
        A = _random_spd_banded(rng, n, min(beta, n - 1))
        lam = np.linalg.eigvalsh(A)
        i = np.arange(n)
        bound = demko_bound(lam[0], lam[-1], min(beta, n - 1), i[:, None], i[None, :])
        v += int(np.sum(np.abs(np.linalg.inv(A)) > bound))
    violations["demko"] = v

    # Freund: shifted inverses, complex dense solves
    v = 0
    for _ in range(30):
        n = int(rng.integers(5, 31))
        beta = min(int(rng.integers(1, 4)), n - 1)
        A = _random_spd_banded(rng, n, beta)
        lam = np.linalg.eigvalsh(A)
        L, I = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        off = L != I
        for omega in (0.0, 0.5, 5.0):
            M = np.linalg.solve(A + 1j * omega * np.eye(n), np.eye(n))
            seg = SegmentSpec(lam[0] + 1j * omega, lam[-1] + 1j * omega, beta)
            v += int(np.sum(np.abs(M[off]) > freund_bound(seg, L[off], I[off])))
    violations["freund"] = v

    # entry bound: tridiag(-1,2,-1), n=30, five random sources, every entry
    n = 30
    T = tridiag(n, -1.0, 2.0)
    lam = np.linalg.eigvalsh(as_dense(T))
    v = 0
    for _ in range(5):
        t1, t2 = (int(x) for x in rng.integers(1, n + 1, 2))
        D = np.zeros((n, n))
        D[t1 - 1, t2 - 1] = 1.0
        X = np.abs(solve_spectral(T, D))
        for k1 in range(1, n + 1):
            for k2 in range(1, n + 1):
                v += int(X[k1 - 1, k2 - 1] > entry_bound(lam[0], lam[-1], 1, (k1, k2), (t1, t2)))
    violations["entry"] = v

    # reduced-solution bounds in the Laplacian setting
    A, b = _laplacian_setting()
    nb = float(np.linalg.norm(b))
    vd = vl = 0
    for m in range(1, 31):
        _, trace = galerkin_solve(A, b, tol=0.0, m_max=m)
        Y = trace.Y
        theta = np.abs(np.linalg.eigvalsh(trace.krylov.T))
        lo, hi = float(theta.min()), float(theta.max())
        if m > 3:
            vl += int(np.linalg.norm(Y[:, -1]) > y_lastcol_bound(m, lo, hi, nb))
        if m == 30:
            vd = sum(int(abs(Y[i - 1, i - 1]) > y_diag_bound(i, lo, hi, nb)) for i in range(2, 31))
    violations["y_diag"] = vd
    violations["y_lastcol"] = vl

    total = sum(violations.values())
    record(4, "bound soundness", total == 0,
           "violations " + ", ".join(f"{k}={v}" for k, v in violations.items()))


def test_criterion_5_case_iii_tightness():
    n = 12
    A = np.eye(n)
    rng = np.random.default_rng(SEED)
    ok = True
    details = []
    for _ in range(5):
        t1, t2 = (int(x) for x in rng.integers(1, n + 1, 2))
        bound = entry_bound(1.0, 1.0, 1, (t1, t2), (t1, t2))
        D = np.zeros((n, n))
        D[t1 - 1, t2 - 1] = 1.0
        X = solve_spectral(A, D)
        peak = float(np.abs(X).max())
        ok &= bound == 0.5 and peak == 0.5 and X[t1 - 1, t2 - 1] == 0.5
        details.append(f"({t1},{t2}): bound={bound!r} peak={peak!r}")
    record(5, "case-iii tightness", ok, "; ".join(details))


def test_criterion_6_kronecker_envelope():
    grid = 10
    M = tridiag(grid, -1.0, 2.0)
    mu = np.linalg.eigvalsh(as_dense(M))
    t1, t2 = 50, 50
    tq = ((t1 - 1) % grid + 1, (t1 - 1) // grid + 1, (t2 - 1) % grid + 1, (t2 - 1) // grid + 1)
    env = kron_decay_envelope(SegmentSpec(mu[0], mu[-1], 1), tq, grid=grid)
    A = laplacian2d(grid).to_dense()
    D = np.zeros((grid * grid, grid * grid))
    D[t1 - 1, t2 - 1] = 1.0
    X = np.abs(solve_spectral(A, D))
    violations = int(np.sum(X > env.bounds))
    ratio = float(np.max(X / env.bounds))
    record(6, "Kronecker envelope", violations == 0,
           f"violations={violations}, max |X|/bound={ratio:.3f}")


def test_criterion_7_splitting_linearity():
    n = 100
    A = tridiag(n, -1.0, 4.0)
    D = np.diag(np.random.default_rng(SEED).uniform(size=n))
    S, _ = split_solve(A, D, threshold=0.0)
    X = solve_spectral(A, D)
    err = np.linalg.norm(S.to_dense() - X) / np.linalg.norm(X)
    record(7, "splitting linearity", err <= 1e-10, f"relative error {err:.2e} (limit 1e-10)")


def test_criterion_8_quadrature():
    A = -as_dense(tridiag(30, -1.0, 4.0))
    D = np.zeros((30, 30))
    D[0, 0] = 1.0
    X = solve_spectral(A, D)
    nx = np.linalg.norm(X)
    q = QuadratureSpec()
    full = QuadratureSpec(q.node_count * 2 ** q.refinement_limit, refinement_limit=0)
    ok = True
    parts = []
    for kind, solver in (("resolvent", solve_integral_resolvent), ("exponential", solve_integral_exponential)):
        hist = refinement_history(A, D, kind, QuadratureSpec(4, q.refinement_limit, q.rtol))
        errs = [np.linalg.norm(Xn - X) / nx for _, Xn in hist]
        monotone = all(b <= a or b <= ROUNDOFF_FLOOR for a, b in zip(errs, errs[1:]))
        adaptive = np.linalg.norm(solver(A, D, q=q) - X) / nx
        at_limit = np.linalg.norm(solver(A, D, q=full) - X) / nx
        ok &= monotone and adaptive <= 1e-8 and at_limit <= 1e-8
        seq = ", ".join(f"{N}:{e:.1e}" for (N, _), e in zip(hist, errs))
        parts.append(f"{kind} adaptive {adaptive:.1e}, {full.node_count} nodes {at_limit:.1e}, "
                     f"doubling [{seq}] monotone={monotone}")
    record(8, "quadrature closed forms", ok, "; ".join(parts))


def test_criterion_9_inverse_column():
    n, t = 10, 35
    assert linear_to_pair(t, n) == (5, 4)
    T = as_dense(tridiag(n, -1.0, 2.0))
    K = np.kron(np.eye(n), T) + np.kron(T, np.eye(n))
    e = np.zeros(n * n)
    e[t - 1] = 1.0
    ref = np.linalg.solve(K, e)
    col = inverse_kron_column(T, t)
    err = float(np.max(np.abs(col - ref)))
    record(9, "inverse column correspondence", err <= 1e-10,
           f"(t1,t2)={linear_to_pair(t, n)}, max abs difference {err:.2e} (limit 1e-10)")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
