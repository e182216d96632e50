"""Command-line front end.

Subcommands: ``solve``, ``bounds``, ``pattern``, ``krylov-trace`` and
``inverse-column``.  Exit status: 0 success, 1 usage error, 2 I/O error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import core
from .core import SparseMatrix, as_dense, linear_to_pair
from .decay_bounds import SegmentSpec, demko_bound, entry_envelope, kron_decay_envelope
from .equation_solvers import (
    QuadratureSpec,
    SolveReport,
    inverse_kron_column,
    lyapunov_residual,
    solve_with_report,
)
from .errors import LyapunovError
from .fileio import read_mtx, write_grid_csv, write_json, write_mtx, write_vector_csv
from .krylov import galerkin_solve
from .sparse_rhs import split_solve_dense, threshold_sparsify

EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 1, 2, 3
METHODS = ("auto", "spectral", "oracle", "resolvent", "exponential", "projection", "split")
DEFAULT_SEED = 42


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class Problem:
    A: object
    n: int
    symmetric: bool
    generator: str
    grid: int | None = None


# ---------------------------------------------------------------------------
# inputs


def _load(path):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such file: {path}")
    try:
        return read_mtx(path)
    except ValueError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc


def _floats(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse numbers from {text!r}") from None


def build_matrix(gen=None, n=None, path=None) -> Problem:
    """Coefficient from a generator string or a Matrix Market file.

    Generators: ``tridiag:sub,diag,sup`` (``sup`` defaults to ``sub``),
    ``laplacian2d:k`` (order ``k**2``), ``identity``.
    """
    if (gen is None) == (path is None):
        raise UsageError("give exactly one of --gen and --matrix")
    if path is not None:
        M = _load(path)
        A = M.to_dense() if isinstance(M, SparseMatrix) else M
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise UsageError("coefficient matrix must be square")
        return Problem(A, A.shape[0], bool(np.array_equal(A, A.T)), f"file:{path}")
    name, _, args = gen.partition(":")
    if name == "tridiag":
        vals = _floats(args)
        if len(vals) not in (2, 3):
            raise UsageError("tridiag takes sub,diag[,sup]")
        if n is None:
            raise UsageError("tridiag needs --n")
        A = core.tridiag(n, *vals)
        sym = isinstance(A, core.BandedSymmetricMatrix)
        return Problem(A, n, sym, gen)
    if name == "laplacian2d":
        try:
            k = int(args)
        except ValueError:
            raise UsageError("laplacian2d takes the grid size k") from None
        if n is not None and n != k * k:
            raise UsageError(f"--n {n} does not match laplacian2d:{k}")
        return Problem(core.laplacian2d(k), k * k, True, gen, grid=k)
    if name == "identity":
        if n is None:
            raise UsageError("identity needs --n")
        return Problem(core.tridiag(n, 0.0, 1.0), n, True, gen)
    raise UsageError(f"unknown generator {name!r}")


def _range(text, n):
    lo, _, hi = text.partition("-")
    try:
        lo = int(lo)
        hi = int(hi) if hi else lo
    except ValueError:
        raise UsageError(f"bad index range {text!r}") from None
    if not 1 <= lo <= hi <= n:
        raise UsageError(f"index range {text!r} outside 1..{n}")
    return np.arange(lo - 1, hi)


def build_rhs(spec, n, seed=DEFAULT_SEED):
    """Right-hand side from a spec string.  Returns ``(D, B)`` where ``B``
    holds columns with ``D = B B^T`` when the spec is of that form, else
    ``None``.

    ``cols:lo-hi``, ``col:k``, ``rand-vec``, ``diag-random[:lo-hi]``,
    ``unit:i,j``, ``dense:path.mtx``.
    """
    name, _, args = spec.partition(":")
    if name in ("cols", "col"):
        idx = _range(args, n)
        B = np.zeros((n, idx.size))
        B[idx, np.arange(idx.size)] = 1.0
        return B @ B.T, B
    if name == "rand-vec":
        b = np.random.default_rng(seed).uniform(size=n)
        return np.outer(b, b), b[:, None]
    if name == "diag-random":
        idx = _range(args, n) if args else np.arange(n)
        d = np.zeros(n)
        d[idx] = np.random.default_rng(seed).uniform(size=idx.size)
        return np.diag(d), None
    if name == "unit":
        vals = _floats(args)
        if len(vals) != 2:
            raise UsageError("unit takes i,j")
        i, j = (int(v) for v in vals)
        if not (1 <= i <= n and 1 <= j <= n):
            raise UsageError(f"unit index outside 1..{n}")
        D = np.zeros((n, n))
        D[i - 1, j - 1] = 1.0
        return D, None
    if name == "dense":
        M = _load(args)
        D = M.to_dense() if isinstance(M, SparseMatrix) else np.asarray(M)
        if D.shape != (n, n):
            raise UsageError(f"right-hand side has shape {D.shape}, expected {(n, n)}")
        return D, None
    raise UsageError(f"unknown right-hand side {spec!r}")


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("LYAPDECAY_THREADS")
    return int(env) if env else 1


# ---------------------------------------------------------------------------
# commands


def _solve(prob: Problem, D, B, args):
    method = args.method
    if method == "auto":
        method = "spectral" if prob.symmetric else "oracle"
    if method in ("spectral", "resolvent", "exponential") and not prob.symmetric:
        raise UsageError(f"method {method!r} needs a symmetric coefficient")
    q = QuadratureSpec(node_count=args.nodes) if method in ("resolvent", "exponential") else None
    if method == "projection":
        if B is None:
            raise UsageError("projection needs a right-hand side of the form B B^T")
        X = np.zeros((prob.n, prob.n))
        total_m = 0
        for b in B.T:
            factor, trace = galerkin_solve(prob.A, b, tol=args.tol, m_max=args.m_max)
            X += factor.to_dense()
            total_m += len(trace)
        res = lyapunov_residual(as_dense(prob.A), X, D)
        return X, SolveReport("projection", prob.n, res, 0.0, {"krylov_steps": total_m})
    if method == "split":
        X = split_solve_dense(prob.A, D, workers=_threads(args))
        res = lyapunov_residual(as_dense(prob.A), X, D)
        return X, SolveReport("split", prob.n, res, 0.0, {})
    kwargs = {"q": q} if q is not None else {}
    return solve_with_report(prob.A, D, method, **kwargs)


def cmd_solve(args):
    prob = build_matrix(args.gen, args.n, args.matrix)
    D, B = build_rhs(args.rhs, prob.n, args.seed)
    X, report = _solve(prob, D, B, args)
    if not args.timing:
        report.elapsed = 0.0
    out = report.to_dict()
    out["generator"] = prob.generator
    out["rhs"] = args.rhs
    if args.threshold is not None:
        S, sparsify = threshold_sparsify(X, args.threshold)
        out["sparsify"] = sparsify.to_dict()
        write_mtx(args.out, S)
    else:
        write_mtx(args.out, X)
    if args.report:
        write_json(args.report, out)
    return 0


def _source_pair(args, n):
    if args.t is not None:
        if not 1 <= args.t <= n * n:
            raise UsageError(f"t must lie in 1..{n * n}")
        return linear_to_pair(args.t, n)
    if args.source is None:
        raise UsageError("give --source t1,t2 or --t")
    t1, t2 = (int(v) for v in _floats(args.source))
    if not (1 <= t1 <= n and 1 <= t2 <= n):
        raise UsageError(f"source outside 1..{n}")
    return t1, t2


def cmd_bounds(args):
    prob = build_matrix(args.gen, args.n, args.matrix)
    if not prob.symmetric:
        raise UsageError("bounds need a symmetric positive definite coefficient")
    Ad = as_dense(prob.A)
    ev = np.linalg.eigvalsh(Ad)
    if ev[0] <= 0:
        raise UsageError("bounds need a positive definite coefficient")
    beta = max(core.bandwidth(Ad), 1)
    kind = args.kind
    if kind == "demko":
        i = np.arange(prob.n)
        grid = demko_bound(ev[0], ev[-1], beta, i[:, None], i[None, :])
        write_grid_csv(args.out, grid)
        return 0
    t1, t2 = _source_pair(args, prob.n)
    if kind == "auto":
        kind = "kron" if prob.grid is not None else "entry"
    if kind == "kron":
        if prob.grid is None:
            raise UsageError("kron bounds need a laplacian2d generator")
        k = prob.grid
        mu = np.linalg.eigvalsh(prob.A.m_factor.to_dense())
        spec = SegmentSpec(mu[0], mu[-1], prob.A.m_factor.beta)
        tq = ((t1 - 1) % k + 1, (t1 - 1) // k + 1, (t2 - 1) % k + 1, (t2 - 1) // k + 1)
        env = kron_decay_envelope(spec, tq, grid=k)
    else:
        env = entry_envelope(ev[0], ev[-1], beta, (prob.n, prob.n), (t1, t2))
    write_grid_csv(args.out, env.bounds, extra=env.meta)
    return 0


def cmd_pattern(args):
    prob = build_matrix(args.gen, args.n, args.matrix)
    D, B = build_rhs(args.rhs, prob.n, args.seed)
    X, _ = _solve(prob, D, B, args)
    write_grid_csv(args.out, np.abs(X))
    if args.slice_col is not None:
        if not 1 <= args.slice_col <= prob.n:
            raise UsageError(f"--slice-col outside 1..{prob.n}")
        if not args.slice_out:
            raise UsageError("--slice-col needs --slice-out")
        write_vector_csv(args.slice_out, np.abs(X[:, args.slice_col - 1]))
    return 0


def cmd_krylov_trace(args):
    prob = build_matrix(args.gen, args.n, args.matrix)
    if args.rhs == "rand-vec":
        b = np.random.default_rng(args.seed).uniform(size=prob.n)
    else:
        _, B = build_rhs(args.rhs, prob.n, args.seed)
        if B is None or B.shape[1] != 1:
            raise UsageError("krylov-trace needs a single vector right-hand side")
        b = B[:, 0]
    _, trace = galerkin_solve(prob.A, b, tol=args.tol, m_max=args.m_max, predict=True)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(trace.to_csv())
    if args.json:
        write_json(args.json, trace.to_dict())
    if args.y_out:
        write_grid_csv(args.y_out, trace.Y)
    return 0


def cmd_inverse_column(args):
    prob = build_matrix(args.gen, args.n, args.matrix)
    n = prob.n
    if not 1 <= args.t <= n * n:
        raise UsageError(f"t must lie in 1..{n * n}")
    method = args.method
    if method == "auto":
        method = "spectral" if prob.symmetric else "oracle"
    write_vector_csv(args.out, inverse_kron_column(prob.A, args.t, method))
    return 0


# ---------------------------------------------------------------------------
# parser


def _common(p, rhs=True):
    p.add_argument("--gen", help="generator, e.g. tridiag:-1,4,-1, laplacian2d:30, identity")
    p.add_argument("--matrix", help="coefficient matrix in Matrix Market format")
    p.add_argument("--n", type=int, help="matrix order for tridiag/identity")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    if rhs:
        p.add_argument("--rhs", required=True,
                       help="cols:lo-hi | col:k | rand-vec | diag-random[:lo-hi] | unit:i,j | dense:F.mtx")


def _positive(text):
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def make_parser():
    p = _Parser(prog="lyapdecay", description="Solve Lyapunov equations and bound their entries.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve A X + X A^T = D")
    _common(s)
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--tol", type=_positive, default=1e-10)
    s.add_argument("--m-max", type=int, default=200)
    s.add_argument("--nodes", type=int, default=32, help="initial quadrature nodes")
    s.add_argument("--threshold", type=float, help="zero entries with |x| below this value")
    s.add_argument("--threads", type=int)
    s.add_argument("--timing", action="store_true", help="record wall time in the report")
    s.add_argument("--out", required=True, help="solution (.mtx)")
    s.add_argument("--report", help="JSON report")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bounds", help="a-priori entrywise bounds")
    _common(b, rhs=False)
    b.add_argument("--kind", choices=("auto", "entry", "kron", "demko"), default="auto")
    b.add_argument("--source", help="t1,t2 of the unit right-hand side e_t1 e_t2^T")
    b.add_argument("--t", type=int, help="linear index of the source (column-major)")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bounds)

    g = sub.add_parser("pattern", help="CSV grid of |X| and log10|X|")
    _common(g)
    g.add_argument("--method", choices=METHODS, default="auto")
    g.add_argument("--tol", type=_positive, default=1e-10)
    g.add_argument("--m-max", type=int, default=200)
    g.add_argument("--nodes", type=int, default=32)
    g.add_argument("--threads", type=int)
    g.add_argument("--slice-col", type=int, help="also write this column (1-based)")
    g.add_argument("--slice-out")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_pattern)

    k = sub.add_parser("krylov-trace", help="convergence history of the projection solver")
    _common(k)
    k.add_argument("--tol", type=_positive, default=1e-8)
    k.add_argument("--m-max", type=int, default=30)
    k.add_argument("--out", required=True, help="trace CSV")
    k.add_argument("--json", help="trace JSON")
    k.add_argument("--y-out", help="final reduced solution Y as CSV grid")
    k.set_defaults(func=cmd_krylov_trace)

    c = sub.add_parser("inverse-column", help="column t of the inverse Kronecker sum")
    _common(c, rhs=False)
    c.add_argument("--t", type=int, required=True)
    c.add_argument("--method", choices=("auto", "spectral", "oracle"), default="auto")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_inverse_column)
    return p


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lyapdecay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lyapdecay: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LyapunovError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"lyapdecay: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
