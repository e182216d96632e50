"""Readers and writers for Matrix Market, CSV and JSON artifacts.

CSV files use ``,`` as separator and ``.`` as decimal point; floats are
written with ``repr`` so that reading them back is exact.  Indices in CSV
files are 1-based.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .core import SparseMatrix

__all__ = [
    "write_mtx",
    "read_mtx",
    "write_grid_csv",
    "read_grid_csv",
    "write_vector_csv",
    "read_vector_csv",
    "write_json",
    "read_json",
]


def write_mtx(path, M, symmetric=None, comment=""):
    """Write a matrix in Matrix Market format.

    ``SparseMatrix`` and scipy sparse input is written in coordinate format,
    ``ndarray`` input in array format.  Symmetric matrices are stored as a
    lower triangle unless ``symmetric=False``.
    """
    if isinstance(M, SparseMatrix):
        M = M.to_scipy()
    if sp.issparse(M):
        M = sp.coo_matrix(M)
        sym = _is_symmetric(M.toarray()) if symmetric is None else symmetric
    else:
        M = np.asarray(M, dtype=float)
        if M.ndim == 1:
            M = M[:, None]
        sym = _is_symmetric(M) if symmetric is None else symmetric
    scipy.io.mmwrite(
        str(path), M, comment=comment, field="real", precision=17,
        symmetry="symmetric" if sym else "general",
    )


def _is_symmetric(M):
    return M.shape[0] == M.shape[1] and np.array_equal(M, M.T)


def read_mtx(path):
    """Read a Matrix Market file: coordinate -> ``SparseMatrix``, array -> ``ndarray``."""
    M = scipy.io.mmread(str(path))
    if sp.issparse(M):
        return SparseMatrix.from_scipy(M)
    return np.asarray(M, dtype=float)


def _fmt(x):
    return repr(float(x))


def _log10abs(x):
    a = abs(float(x))
    return math.log10(a) if a > 0 else -math.inf


def write_grid_csv(path, X, extra=None, extra_name="rule"):
    """Rows ``i, j, value, log10abs`` in row-major order (1-based).

    ``extra`` is an optional array of labels written as a fifth column.
    """
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["i", "j", "value", "log10abs"]
        if extra is not None:
            header.append(extra_name)
        w.writerow(header)
        rows, cols = X.shape
        for i in range(rows):
            for j in range(cols):
                v = X[i, j]
                row = [i + 1, j + 1, _fmt(v), _fmt(_log10abs(v))]
                if extra is not None:
                    row.append(extra[i, j])
                w.writerow(row)


def read_grid_csv(path, shape=None):
    """Inverse of :func:`write_grid_csv`; returns the ``value`` grid."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    i = np.array([int(r["i"]) for r in rows]) - 1
    j = np.array([int(r["j"]) for r in rows]) - 1
    v = np.array([float(r["value"]) for r in rows])
    if shape is None:
        shape = (i.max() + 1, j.max() + 1) if rows else (0, 0)
    X = np.zeros(shape)
    X[i, j] = v
    return X


def write_vector_csv(path, x, name="value"):
    """Rows ``k, value, log10abs`` (1-based ``k``)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", name, "log10abs"])
        for k, v in enumerate(np.asarray(x, dtype=float).ravel(), start=1):
            w.writerow([k, _fmt(v), _fmt(_log10abs(v))])


def read_vector_csv(path, name="value"):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r[name]) for r in rows])


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
