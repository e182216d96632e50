"""The solution for a banded right-hand side is both nearly sparse and
numerically low rank.

A = tridiag(-1, 4, -1), n = 100, D = B B^T with B = [e_50, ..., e_60].
"""
import numpy as np

from lyapdecay import solve_spectral, threshold_sparsify, tridiag, truncate_factor

n = 100
A = tridiag(n, -1.0, 4.0)
B = np.zeros((n, 11))
B[np.arange(49, 60), np.arange(11)] = 1.0
X = solve_spectral(A, B @ B.T)

print(f"max |X| = {np.abs(X).max():.3f}, nonzeros = {np.count_nonzero(X)}")
print(f"eigenvalues above 1e-14: {int(np.sum(np.linalg.eigvalsh(X) > 1e-14))}")
F = truncate_factor(X, tol=1e-14)
print(f"low-rank factor: {F.rank} columns, ||X - Z Z^T||_2 = {np.linalg.norm(X - F.to_dense(), 2):.1e}")

S, rep = threshold_sparsify(X, 1e-5)
print(f"\nafter zeroing |x| < 1e-5: {rep.nnz_after} nonzeros")
print(f"  ||X - Xt||_2 = {rep.dropped_2:.2e}, ||X - Xt||_F = {rep.dropped_fro:.2e}")
print(f"  singular values above 1e-14: {rep.singular_values_nonzero}, above 1e-5: "
      f"{rep.singular_values_above_threshold}")
