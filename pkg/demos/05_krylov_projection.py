"""Galerkin projection on a Krylov space for a 30 x 30 grid Laplacian.

The reduced solution Y is small and its entries decay away from Y[0, 0];
the residual norm is read off Y's last column without forming X.
"""
import numpy as np

from lyapdecay import galerkin_solve, laplacian2d, residual_explicit, y_diag_bound

A = laplacian2d(30)
b = np.random.default_rng(42).uniform(size=A.n)
X, trace = galerkin_solve(A, b, tol=1e-10, m_max=30, predict=True)

print("  m   residual     |t|*sqrt2*|Ye_m|   a-priori estimate")
for r in trace.records:
    print(f"{r.m:3d}  {r.residual_norm:.4e}  {np.sqrt(2) * abs(r.t_next) * r.ye_norm:.4e}  {r.predicted_bound:.3e}")
print(f"\nexplicit residual at m=30: {residual_explicit(A, X, b):.4e}")

Y = trace.Y
theta = np.abs(np.linalg.eigvalsh(trace.krylov.T))
print("\n i   |Y_ii|      bound")
for i in range(2, 31, 4):
    print(f"{i:2d}  {abs(Y[i - 1, i - 1]):.3e}  {y_diag_bound(i, theta.min(), theta.max(), np.linalg.norm(b)):.3e}")
