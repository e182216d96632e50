"""Decay bound for a Laplacian-type coefficient A = M (x) I + I (x) M.

Bounding A as a banded matrix gives a bandwidth of sqrt(n), which hides the
grid structure.  The two-level envelope works with M instead and follows
the ripples of the 48th column of the solution.
"""
import numpy as np

from lyapdecay import SegmentSpec, kron_decay_envelope, laplacian2d, solve_spectral, tridiag
from lyapdecay.core import as_dense

grid = 10
M = tridiag(grid, -1.0, 2.0)
mu = np.linalg.eigvalsh(as_dense(M))
t = 50  # B = e_50, so the right-hand side is e_50 e_50^T
coords = ((t - 1) % grid + 1, (t - 1) // grid + 1) * 2
env = kron_decay_envelope(SegmentSpec(mu[0], mu[-1], 1), coords, grid=grid)

A = laplacian2d(grid).to_dense()
D = np.zeros((grid**2, grid**2))
D[t - 1, t - 1] = 1.0
X = solve_spectral(A, D)

col = 48
print(" k   |X[k,48]|   envelope   rule")
for k in range(grid**2):
    print(f"{k + 1:3d}  {abs(X[k, col - 1]):.3e}  {env.bounds[k, col - 1]:.3e}  {env.meta[k, col - 1]}")
print(f"\nviolations: {int(np.sum(np.abs(X) > env.bounds))}")
