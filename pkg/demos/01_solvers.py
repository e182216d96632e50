"""Four ways to solve A X + X A = D, and how the quadrature-based ones converge.

The Kronecker oracle forms the n^2 x n^2 system, the spectral solver works
with one eigendecomposition, and the two integral solvers discretize the
resolvent and exponential integrals.
"""
import numpy as np

from lyapdecay import QuadratureSpec, tridiag
from lyapdecay.core import as_dense
from lyapdecay.equation_solvers import (
    refinement_history,
    solve_integral_exponential,
    solve_integral_resolvent,
    solve_kron_oracle,
    solve_spectral,
)

n = 30
A = tridiag(n, -1.0, 4.0)
D = np.zeros((n, n))
D[0, 0] = 1.0

X = solve_spectral(A, D)
Xo = solve_kron_oracle(as_dense(A), D)
print(f"spectral vs oracle: {np.linalg.norm(X - Xo) / np.linalg.norm(X):.2e}")

# The integrals need a stable coefficient, so use -A; the solution flips sign.
S = -as_dense(A)
for kind, solver in (("resolvent", solve_integral_resolvent), ("exponential", solve_integral_exponential)):
    print(f"\n{kind} integral, error as the rule is doubled")
    for nodes, Xq in refinement_history(S, D, kind, QuadratureSpec(node_count=4)):
        print(f"  {nodes:5d} nodes  {np.linalg.norm(Xq + X) / np.linalg.norm(X):.2e}")
    print(f"  adaptive default: {np.linalg.norm(solver(S, D) + X) / np.linalg.norm(X):.2e}")
