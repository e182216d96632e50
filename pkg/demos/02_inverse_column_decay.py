"""A column of the inverse Kronecker sum is a reshaped Lyapunov solution.

Column t = 35 of (I (x) A + A (x) I)^{-1}, n = 10, is vec(X) with right-hand
side e_5 e_4^T.  Its entries decay away from (5, 4), and the a-priori entry
bound follows the same pattern.
"""
import numpy as np

from lyapdecay import entry_envelope, inverse_kron_column, linear_to_pair, solve_kron_oracle, tridiag
from lyapdecay.core import as_dense, unvec

n, t = 10, 35
A = tridiag(n, -1.0, 2.0)
t1, t2 = linear_to_pair(t, n)
X = unvec(inverse_kron_column(A, t), n)
peak = tuple(int(i) + 1 for i in np.unravel_index(np.argmax(X), X.shape))
print(f"t={t} -> (t1, t2) = ({t1}, {t2}); largest entry at {peak}")

lam = np.linalg.eigvalsh(as_dense(A))
env = entry_envelope(lam[0], lam[-1], 1, (n, n), (t1, t2))
np.set_printoptions(precision=1, linewidth=120)
print("\nlog10 |X|")
print(np.log10(np.abs(X)))
print("\nlog10 bound")
print(np.log10(env.bounds))
print(f"\nlargest |X| / bound: {np.max(np.abs(X) / env.bounds):.3f}")

# A nonsymmetric coefficient still gives a localized solution.
B = tridiag(100, 1.0, 2.0, -1.0)
D = np.zeros((100, 100))
D[49, 49] = 1.0
Y = solve_kron_oracle(B, D)
peak = tuple(int(i) + 1 for i in np.unravel_index(np.argmax(np.abs(Y)), Y.shape))
print(f"nonsymmetric tridiag(1,2,-1): largest entry at {peak}, "
      f"|Y| at distance 10 from it: {abs(Y[49, 59]):.1e}")
