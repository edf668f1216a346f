# %% [markdown]
# # Small divisors for the golden mean
#
# For ``omega = (1, phi)`` the smallest ``|omega . nu|`` over the l1 ball of
# radius ``2^n`` is attained at consecutive Fibonacci pairs.

# %%
import numpy as np

from qpseries import Problem, frequency, solver_n1, verify

phi = (1 + np.sqrt(5)) / 2
for n in range(7):
    val, nu = frequency.lattice_minimum([1.0, phi], 2**n)
    print(n, nu, val, "phi^-%d" % round(-np.log(val) / np.log(phi)))

# %%
support = [(1, 0), (-1, 0), (0, 1), (0, -1)]
rep = frequency.diagnose([1.0, phi], support, 5)
print(rep.as_dict())

# %% [markdown]
# The two-frequency oscillator ``g(x) = x + x^3`` is solved the same way.

# %%
f = {m: 0.5 for m in support}
e2 = Problem.build([1.0, phi], f, [0, 1, 0, 1], 0.0, 0.05)
for K in (2, 4, 6, 8):
    print(K, verify.residual(e2, solver_n1.solve(e2, K)).sup_residual)
