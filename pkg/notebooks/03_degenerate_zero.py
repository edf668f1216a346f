# %% [markdown]
# # Zero of order three
#
# With ``g(x) = x^3`` the linearisation at ``x = 0`` vanishes. The solution
# is split as ``x = eps (zeta + u1) + xi``: ``u1`` solves the linear problem,
# ``zeta`` is a free average fixed by the zero mode of the equation, and a
# counterterm ``b eps^3`` restores a nondegenerate propagator for ``xi``.

# %%
import numpy as np

from qpseries import Problem, solver_n3, trees, verify

e3 = Problem.build([1.0], {(1,): 0.5, (-1,): 0.5}, [0, 0, 0, 1], 0.0, 0.05)
state = solver_n3.solve_zeta(e3, 8)
print(state.report())
print("3/(2(1+eps^2)) =", 3 / (2 * (1 + 0.05**2)))

# %% [markdown]
# Orders 2 and 3 of ``xi`` vanish; the first correction is order 4, then 7.

# %%
for k in range(2, 9):
    print(k, len(state.xi(k)), state.xi(k).sup_coeff())

# %% [markdown]
# A forcing with a second harmonic and a quartic term moves ``zeta`` off zero.
# As eps shrinks, ``zeta`` approaches the real root of the cubic
# ``Fbar2(zeta) = [(zeta + u1)^3]_0``.

# %%
f = {(1,): 0.5, (-1,): 0.5, (2,): -0.4j, (-2,): 0.4j}
for eps in (0.1, 0.05, 0.02, 0.01):
    p = Problem.build([1.0], f, [0, 0, 0, 1, 0.5], 0.0, eps)
    st = solver_n3.solve_zeta(p, 8)
    print(f"eps={eps:5.2f} zeta={st.zeta:+.6f} zeta0={st.zeta0:+.6f} |F2|={abs(st.f2_residual):.1e}")

# %%
print(trees.oracle_compare("n3", 8, e3, state).discrepancy)
for K in (4, 7, 8):
    print(K, verify.residual(e3, solver_n3.solve(e3, K)[0]).sup_residual)
