# %% [markdown]
# # Response solution for a simple zero
#
# The oscillator ``eps x'' + x' + eps (x + x^2) = eps cos t`` has a periodic
# response close to ``x = 0`` when the damping ``1/eps`` is strong. Here we
# build it as a power series in an auxiliary parameter ``mu`` and look at how
# the orders behave.

# %%
import numpy as np

from qpseries import Problem, solver_n1, verify

eps = 0.05
problem = Problem.build([1.0], {(1,): 0.5, (-1,): 0.5}, [0.0, 1.0, 1.0], c0=0.0, epsilon=eps)
sol = solver_n1.solve(problem, 9)

# %% [markdown]
# Order 1 is the linear response. Even orders vanish because every node of
# the nonlinearity takes exactly two inputs.

# %%
for k in range(1, 10):
    u = sol.order(k)
    print(f"k={k}: {len(u):2d} modes, sup |u_nu| = {u.sup_coeff():.3e}")

# %% [markdown]
# Three coefficients have closed forms.

# %%
print(sol.order(1)[(1,)], -0.5j * eps)
print(sol.order(3)[(0,)], -eps**2 / 2)
print(sol.order(3)[(2,)], eps**3 / (4 * (2j - 3 * eps)))

# %% [markdown]
# The root test estimates how far in ``mu`` the series converges. Values
# above 1 mean the sum at ``mu = 1`` (the physical equation) is safe.

# %%
print("mu radius estimate:", sol.mu_radius_estimate)

# %% [markdown]
# Plugging the truncated sum back into the equation. The residual drops with
# every odd order; even orders add nothing.

# %%
for K in range(1, 12):
    r = verify.residual(problem, solver_n1.solve(problem, K))
    print(f"K={K:2d}  sup residual {r.sup_residual:.3e}")

# %% [markdown]
# Halving eps shrinks order ``k`` by about ``2^-((k+1)/2)``.

# %%
env = solver_n1.check_envelope(solver_n1.solve(problem, 6), problem)
print(env)

# %%
t = np.linspace(0, 4 * np.pi, 9)
print(np.c_[t, sol.position(t)])
