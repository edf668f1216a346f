# %% [markdown]
# # Is the response solution attracting?
#
# Start near the constructed solution and integrate forward. The stiff
# damping term is handled exactly by an exponential integrator.

# %%
import numpy as np

from qpseries import Problem, solver_n1, verify

eps = 0.05
problem = Problem.build([1.0], {(1,): 0.5, (-1,): 0.5}, [0.0, 1.0, 1.0], 0.0, eps)
sol = solver_n1.solve(problem, 9)

# %% [markdown]
# Perturbations die out like ``exp(-eps a t)``: the fast mode ``-1/eps`` is
# gone almost immediately, the slow one sets the pace.

# %%
rep = verify.attractor_test(problem, sol, [0.0, 0.01, 0.05, 0.1], t_end=100.0)
for d, dist, rate in zip(rep.offsets, rep.terminal_distance, rep.decay_rates):
    print(f"offset {d:4.2f}: distance at t=100 {dist:.2e}, fitted rate {rate:.4f}")

# %% [markdown]
# So reaching ``1e-6`` from ``0.1`` takes about ``ln(1e5)/eps ~ 230`` time units.

# %%
rep = verify.attractor_test(problem, sol, [0.1], t_end=300.0)
print(rep.terminal_distance, rep.passed)

# %%
rec = rep.trajectories[0]
print(np.c_[rec.times[::3000], rec.distance_to_solution[::3000]])
