# %% [markdown]
# # Trees as an independent check of the recursion
#
# Every coefficient of order ``k`` is a sum over planar rooted trees with
# ``k`` nodes. End nodes carry a forcing mode, internal nodes carry a Taylor
# coefficient of the nonlinearity, and each line carries a propagator.

# %%
from qpseries import Problem, solver_n1, trees

problem = Problem.build([1.0], {(1,): 0.5, (-1,): 0.5}, [0.0, 1.0, 1.0], 0.0, 0.05)
enum = trees.enumerator_for("n1", problem)

# %% [markdown]
# Binary trees with ``m`` leaves: Catalan(m-1) shapes, each leaf labelled +1 or -1.

# %%
for k in range(1, 8):
    print(k, sum(len(v) for v in enum.by_order(k).values()))

# %%
for t in enum.trees(3, (0,)):
    print(t.dump(), "\nvalue", trees.tree_value(t, problem), "\n")

# %% [markdown]
# Summing all trees reproduces the recursion to rounding.

# %%
rep = trees.oracle_compare("n1", 7, problem, solver_n1.solve(problem, 7))
print(rep.discrepancy)

# %% [markdown]
# Counting inequalities between end nodes and internal nodes, checked on
# every tree (all node degrees allowed).

# %%
print(trees.check_lemmas("n1", 7, problem))
