"""
Labelled rooted trees: an independent oracle for the series coefficients.

Each coefficient of order ``k`` and mode ``nu`` is the sum of the values of
all trees with ``k`` nodes and root momentum ``nu``. Trees are planar: the
children of a node are ordered, and two trees are the same exactly when
their ordered encodings coincide. This is what makes the tree sum equal to
the recursion, whose products run over ordered compositions.

Two schemes are supported:

``"n1"``
    simple zero; internal nodes have at least 2 children, end nodes carry a
    nonzero mode of the forcing.
``"n3"``
    zero of odd order n >= 3; internal nodes have at least n children, end
    nodes carry a forcing mode or 0, lines leaving internal nodes carry
    nonzero momentum, and no node is *excluded* (exactly one internal child
    whose momentum equals the node's own).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BudgetExceeded, InvalidTree, LemmaViolation
from .fourier import FourierSeries
from .model import Problem, shifted_g_tail, validate
from .solver_n1 import propagator_D
from .solver_n3 import alpha_min, propagators

DEFAULT_TREE_BUDGET = 10**6
SCHEMES = ("n1", "n3")


@dataclass(frozen=True, eq=False)
class Node:
    mode: tuple | None
    children: tuple
    momentum: tuple
    order: int

    @property
    def is_end(self) -> bool:
        return self.mode is not None

    @cached_property
    def encoding(self) -> str:
        if self.is_end:
            return "E" + ",".join(map(str, self.mode))
        return "V(" + ";".join(c.encoding for c in self.children) + ")"

    def __eq__(self, other):
        return isinstance(other, Node) and self.encoding == other.encoding

    def __hash__(self):
        return hash(self.encoding)


def end_node(mode) -> Node:
    mode = tuple(int(x) for x in mode)
    return Node(mode, (), mode, 1)


def internal_node(children) -> Node:
    children = tuple(children)
    mom = tuple(int(x) for x in np.sum([c.momentum for c in children], axis=0))
    return Node(None, children, mom, 1 + sum(c.order for c in children))


def sorted_encoding(node: Node) -> str:
    """Encoding with children sorted: identifies trees up to child permutation."""
    if node.is_end:
        return node.encoding
    return "V(" + ";".join(sorted(sorted_encoding(c) for c in node.children)) + ")"


@dataclass(frozen=True, eq=False)
class Tree:
    root: Node
    scheme: str

    @property
    def order(self) -> int:
        return self.root.order

    @property
    def momentum(self) -> tuple:
        return self.root.momentum

    def canonical(self) -> str:
        return self.root.encoding

    def __eq__(self, other):
        return isinstance(other, Tree) and self.scheme == other.scheme \
            and self.canonical() == other.canonical()

    def __hash__(self):
        return hash((self.scheme, self.canonical()))

    def nodes(self):
        """All nodes, depth first, root first."""
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(reversed(v.children))

    def end_nodes(self):
        return [v for v in self.nodes() if v.is_end]

    def internal_nodes(self):
        return [v for v in self.nodes() if not v.is_end]

    def dump(self) -> str:
        """Indented text, one node per line."""
        lines = []

        def walk(v, depth):
            pad = "  " * depth
            if v.is_end:
                lines.append(f"{pad}end mode={v.mode} momentum={v.momentum}")
            else:
                lines.append(f"{pad}node p={len(v.children)} momentum={v.momentum}")
                for c in v.children:
                    walk(c, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines)


def _is_zero(nu) -> bool:
    return not any(nu)


def is_excluded(v: Node) -> bool:
    """One internal child, the rest end nodes whose modes sum to zero."""
    if v.is_end:
        return False
    inner = [c for c in v.children if not c.is_end]
    if len(inner) != 1:
        return False
    return inner[0].momentum == v.momentum


def check_tree(tree: Tree, gotn: int = 1, support=None) -> None:
    """Re-verify every structural constraint; raise ``InvalidTree`` otherwise."""
    p_min = 2 if tree.scheme == "n1" else gotn
    for v in tree.nodes():
        if v.is_end:
            if v.momentum != v.mode:
                raise InvalidTree("end node momentum differs from its mode")
            if tree.scheme == "n1" and _is_zero(v.mode):
                raise InvalidTree("zero mode on an end node (n1 scheme)")
            if support is not None and not _is_zero(v.mode) and v.mode not in support:
                raise InvalidTree(f"mode {v.mode} outside the forcing support")
            continue
        if len(v.children) < p_min:
            raise InvalidTree(f"internal node with {len(v.children)} < {p_min} children")
        expected = tuple(int(x) for x in np.sum([c.momentum for c in v.children], axis=0))
        if expected != v.momentum:
            raise InvalidTree("momentum is not the sum of the end modes below")
        if tree.scheme == "n3":
            if _is_zero(v.momentum):
                raise InvalidTree("zero momentum on a line leaving an internal node")
            if is_excluded(v):
                raise InvalidTree("excluded node")
    if sum(1 for _ in tree.nodes()) != tree.order:
        raise InvalidTree("order differs from the number of nodes")


def _compositions(total: int, parts: int):
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class TreeEnumerator:
    """
    Memoised generator of all trees of a scheme, grouped by order and root
    momentum.

    Parameters
    ----------
    scheme : {"n1", "n3"}
    modes : iterable of mode tuples
        Nonzero forcing modes allowed on end nodes (``0`` is added for n3).
    gotn : int
        Minimum number of children in the n3 scheme.
    degrees : iterable of int or None
        Allowed numbers of children; ``None`` means every admissible value.
    budget : int
        Maximum total number of generated trees.
    """

    def __init__(self, scheme: str, modes, gotn: int = 1, degrees=None,
                 budget: int = DEFAULT_TREE_BUDGET):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        self.scheme = scheme
        self.gotn = gotn if scheme == "n3" else 1
        self.p_min = 2 if scheme == "n1" else gotn
        self.modes = sorted({tuple(int(x) for x in m) for m in modes if any(m)})
        self.dim = len(self.modes[0]) if self.modes else None
        self.degrees = None if degrees is None else sorted(set(degrees))
        self.budget = budget
        self.generated = 0
        self._memo: dict[int, dict[tuple, list]] = {}

    def _bump(self, n: int) -> None:
        self.generated += n
        if self.generated > self.budget:
            raise BudgetExceeded(f"more than {self.budget} trees generated")

    def _allowed_degrees(self, k: int):
        top = k - 1
        if self.degrees is None:
            return range(self.p_min, top + 1)
        return [p for p in self.degrees if self.p_min <= p <= top]

    def _child_pool(self, order: int) -> list:
        """Subtrees that may hang below an internal node."""
        if order == 1:
            pool = [end_node(m) for m in self.modes]
            if self.scheme == "n3" and self.dim is not None:
                pool.append(end_node((0,) * self.dim))
            return pool
        return [t for lst in self.by_order(order).values() for t in lst]

    def by_order(self, k: int) -> dict:
        """``{momentum: [root Node, ...]}`` for all trees of order ``k``."""
        if k in self._memo:
            return self._memo[k]
        out: dict[tuple, list] = {}
        if k == 1:
            for m in self.modes:
                out.setdefault(m, []).append(end_node(m))
            if self.scheme == "n3" and self.dim is not None:
                z = (0,) * self.dim
                out.setdefault(z, []).append(end_node(z))
            self._bump(sum(len(v) for v in out.values()))
            self._memo[k] = out
            return out
        for p in self._allowed_degrees(k):
            for comp in _compositions(k - 1, p):
                pools = [self._child_pool(ki) for ki in comp]
                if any(not pool for pool in pools):
                    continue
                size = int(np.prod([len(pool) for pool in pools], dtype=float))
                if self.generated + size > self.budget * 4:
                    raise BudgetExceeded(f"order {k}: {size} candidate trees exceed the budget")
                for children in itertools.product(*pools):
                    v = internal_node(children)
                    if self.scheme == "n3" and (_is_zero(v.momentum) or is_excluded(v)):
                        continue
                    out.setdefault(v.momentum, []).append(v)
                    self._bump(1)
        self._memo[k] = out
        return out

    def trees(self, k: int, nu) -> list:
        nu = tuple(int(x) for x in np.atleast_1d(nu))
        return [Tree(v, self.scheme) for v in self.by_order(k).get(nu, [])]

    def all_trees(self, k: int) -> list:
        return [Tree(v, self.scheme) for lst in self.by_order(k).values() for v in lst]


def enumerator_for(scheme: str, problem: Problem, all_degrees: bool = False,
                   budget: int = DEFAULT_TREE_BUDGET) -> TreeEnumerator:
    """Enumerator whose end modes are the forcing support and whose node degrees
    are those with a nonzero Taylor coefficient (or all degrees)."""
    report = validate(problem)
    gotn = report.gotn
    modes = [nu for nu, _ in problem.f_tilde.items()]
    degrees = None
    if not all_degrees:
        tail = shifted_g_tail(problem.nonlinearity)
        degrees = [p for p in range(len(tail)) if tail[p] != 0]
    return TreeEnumerator(scheme, modes, gotn=gotn, degrees=degrees, budget=budget)


def enumerate_trees(scheme: str, k: int, nu, problem: Problem,
                    budget: int | None = None) -> list:
    """All trees of the scheme with order ``k`` and root momentum ``nu``."""
    if budget is None:
        budget = 7 if scheme == "n1" else validate(problem).gotn + 4
    if k > budget:
        raise BudgetExceeded(f"order {k} exceeds the enumeration budget {budget}")
    return enumerator_for(scheme, problem).trees(k, nu)


def tree_value(tree: Tree, problem: Problem, state=None) -> complex:
    """
    Product of node factors and line propagators.

    n1: internal ``-eps^d a_p`` with ``d = 0`` iff the exit momentum is zero,
    end ``eps f_nu``; propagator ``1/D(eps, omega.nu)`` or ``1/a`` at zero
    momentum. n3: internal ``-eps a_p``, end ``eps f_nu`` or ``eps zeta``;
    propagators ``G_E`` (end), ``G_V`` (internal), 1 at zero momentum.
    """
    report = validate(problem)
    eps = problem.epsilon
    taylor = problem.nonlinearity.taylor
    f = problem.forcing
    omega = problem.omega
    if tree.scheme == "n3" and state is None:
        raise ValueError("the n3 scheme needs a DegenerateState (zeta, b)")
    check_tree(tree, report.gotn)

    def a_p(p):
        return taylor[p] if p < len(taylor) else 0.0

    def val(v: Node) -> complex:
        s = float(np.dot(omega, v.momentum))
        zero = _is_zero(v.momentum)
        if tree.scheme == "n1":
            if v.is_end:
                return eps * f[v.mode] / propagator_D(eps, s, report.a)
            prod = 1.0 + 0j
            for c in v.children:
                prod *= val(c)
            if zero:
                return -a_p(len(v.children)) / report.a * prod
            return -eps * a_p(len(v.children)) / propagator_D(eps, s, report.a) * prod
        if v.is_end:
            if zero:
                return eps * state.zeta
            ge, _ = propagators(eps, s, state.b, report.gotn)
            return eps * f[v.mode] * ge
        prod = 1.0 + 0j
        for c in v.children:
            prod *= val(c)
        _, gv = propagators(eps, s, state.b, report.gotn)
        return -eps * a_p(len(v.children)) * gv * prod

    return complex(val(tree.root))


def tree_sum(enum: TreeEnumerator, k: int, problem: Problem, state=None) -> FourierSeries:
    """``sum_theta Val(theta)`` for every root momentum at order ``k``."""
    modes, vals = [], []
    for nu, roots in sorted(enum.by_order(k).items()):
        if enum.scheme == "n3" and k >= 2 and _is_zero(nu):
            continue
        total = sum(tree_value(Tree(v, enum.scheme), problem, state) for v in roots)
        modes.append(nu)
        vals.append(total)
    return FourierSeries(np.array(modes, dtype=np.int64).reshape(-1, problem.dim), vals,
                         dim=problem.dim, declared_real=True)


def order_discrepancy(a: FourierSeries, b: FourierSeries) -> float:
    """``max_nu |a_nu - b_nu|`` relative to the larger sup-norm of the two orders."""
    scale = max(a.sup_coeff(), b.sup_coeff())
    if scale == 0:
        return 0.0
    return (a - b).sup_coeff() / scale


@dataclass
class OracleReport:
    scheme: str
    k_max: int
    discrepancy: dict
    n_trees: dict
    tolerance: float = 1e-10

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancy.values()) if self.discrepancy else 0.0

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance


def oracle_compare(scheme: str, k_max: int, problem: Problem, solver_output,
                   tolerance: float = 1e-10, budget: int = DEFAULT_TREE_BUDGET) -> OracleReport:
    """
    Compare recursion coefficients with tree sums for ``k <= k_max``.

    ``solver_output`` is a ``SeriesSolution`` (n1) or a ``DegenerateState``
    (n3). For n3, order 1 is ``eps x1`` and orders ``k >= 2`` are ``xi^[k]``.
    """
    enum = enumerator_for(scheme, problem, budget=budget)
    disc, counts = {}, {}
    if scheme == "n1":
        orders = solver_output.orders
        state = None
    else:
        state = solver_output
        orders = state.mu_orders(problem)
    for k in range(1, k_max + 1):
        if k > len(orders):
            raise ValueError(f"solver output stops at order {len(orders)} < {k_max}")
        ref = tree_sum(enum, k, problem, state)
        disc[k] = order_discrepancy(ref, orders[k - 1])
        counts[k] = sum(len(v) for v in enum.by_order(k).values())
    return OracleReport(scheme, k_max, disc, counts, tolerance)


@dataclass
class LemmaReport:
    scheme: str
    k_max: int
    trees_checked: int = 0
    violations: dict = field(default_factory=dict)
    equality: dict = field(default_factory=dict)
    empty_orders: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v == 0 for v in self.violations.values())


def check_lemmas(scheme: str, k_max: int, problem: Problem, all_degrees: bool = True,
                 budget: int = DEFAULT_TREE_BUDGET, raise_on_violation: bool = False) -> LemmaReport:
    """
    Exhaustively check the counting inequalities on every tree of order <= k_max.

    n1: ``|E| >= |V| + 1`` and ``|E| >= (k+1)/2``, with equality in the first
    exactly when every internal node has two children.
    n3: ``|E| >= (n-1)|V| + 1``, ``n|E| >= (n-1)k + 1`` and
    ``n |V0| <= |E| - 2`` where ``V0`` are internal nodes whose exit line has
    ``|omega.nu| < alpha/2``; also orders ``2..n`` must be empty.
    """
    gotn = validate(problem).gotn
    enum = enumerator_for(scheme, problem, all_degrees=all_degrees, budget=budget)
    rep = LemmaReport(scheme, k_max)
    alpha = alpha_min(problem) if scheme == "n3" else None
    if scheme == "n1":
        names = ("E>=V+1", "E>=(k+1)/2", "equality<=>binary")
    else:
        names = ("E>=(n-1)V+1", "nE>=(n-1)k+1", "n|V0|<=E-2")
    rep.violations = {n: 0 for n in names}
    if scheme == "n1":
        rep.equality = {"binary_trees": 0, "equality_cases": 0}
    else:
        rep.equality = {"trees_with_V0": 0}
    start = 1 if scheme == "n1" else 2
    for k in range(start, k_max + 1):
        roots = enum.by_order(k)
        if scheme == "n3" and 2 <= k <= gotn and roots:
            rep.violations.setdefault("empty_orders", 0)
            rep.violations["empty_orders"] += 1
        if scheme == "n3" and 2 <= k <= gotn and not roots:
            rep.empty_orders.append(k)
        for lst in roots.values():
            for v in lst:
                tree = Tree(v, scheme)
                check_tree(tree, gotn)
                E = len(tree.end_nodes())
                inner = tree.internal_nodes()
                V = len(inner)
                rep.trees_checked += 1
                if scheme == "n1":
                    ok1 = E >= V + 1
                    ok2 = 2 * E >= k + 1
                    binary = all(len(w.children) == 2 for w in inner)
                    eq = E == V + 1
                    ok3 = eq == binary
                    rep.equality["binary_trees"] += binary
                    rep.equality["equality_cases"] += eq
                    checks = (ok1, ok2, ok3)
                else:
                    V0 = sum(1 for w in inner
                             if abs(float(np.dot(problem.omega, w.momentum))) < alpha / 2)
                    rep.equality["trees_with_V0"] += V0 > 0
                    checks = (E >= (gotn - 1) * V + 1,
                              gotn * E >= (gotn - 1) * k + 1,
                              gotn * V0 <= E - 2)
                for name, ok in zip(names, checks):
                    if not ok:
                        rep.violations[name] += 1
                        if raise_on_violation:
                            raise LemmaViolation(f"{name} fails on\n{tree.dump()}")
    return rep
