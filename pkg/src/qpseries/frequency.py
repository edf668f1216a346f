"""
Diophantine diagnostics of a frequency vector.

All lattice balls use the l1 norm ``|nu| = sum |nu_i|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import BudgetExceeded, ResonanceError, ValidationError

DEFAULT_BUDGET = 10**7


def as_frequency_vector(omega) -> np.ndarray:
    """Validate and return ``omega`` as a float array of shape (d,)."""
    omega = np.asarray(omega, dtype=float).reshape(-1)
    if omega.size == 0:
        raise ValidationError("frequency vector must have d >= 1 components")
    if not np.all(np.isfinite(omega)):
        raise ValidationError("frequency vector has non-finite components")
    if not np.any(omega != 0):
        raise ValidationError("frequency vector is identically zero")
    return omega


def ball_size(d: int, radius: int) -> int:
    """Number of points of Z^d with 0 <= |nu|_1 <= radius."""
    return sum(2**k * comb(d, k) * comb(radius, k) for k in range(min(d, radius) + 1))


def lattice_ball(d: int, radius: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """All nonzero ``nu`` in Z^d with ``|nu|_1 <= radius``, shape (n, d)."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    size = ball_size(d, radius)
    if size > budget:
        raise BudgetExceeded(f"l1 ball of radius {radius} in Z^{d} has {size} points > {budget}")

    def build(dim: int, r: int) -> np.ndarray:
        if dim == 1:
            return np.arange(-r, r + 1, dtype=np.int64).reshape(-1, 1)
        blocks = []
        for head in range(-r, r + 1):
            tail = build(dim - 1, r - abs(head))
            blocks.append(np.hstack([np.full((tail.shape[0], 1), head, dtype=np.int64), tail]))
        return np.vstack(blocks)

    pts = build(d, radius)
    return pts[np.any(pts != 0, axis=1)]


def lattice_minimum(omega, radius: int, support=None, budget: int = DEFAULT_BUDGET):
    """
    Minimum of ``|omega . nu|`` over ``0 < |nu|_1 <= radius``.

    When ``support`` is given the minimum runs over those modes only. Returns
    ``(value, minimizer)``; ``(None, None)`` if no admissible mode exists.
    Raises ``ResonanceError`` if some admissible mode has ``omega . nu == 0``.
    """
    omega = as_frequency_vector(omega)
    d = omega.shape[0]
    if support is None:
        modes = lattice_ball(d, radius, budget)
    else:
        modes = np.asarray(list(support), dtype=np.int64).reshape(-1, d)
        norm = np.abs(modes).sum(axis=1)
        modes = modes[(norm > 0) & (norm <= radius)]
    if modes.shape[0] == 0:
        return None, None
    values = np.abs(modes @ omega)
    i = int(np.argmin(values))
    if values[i] == 0:
        raise ResonanceError(f"omega . nu = 0 for nu = {tuple(modes[i].tolist())}")
    return float(values[i]), tuple(int(x) for x in modes[i])


def alpha_n(omega, n: int, budget: int = DEFAULT_BUDGET) -> float:
    """Smallest ``|omega . nu|`` over the punctured ball of radius ``2**n``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    value, _ = lattice_minimum(omega, 2**n, budget=budget)
    return value


def beta_n(omega, support, n: int):
    """
    Like :func:`alpha_n` but restricted to the forcing support.

    Returns ``None`` when no support mode lies in the ball.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    value, _ = lattice_minimum(omega, 2**n, support=support)
    return value


@dataclass
class DiophantineReport:
    omega: np.ndarray
    n_max: int
    alpha: list
    beta: list
    epsilon_seq: list
    bryuno_partial: float
    eps_decreasing: bool
    minimizers: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "omega": [float(w) for w in self.omega],
            "n_max": self.n_max,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "epsilon_seq": list(self.epsilon_seq),
            "bryuno_partial": self.bryuno_partial,
            "eps_decreasing": self.eps_decreasing,
        }


def diagnose(omega, support, n_max: int, budget: int = DEFAULT_BUDGET) -> DiophantineReport:
    """
    Compute ``alpha_n``, ``beta_n`` and ``eps_n = 2**-n log(1/beta_n)`` for
    ``n = 0..n_max`` together with the partial Bryuno sum.

    ``beta_n`` and ``eps_n`` are ``None`` where no support mode lies in the
    ball. ``eps_decreasing`` is the finite-scale stand-in for the hypothesis
    ``eps_n -> 0``: it holds when the defined ``eps_n`` are non-increasing.
    """
    omega = as_frequency_vector(omega)
    support = [tuple(np.atleast_1d(nu).tolist()) for nu in support]
    alpha, beta, eps, minimizers = [], [], [], []
    for n in range(n_max + 1):
        a, nu = lattice_minimum(omega, 2**n, budget=budget)
        alpha.append(a)
        minimizers.append(nu)
        b = beta_n(omega, support, n)
        beta.append(b)
        eps.append(None if b is None else np.log(1.0 / b) / 2**n)
    bryuno = float(sum(np.log(1.0 / a) / 2**n for n, a in enumerate(alpha)))
    defined = [e for e in eps if e is not None]
    decreasing = all(x >= y for x, y in zip(defined, defined[1:]))
    return DiophantineReport(omega, n_max, alpha, beta, eps, bryuno, decreasing, minimizers)
