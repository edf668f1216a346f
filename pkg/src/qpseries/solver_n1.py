"""
Response solution for a simple zero (g'(c0) = a != 0).

The solution ``x = c0 + u`` is built as a power series in an auxiliary
parameter ``mu`` multiplying the nonlinearity and the forcing,

    eps x'' + x' + eps a x + mu eps G(x) = mu eps f~(omega t),

and summed at ``mu = 1``. Order ``k`` only depends on orders ``< k``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import EnvelopeViolation, ResonanceError, SolverError, ZeroLeadingCoefficient
from .fourier import FourierSeries, convolve, directional_derivative, evaluate
from .model import Problem, shifted_g_tail, validate

DIVISOR_FLOOR = 1e-300


def propagator_D(epsilon, s, a):
    """Linear symbol ``-eps s^2 + i s + eps a`` of the re-centred equation."""
    s = np.asarray(s, dtype=float)
    out = -epsilon * s**2 + 1j * s + epsilon * a
    return complex(out) if out.ndim == 0 else out


@dataclass
class SeriesSolution:
    """
    Coefficients ``orders[k-1] = u^(k)`` of the mu-expansion of ``u``.

    ``x(t) = c0 + sum_k u^(k)(omega t)`` at ``mu = 1``.
    """

    orders: list
    K: int
    mu_radius_estimate: float
    epsilon: float
    c0: float
    omega: np.ndarray
    radius_warning: bool = False
    meta: dict = field(default_factory=dict)

    def order(self, k: int) -> FourierSeries:
        return self.orders[k - 1]

    def total(self, mu: float = 1.0, K: int | None = None) -> FourierSeries:
        K = self.K if K is None else K
        dim = self.omega.shape[0]
        out = FourierSeries.zero(dim)
        for k, u in enumerate(self.orders[:K], start=1):
            out = out + u.scale(mu**k) if mu != 1.0 else out + u
        return out

    def position(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u = self.total()
        return self.c0 + evaluate(u, np.outer(t, self.omega)).real

    def velocity(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        du = directional_derivative(self.total(), self.omega, 1)
        return evaluate(du, np.outer(t, self.omega)).real

    def to_records(self) -> list[dict]:
        """Coefficient dump ``(k, nu, re, im)``."""
        rows = []
        for k, u in enumerate(self.orders, start=1):
            for nu, c in u.items():
                rows.append({"k": k, "nu": list(nu), "re": c.real, "im": c.imag})
        return rows


def first_order(problem: Problem) -> FourierSeries:
    """``u^(1)_nu = eps f_nu / D(eps, omega.nu)`` for ``nu != 0``; no zero mode."""
    a = validate(problem).a
    eps = problem.epsilon
    f = problem.f_tilde
    denom = propagator_D(eps, problem.frequencies(f.modes), a)
    denom = _checked(np.atleast_1d(denom), f)
    return FourierSeries(f.modes, eps * f.coeffs / denom, dim=problem.dim,
                         declared_real=True)


def _mu_powers(lower_orders, p_max: int, j_max: int, dim: int):
    """
    ``pw[p][j]`` = coefficient of ``mu**j`` in ``U(mu)**p`` where
    ``U = sum_k mu**k lower_orders[k-1]``; each entry sums over ordered
    compositions ``k_1 + ... + k_p = j``.
    """
    zero = FourierSeries.zero(dim)
    pw = {1: {j: (lower_orders[j - 1] if j <= len(lower_orders) else zero)
              for j in range(1, j_max + 1)}}
    for p in range(2, p_max + 1):
        pw[p] = {}
        for j in range(1, j_max + 1):
            acc = zero
            for i in range(1, j - p + 2):
                left = pw[p - 1].get(j - i)
                right = pw[1][i]
                if left is None or not left or not right:
                    continue
                acc = acc + convolve(left, right)
            pw[p][j] = acc
    return pw


def nonlinear_order(tail: np.ndarray, lower_orders, j: int, dim: int) -> FourierSeries:
    """Coefficient of ``mu**j`` in ``G(U(mu))`` with ``G = sum_p tail[p] x**p``."""
    out = FourierSeries.zero(dim)
    p_max = min(len(tail) - 1, j)
    if p_max < 2 or j < 1:
        return out
    pw = _mu_powers(lower_orders, p_max, j, dim)
    for p in range(2, p_max + 1):
        if tail[p] != 0:
            out = out + pw[p][j].scale(tail[p])
    return out


def recursion_step(problem: Problem, lower_orders, k: int) -> FourierSeries:
    """
    ``u^(k)`` from ``u^(1) .. u^(k-1)``.

    For ``nu != 0``: ``D(eps, omega.nu) u^(k)_nu = -eps [G(U)]^(k-1)_nu``;
    for ``nu = 0``: ``a u^(k)_0 = -[G(U)]^(k-1)_0``.
    """
    if k < 2:
        raise ValueError("recursion_step needs k >= 2")
    if len(lower_orders) < k - 1:
        raise ValueError(f"need orders 1..{k - 1}, got {len(lower_orders)}")
    report = validate(problem)
    a = report.a
    if a == 0:
        raise ZeroLeadingCoefficient("cannot solve for the zero mode with a = 0")
    eps = problem.epsilon
    tail = shifted_g_tail(problem.nonlinearity)
    rhs = nonlinear_order(tail, lower_orders[: k - 1], k - 1, problem.dim)
    if not rhs:
        return FourierSeries.zero(problem.dim)
    s = problem.frequencies(rhs.modes)
    is_zero = np.all(rhs.modes == 0, axis=1)
    denom = np.where(is_zero, a, np.atleast_1d(propagator_D(eps, s, a)))
    numer = np.where(is_zero, -rhs.coeffs, -eps * rhs.coeffs)
    coeffs = numer / _checked(denom, rhs)
    return FourierSeries(rhs.modes, coeffs, dim=problem.dim, declared_real=True)


def _checked(denom, series):
    small = np.abs(denom) < DIVISOR_FLOOR
    if np.any(small):
        nu = tuple(series.modes[np.argmax(small)].tolist())
        raise ResonanceError(f"divisor below {DIVISOR_FLOOR} at nu = {nu}")
    return denom


def root_test_radius(orders) -> float:
    """
    ``1 / max_k ||u^(k)||^(1/k)`` over the upper half of the computed window
    (sup-of-coefficient norm, empty orders skipped).
    """
    K = len(orders)
    vals = []
    for k in range(max(1, (K + 1) // 2), K + 1):
        norm = orders[k - 1].sup_coeff()
        if norm > 0:
            vals.append(norm ** (1.0 / k))
    if not vals:
        return float("inf")
    return 1.0 / max(vals)


def solve(problem: Problem, K: int) -> SeriesSolution:
    """Orders ``1..K`` of the mu-series and its root-test radius."""
    if K < 1:
        raise ValueError("K must be >= 1")
    report = validate(problem)
    if report.gotn != 1:
        raise SolverError(f"solver_n1 handles simple zeros; got order {report.gotn}")
    orders = [first_order(problem)]
    for k in range(2, K + 1):
        orders.append(recursion_step(problem, orders, k))
    radius = root_test_radius(orders)
    warn = radius <= 1.0
    if warn:
        warnings.warn(f"estimated mu-radius {radius:.3g} <= 1: the sum at mu = 1 is unreliable",
                      RuntimeWarning, stacklevel=2)
    return SeriesSolution(orders, K, radius, problem.epsilon, problem.nonlinearity.c0,
                          problem.omega, radius_warning=warn)


@dataclass
class DecayEnvelope:
    """
    Fitted bound ``|u^(k)_nu| <= A C^k exp(-xi' |nu|) |eps|^((k+1)/2)``.

    ``max_scaling_ratio`` is the largest observed
    ``|u^(k)_nu(eps/2)| / |u^(k)_nu(eps)| / 2^-((k+1)/2)``.
    """

    A: float
    C: float
    xi_prime: float
    max_scaling_ratio: float
    slack: float = 1.2

    @staticmethod
    def exponent_law(k: int) -> float:
        return (k + 1) / 2

    def bound(self, k: int, nu, epsilon: float) -> float:
        norm = np.abs(np.asarray(nu)).sum()
        return self.A * self.C**k * np.exp(-self.xi_prime * norm) * abs(epsilon) ** self.exponent_law(k)


def fit_envelope(orders, epsilon: float, exponent_law=DecayEnvelope.exponent_law):
    """
    Tightest ``(A, C, xi')`` in log-space: minimise the summed log-gap of the
    envelope over all stored coefficients subject to domination (an LP).
    """
    rows, y = [], []
    for k, u in enumerate(orders, start=1):
        for nu, c in u.items():
            if c == 0:
                continue
            rows.append((1.0, float(k), -float(sum(abs(x) for x in nu))))
            y.append(np.log(abs(c)) - exponent_law(k) * np.log(abs(epsilon)))
    if not rows:
        return 1.0, 1.0, 0.0
    X = np.array(rows)
    y = np.array(y)
    # maximise the envelope's tightness: minimise sum(X @ theta) s.t. X @ theta >= y
    res = linprog(c=X.sum(axis=0), A_ub=-X, b_ub=-y,
                  bounds=[(None, None), (None, None), (0.0, None)], method="highs")
    if not res.success:
        # unbounded direction (too few points): fall back to a pure sup fit
        return float(np.exp(np.max(y))), 1.0, 0.0
    logA, logC, xi = res.x
    # guard against rounding in the LP solution
    slack = float(np.max(y - X @ res.x))
    logA += max(slack, 0.0)
    return float(np.exp(logA)), float(np.exp(logC)), float(xi)


def scaling_ratios(orders_eps, orders_half, exponent_law):
    """Per-order max of ``|u(eps/2)| / |u(eps)|`` divided by ``2**-exponent_law(k)``."""
    out = {}
    for k, (u, v) in enumerate(zip(orders_eps, orders_half), start=1):
        worst = 0.0
        for nu, c in u.items():
            if c == 0:
                continue
            worst = max(worst, abs(v[nu]) / abs(c) * 2.0 ** exponent_law(k))
        out[k] = worst
    return out


def check_envelope(solution: SeriesSolution, problem: Problem, slack: float = 1.2) -> DecayEnvelope:
    """
    Fit the decay envelope and verify the eps-scaling by recomputing at eps/2.

    Raises ``EnvelopeViolation`` if some stored coefficient shrinks by less
    than ``2**-((k+1)/2) * slack`` when eps is halved.
    """
    if solution.K < 3:
        raise ValueError("check_envelope needs K >= 3")
    A, C, xi = fit_envelope(solution.orders, solution.epsilon)
    half = solve(problem.with_epsilon(solution.epsilon / 2), solution.K)
    ratios = scaling_ratios(solution.orders, half.orders, DecayEnvelope.exponent_law)
    worst = max(ratios.values()) if ratios else 0.0
    if worst > slack:
        bad = max(ratios, key=ratios.get)
        raise EnvelopeViolation(f"order {bad}: eps-scaling ratio {worst:.4g} exceeds {slack}")
    return DecayEnvelope(A, C, xi, worst, slack)


def propagator_violations(eps_values, s_values, a: float, rtol: float = 1e-14) -> int:
    """Grid points where ``|D(eps, s)| < max(|a eps|, |s|)`` beyond rounding."""
    eps = np.asarray(eps_values, dtype=float)[:, None]
    s = np.asarray(s_values, dtype=float)[None, :]
    mag = np.abs(-eps * s**2 + 1j * s + eps * a)
    floor = np.maximum(np.abs(a * eps), np.abs(s))
    return int(np.count_nonzero(mag < floor * (1 - rtol)))
