"""
Response solution for a zero of odd order n >= 3.

Write ``x = c0 + eps x1 + xi`` with ``x1 = zeta + u1`` solving the linear
first-order problem. The zero-average correction ``xi`` solves

    eps xi'' + xi' + b eps^n xi + mu eps Ghat(mu eps x1, xi) = 0,

where the counterterm ``b eps^n xi`` collects the averaged linear part of the
nonlinearity. ``xi`` is a mu-series starting at order 2 and the free average
``zeta`` is fixed by requiring the zero mode of the equation to vanish.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import brentq

from .errors import (EnvelopeViolation, NoRealRoot, OuterIterationDivergence, ResonanceError, SolverError,
                     ValidationError)
from .fourier import FourierSeries, average, convolve, power
from .frequency import lattice_minimum
from .model import Problem, shifted_g_tail, validate
from .solver_n1 import DIVISOR_FLOOR, SeriesSolution, nonlinear_order, root_test_radius


def x1_coefficients(problem: Problem) -> FourierSeries:
    """``u1_nu = f_nu / (i s (1 + i eps s))`` with ``s = omega.nu``, ``nu != 0``."""
    f = problem.f_tilde
    s = problem.frequencies(f.modes)
    denom = 1j * s * (1 + 1j * problem.epsilon * s)
    if np.any(np.abs(denom) < DIVISOR_FLOOR):
        raise ResonanceError("omega . nu numerically zero on the forcing support")
    return FourierSeries(f.modes, f.coeffs / denom, dim=problem.dim, declared_real=True)


def alpha_min(problem: Problem, budget: int = 10**7) -> float:
    """Smallest ``|omega.nu|`` over ``0 < |nu|_1 <= (n+1) N``."""
    n = validate(problem).gotn
    value, _ = lattice_minimum(problem.omega, (n + 1) * problem.degree, budget=budget)
    if value is None:
        # constant forcing: nothing to bound, no divisor ever appears
        return float("inf")
    return value


def _x1(problem: Problem, zeta: float, u1: FourierSeries | None = None) -> FourierSeries:
    u1 = x1_coefficients(problem) if u1 is None else u1
    return u1 + FourierSeries.constant(float(zeta), problem.dim)


def x1_power_averages(x1: FourierSeries, p_max: int) -> list:
    """``[x1**j]_0`` for ``j = 0..p_max`` (real parts)."""
    out, acc = [1.0], FourierSeries.constant(1.0, x1.dim)
    for _ in range(p_max):
        acc = convolve(acc, x1)
        out.append(average(acc).real)
    return out


def counterterm_b(problem: Problem, zeta: float, u1: FourierSeries | None = None):
    """
    Return ``(b, b0)`` with ``b = sum_{p>=n} p a_p eps^(p-n) [x1^(p-1)]_0`` and
    ``b0 = n a [x1^(n-1)]_0``.
    """
    n = validate(problem).gotn
    tail = shifted_g_tail(problem.nonlinearity)
    x1 = _x1(problem, zeta, u1)
    avg = x1_power_averages(x1, max(len(tail) - 1, n))
    eps = problem.epsilon
    b = sum(p * tail[p] * eps ** (p - n) * avg[p - 1] for p in range(n, len(tail)))
    b0 = n * problem.nonlinearity.a * avg[n - 1]
    return float(b), float(b0)


def propagators(epsilon: float, s, b: float, gotn: int):
    """``(G_E, G_V) = (1/(i s (1 + i eps s)), 1/(i s (1 + i eps s) + b eps^n))``."""
    s = np.asarray(s, dtype=float)
    base = 1j * s * (1 + 1j * epsilon * s)
    dv = base + b * epsilon**gotn
    if np.any(np.abs(base) < DIVISOR_FLOOR) or np.any(np.abs(dv) < DIVISOR_FLOOR):
        raise ResonanceError("propagator divisor vanishes")
    ge, gv = 1.0 / base, 1.0 / dv
    if ge.ndim == 0:
        return complex(ge), complex(gv)
    return ge, gv


def D_V(epsilon: float, s, b: float, gotn: int):
    s = np.asarray(s, dtype=float)
    return 1j * s * (1 + 1j * epsilon * s) + b * epsilon**gotn


@dataclass
class DegenerateState:
    """
    Everything the degenerate recursion needs at fixed ``zeta``.

    ``xi_orders[k-2]`` is ``xi^[k]`` for ``k = 2..K``.
    """

    zeta: float
    u1: FourierSeries
    b: float
    b0: float
    alpha_min: float
    xi_orders: list = field(default_factory=list)
    epsilon: float = 0.0
    gotn: int = 3
    f2_residual: float | None = None
    zeta0: float | None = None
    dfbar_dzeta: float | None = None
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    def xi(self, k: int) -> FourierSeries:
        return self.xi_orders[k - 2]

    def mu_orders(self, problem: Problem) -> list:
        """mu-orders of ``ubar = mu eps x1 + xibar``: ``[eps x1, xi^[2], xi^[3], ...]``."""
        return [_x1(problem, self.zeta, self.u1).scale(problem.epsilon)] + list(self.xi_orders)

    def report(self) -> dict:
        return {"zeta": self.zeta, "b": self.b, "b0": self.b0, "alpha_min": self.alpha_min,
                "F2_residual": self.f2_residual, "zeta0": self.zeta0,
                "dFbar2_dzeta": self.dfbar_dzeta, "iterations": self.iterations}


def initial_state(problem: Problem, zeta: float) -> DegenerateState:
    report = validate(problem)
    if report.gotn < 3:
        raise SolverError("solver_n3 handles zeros of order >= 3")
    u1 = x1_coefficients(problem)
    b, b0 = counterterm_b(problem, zeta, u1)
    return DegenerateState(float(zeta), u1, b, b0, alpha_min(problem), [],
                           problem.epsilon, report.gotn)


def recursion_step_n3(problem: Problem, state: DegenerateState, k: int) -> FourierSeries:
    """
    ``xi^[k]`` from ``zeta`` and ``xi^[2] .. xi^[k-1]``.

    With ``Y = mu eps x1 + sum_j mu^j xi^[j]`` one has
    ``Ghat = Gtilde(Y) - Xi * sum_p p a_p [(mu eps x1)^(p-1)]_0``; the mu^(k-1)
    coefficient of ``eps Ghat`` is divided mode-wise by ``D_V``, zero mode dropped.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(state.xi_orders) < k - 2:
        raise ValueError(f"state holds xi up to order {len(state.xi_orders) + 1}, need {k - 1}")
    eps, n, dim = problem.epsilon, state.gotn, problem.dim
    tail = shifted_g_tail(problem.nonlinearity)
    x1 = _x1(problem, state.zeta, state.u1)
    y_orders = [x1.scale(eps)] + list(state.xi_orders[: k - 2])
    rhs = nonlinear_order(tail, y_orders, k - 1, dim)
    # averaged s = 1 part, already moved into b eps^n on the left
    avg = x1_power_averages(x1, len(tail))
    for p in range(n, len(tail)):
        j = k - 1 - (p - 1)
        if tail[p] == 0 or j < 2 or j > len(state.xi_orders) + 1:
            continue
        coef = p * tail[p] * eps ** (p - 1) * avg[p - 1]
        rhs = rhs - state.xi(j).scale(coef)
    rhs = rhs.without_zero_mode()
    if not rhs:
        return FourierSeries.zero(dim)
    dv = D_V(eps, problem.frequencies(rhs.modes), state.b, n)
    if np.any(np.abs(dv) < DIVISOR_FLOOR):
        raise ResonanceError("D_V vanishes on the support of the right-hand side")
    return FourierSeries(rhs.modes, -eps * rhs.coeffs / dv, dim=dim, declared_real=True)


def build_orders(problem: Problem, zeta: float, K: int) -> DegenerateState:
    """State at the given ``zeta`` with ``xi^[2] .. xi^[K]`` filled in."""
    state = initial_state(problem, zeta)
    for k in range(2, K + 1):
        state.xi_orders.append(recursion_step_n3(problem, state, k))
    return state


def fbar2_coefficients(problem: Problem, u1: FourierSeries | None = None) -> np.ndarray:
    """
    Coefficients (highest power first) of ``Fbar2(zeta) = [(zeta + u1)^n]_0``,
    a monic polynomial of degree ``n``.
    """
    n = validate(problem).gotn
    u1 = x1_coefficients(problem) if u1 is None else u1
    mom = [average(power(u1, j)).real for j in range(n + 1)]
    # (zeta + u)^n = sum_j C(n, j) zeta^(n-j) u^j
    return np.array([comb(n, j) * mom[j] for j in range(n + 1)])


def fbar2_root(coeffs: np.ndarray) -> float:
    """
    The real root of the monic polynomial ``coeffs``: bracketing on the
    Cauchy interval, Brent, then Newton polishing.
    """
    R = 1.0 + float(np.sum(np.abs(coeffs[1:])))
    lo, hi = np.polyval(coeffs, -R), np.polyval(coeffs, R)
    if lo * hi > 0:
        raise NoRealRoot("no sign change of Fbar2 on its Cauchy interval")
    if lo == 0:
        return -R
    if hi == 0:
        return R
    z = brentq(lambda t: np.polyval(coeffs, t), -R, R, xtol=1e-15, maxiter=500)
    deriv = np.polyder(coeffs)
    for _ in range(3):
        d = np.polyval(deriv, z)
        if d == 0:
            break
        z -= np.polyval(coeffs, z) / d
    return float(z)


def f2_value(problem: Problem, state: DegenerateState) -> float:
    """
    Zero mode of the equation at ``mu = 1``, normalised to tend to Fbar2:
    ``[eps Ghat(eps x1, xi)]_0 / (a eps^(n+1))``.

    Since ``xi`` has zero average the subtracted s = 1 term averages to
    zero, leaving ``[Gtilde(eps x1 + xi)]_0``.
    """
    eps, n = problem.epsilon, state.gotn
    tail = shifted_g_tail(problem.nonlinearity)
    y = _x1(problem, state.zeta, state.u1).scale(eps)
    for x in state.xi_orders:
        y = y + x
    acc, total = FourierSeries.constant(1.0, problem.dim), 0.0
    for p in range(1, len(tail)):
        acc = convolve(acc, y)
        if tail[p] != 0:
            total += tail[p] * average(acc).real
    return total / (problem.nonlinearity.a * eps**n)


def solve_zeta(problem: Problem, K: int, tol_scale: float = 1e-11,
               max_iter: int = 60) -> DegenerateState:
    """
    Fix ``zeta`` so that the zero mode of the equation vanishes.

    Starts from the root ``zeta0`` of ``Fbar2`` and runs a secant iteration on
    ``zeta -> F2(zeta, eps)``, rebuilding all xi-orders up to ``K`` at every
    evaluation. Iterates leaving ``|zeta| <= 2|zeta0| + 1`` abort.
    """
    if problem.epsilon == 0:
        raise ValidationError("solve_zeta needs eps != 0")
    report = validate(problem)
    if report.gotn < 3:
        raise SolverError("solve_zeta applies to zeros of order >= 3")
    u1 = x1_coefficients(problem)
    coeffs = fbar2_coefficients(problem, u1)
    zeta0 = fbar2_root(coeffs)
    tol = tol_scale * max(1.0, float(np.max(np.abs(coeffs))))
    zbar = 2 * abs(zeta0) + 1

    def F(z):
        st = build_orders(problem, z, K)
        return f2_value(problem, st), st

    z0 = zeta0
    f0, st0 = F(z0)
    it = 0
    if abs(f0) > tol:
        z1 = z0 + 1e-4 * max(1.0, abs(z0))
        f1, st1 = F(z1)
        while abs(f1) > tol:
            it += 1
            if it > max_iter or f1 == f0:
                raise OuterIterationDivergence(f"secant stalled after {it} steps, |F2| = {abs(f1):.3g}")
            z0, z1 = z1, z1 - f1 * (z1 - z0) / (f1 - f0)
            f0 = f1
            if abs(z1) > zbar:
                raise OuterIterationDivergence(f"zeta = {z1:.6g} left |zeta| <= {zbar:.6g}")
            f1, st1 = F(z1)
        st0, f0 = st1, f1
    st0.f2_residual = float(f0)
    st0.zeta0 = zeta0
    st0.dfbar_dzeta = float(np.polyval(np.polyder(coeffs), zeta0))
    st0.iterations = it
    return st0


def fbar2_slope_matches(state: DegenerateState, problem: Problem) -> float:
    """``|dFbar2/dzeta(zeta0) - b0(zeta0)/a|``; the two agree identically."""
    _, b0 = counterterm_b(problem, state.zeta0, state.u1)
    return abs(state.dfbar_dzeta - b0 / problem.nonlinearity.a)


def assemble(problem: Problem, state: DegenerateState | None, K: int) -> SeriesSolution:
    """``u = eps (zeta + u1) + sum_{k=2}^K xi^[k]`` packaged as mu-orders."""
    dim = problem.dim
    if problem.epsilon == 0:
        orders = [FourierSeries.zero(dim) for _ in range(K)]
        return SeriesSolution(orders, K, float("inf"), 0.0, problem.nonlinearity.c0, problem.omega)
    orders = state.mu_orders(problem)[:K]
    while len(orders) < K:
        orders.append(FourierSeries.zero(dim))
    sol = SeriesSolution(orders, K, root_test_radius(orders), problem.epsilon,
                         problem.nonlinearity.c0, problem.omega)
    sol.meta.update(state.report())
    return sol


def solve(problem: Problem, K: int):
    """``(SeriesSolution, DegenerateState)``; the state is ``None`` at eps = 0."""
    if problem.epsilon == 0:
        return assemble(problem, None, K), None
    state = solve_zeta(problem, K)
    return assemble(problem, state, K), state


def propagator_violations(eps_values, s_values, b: float, gotn: int, rtol: float = 1e-14) -> int:
    """Grid points where ``|D_V(eps, s)| < max(|s|, |b eps^n|)`` beyond rounding."""
    eps = np.asarray(eps_values, dtype=float)[:, None]
    s = np.asarray(s_values, dtype=float)[None, :]
    mag = np.abs(1j * s * (1 + 1j * eps * s) + b * eps**gotn)
    floor = np.maximum(np.abs(s), np.abs(b * eps**gotn))
    return int(np.count_nonzero(mag < floor * (1 - rtol)))


def scaling_exponent(k: int, gotn: int) -> float:
    """Exponent ``1 + k (n-1) / n^2`` of the order-k bound in eps."""
    return 1.0 + k * (gotn - 1) / gotn**2


def scaling_ratios(problem: Problem, K: int) -> dict:
    """
    ``{k: (|xi^[k](eps/2)| / |xi^[k](eps)|) * 2**exponent}`` for the nonempty
    orders ``2..K``, using the sup-coefficient norm and re-solving ``zeta``
    at each eps. Values ``<= 1`` mean the order shrinks at least as fast as
    the bound predicts.
    """
    gotn = validate(problem).gotn
    full = solve_zeta(problem, K)
    half = solve_zeta(problem.with_epsilon(problem.epsilon / 2), K)
    out = {}
    for k in range(2, K + 1):
        top = full.xi(k).sup_coeff()
        if top == 0:
            continue
        out[k] = half.xi(k).sup_coeff() / top * 2.0 ** scaling_exponent(k, gotn)
    return out


def check_scaling(problem: Problem, K: int, slack: float = 1.25) -> dict:
    """``scaling_ratios`` that raises ``EnvelopeViolation`` above ``slack``."""
    ratios = scaling_ratios(problem, K)
    for k, r in ratios.items():
        if r > slack:
            raise EnvelopeViolation(f"order {k}: eps-scaling ratio {r:.4g} exceeds {slack}")
    return ratios
