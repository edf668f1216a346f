"""
Checks of a constructed solution against the original equation.

``residual`` measures how well ``x = c0 + u(omega t)`` solves
``eps x'' + x' + eps g(x) = eps f(omega t)`` on the torus, both on the
Fourier side and by sampling. ``integrate`` runs the ODE forward in time with
an exponential integrator so that trajectories can be compared with the
constructed solution.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import NonFiniteState, StepTooLarge
from .fourier import FourierSeries, compose_polynomial, directional_derivative, evaluate
from .model import Problem, validate


@dataclass
class ResidualReport:
    grid_size: int
    sup_residual: float
    per_mode_residual: FourierSeries
    fourier_sup: float

    @property
    def sup_coeff(self) -> float:
        return self.per_mode_residual.sup_coeff()


def torus_grid(dim: int, n: int) -> np.ndarray:
    """Uniform grid of ``n**dim`` angles on the torus, shape (n**dim, dim)."""
    axis = 2 * np.pi * np.arange(n) / n
    return np.array(list(itertools.product(axis, repeat=dim)))


def _default_grid(dim: int, degree: int) -> int:
    n = max(64, 4 * degree + 1)
    return n if dim == 1 else max(16, min(n, int(2e5 ** (1 / dim))))


def residual(problem: Problem, solution, grid_size: int | None = None) -> ResidualReport:
    """
    ``R = eps (omega.d)^2 u + (omega.d) u + eps g(c0 + u) - eps f``.

    ``per_mode_residual`` is computed with exact series algebra;
    ``sup_residual`` independently samples the same expression pointwise on a
    uniform grid (``grid_size`` points per torus direction).
    """
    eps = problem.epsilon
    omega = problem.omega
    u = solution.total() if hasattr(solution, "total") else solution
    taylor = problem.nonlinearity.taylor
    fourier_side = (directional_derivative(u, omega, 2).scale(eps)
                    + directional_derivative(u, omega, 1)
                    + compose_polynomial(taylor, u).scale(eps)
                    - problem.forcing.scale(eps))
    degree = max(fourier_side.degree, 1)
    n = grid_size or _default_grid(problem.dim, degree)
    psi = torus_grid(problem.dim, n)
    u_val = evaluate(u, psi).real
    du = evaluate(directional_derivative(u, omega, 1), psi).real
    ddu = evaluate(directional_derivative(u, omega, 2), psi).real
    g_val = problem.nonlinearity(problem.nonlinearity.c0 + u_val)
    f_val = evaluate(problem.forcing, psi).real
    sampled = eps * ddu + du + eps * g_val - eps * f_val
    fsup = float(np.max(np.abs(evaluate(fourier_side, psi)))) if len(fourier_side) else 0.0
    return ResidualReport(n, float(np.max(np.abs(sampled))), fourier_side, fsup)


def residual_sweep(problem: Problem, eps_list, orders) -> list[dict]:
    """Rows ``{epsilon, K, sup_residual}`` over the grid ``eps_list x orders``."""
    from . import solver_n1, solver_n3

    rows = []
    n = validate(problem).gotn
    for eps in eps_list:
        p = problem.with_epsilon(float(eps))
        for K in orders:
            if n == 1:
                sol = solver_n1.solve(p, K)
            else:
                sol, _ = solver_n3.solve(p, K)
            rows.append({"epsilon": float(eps), "K": int(K),
                         "sup_residual": residual(p, sol).sup_residual})
    return rows


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # shape (n, 2): x, v
    distance_to_solution: np.ndarray | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "v", "distance"])
            dist = self.distance_to_solution
            for i, t in enumerate(self.times):
                d = "" if dist is None else format(dist[i], ".17g")
                w.writerow([format(t, ".17g"), format(self.states[i, 0], ".17g"),
                            format(self.states[i, 1], ".17g"), d])


def default_dt(problem: Problem) -> float:
    """``min(2 pi / (20 max|omega.nu|), eps / 5)`` over the forcing support."""
    f = problem.f_tilde
    s_max = float(np.max(np.abs(problem.frequencies(f.modes)))) if len(f) else 0.0
    cand = [problem.epsilon / 5]
    if s_max > 0:
        cand.append(2 * np.pi / (20 * s_max))
    return min(cand)


def _phi_matrices(L: np.ndarray, h: float):
    """``exp(hL), phi1(hL), phi2(hL)`` from one block exponential."""
    n = L.shape[0]
    M = np.zeros((3 * n, 3 * n))
    M[:n, :n] = h * L
    M[:n, n:2 * n] = np.eye(n)
    M[n:2 * n, 2 * n:] = np.eye(n)
    E = expm(M)
    return E[:n, :n], E[:n, n:2 * n], E[:n, 2 * n:]


def integrate(problem: Problem, x0: float, v0: float, t_end: float, dt: float | None = None,
              solution=None, record_every: int = 1) -> TrajectoryRecord:
    """
    Integrate ``x' = v``, ``v' = -v/eps + f(omega t) - g(x)``.

    Second-order exponential Runge-Kutta (ETD2RK): the linear part
    ``(x, v) -> (v, -v/eps)`` is propagated exactly, the forcing and ``g`` enter
    through phi-functions. If ``solution`` is given, ``|x - x_sol|`` is
    recorded as well.
    """
    eps = problem.epsilon
    if eps <= 0:
        raise ValueError("time integration needs eps > 0")
    h = default_dt(problem) if dt is None else float(dt)
    f = problem.f_tilde
    s_max = float(np.max(np.abs(problem.frequencies(f.modes)))) if len(f) else 0.0
    if h <= 0 or (s_max > 0 and h > np.pi / s_max):
        raise StepTooLarge(f"dt = {h:.4g} does not resolve the forcing")
    n_steps = int(np.ceil(t_end / h - 1e-9))
    times = h * np.arange(n_steps + 1)
    L = np.array([[0.0, 1.0], [0.0, -1.0 / eps]])
    E, P1, P2 = _phi_matrices(L, h)
    e1, p1, p2 = E, h * P1[:, 1], h * P2[:, 1]
    forcing = evaluate(problem.forcing, np.outer(times, problem.omega)).real
    g = problem.nonlinearity
    y = np.array([x0, v0], dtype=float)
    states = np.empty((n_steps + 1, 2))
    states[0] = y
    bound = 1e6 * (1.0 + abs(x0) + abs(v0))
    for i in range(n_steps):
        n0 = forcing[i] - g(y[0])
        a = e1 @ y + p1 * n0
        n1 = forcing[i + 1] - g(a[0])
        y = a + p2 * (n1 - n0)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(f"non-finite state at t = {times[i + 1]:.6g}")
        if abs(y[0]) > bound:
            raise StepTooLarge(f"stability monitor: |x| = {abs(y[0]):.3g} at t = {times[i + 1]:.6g}")
        states[i + 1] = y
    sl = slice(None, None, record_every)
    rec = TrajectoryRecord(times[sl], states[sl])
    if solution is not None:
        rec.distance_to_solution = np.abs(rec.states[:, 0] - solution.position(rec.times))
    return rec


def decay_rate(times: np.ndarray, dist: np.ndarray, floor: float = 1e-13) -> float:
    """Least-squares slope of ``-log(distance)`` over the second half of the run."""
    half = times.shape[0] // 2
    t, d = times[half:], dist[half:]
    keep = d > floor
    if keep.sum() < 2:
        return float("nan")
    slope = np.polyfit(t[keep], np.log(d[keep]), 1)[0]
    return float(-slope)


@dataclass
class AttractorReport:
    offsets: list
    terminal_distance: list
    decay_rates: list
    passed_each: list
    threshold: float
    t_end: float
    exploratory: bool
    trajectories: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.passed_each)


def attractor_test(problem: Problem, solution, perturbations, t_end: float = 100.0,
                   threshold: float = 1e-6, dt: float | None = None,
                   max_offset: float = 0.1) -> AttractorReport:
    """
    Start at ``x_sol(0) + delta`` (with the solution's velocity) for each
    offset ``delta`` and check that ``|x - x_sol|`` drops below ``threshold``
    by ``t_end``. Offsets above ``max_offset`` are reported but not required
    to pass. Runs outside the simple-zero, ``a > 0`` setting are flagged
    exploratory.
    """
    rep = validate(problem)
    exploratory = not (rep.gotn == 1 and rep.a > 0 and problem.epsilon > 0)
    x_star = float(solution.position(0.0)[0])
    v_star = float(solution.velocity(0.0)[0])
    out = AttractorReport([], [], [], [], threshold, t_end, exploratory)
    for delta in perturbations:
        rec = integrate(problem, x_star + delta, v_star, t_end, dt=dt, solution=solution)
        d_end = float(rec.distance_to_solution[-1])
        out.offsets.append(float(delta))
        out.terminal_distance.append(d_end)
        out.decay_rates.append(decay_rate(rec.times, rec.distance_to_solution))
        out.passed_each.append(d_end <= threshold or abs(delta) > max_offset)
        out.trajectories.append(rec)
    return out
