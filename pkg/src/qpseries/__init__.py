"""
Quasi-periodic response solutions of strongly damped forced oscillators.

The model is ``eps x'' + x' + eps g(x) = eps f(omega t)`` with a
trigonometric-polynomial forcing ``f`` on the d-torus and a polynomial
``g``. The package builds the solution ``x(t) = c0 + u(omega t)`` as a power
series, checks it against an independent tree expansion and the original
equation, and integrates the ODE to test attractivity.
"""
from . import errors, fourier, frequency, model, solver_n1, solver_n3, trees, verify
from .errors import QPSeriesError
from .fourier import FourierSeries
from .frequency import alpha_n, beta_n, diagnose
from .model import Nonlinearity, Problem, validate
from .solver_n1 import SeriesSolution


def solve(problem: Problem, K: int) -> SeriesSolution:
    """Solve with the scheme matching the order of the zero of ``g - f0``."""
    if validate(problem).gotn == 1:
        return solver_n1.solve(problem, K)
    return solver_n3.solve(problem, K)[0]


__all__ = [
    "FourierSeries", "Nonlinearity", "Problem", "QPSeriesError", "SeriesSolution",
    "alpha_n", "beta_n", "diagnose", "errors", "fourier", "frequency", "model", "solve",
    "solver_n1", "solver_n3", "trees", "validate", "verify",
]
__version__ = "0.1.0"
