"""
Problem data for ``eps x'' + x' + eps g(x) = eps f(omega t)``.

``g`` is a polynomial. Internally it is kept as its Taylor data at the
equilibrium ``c0``: ``taylor[p] = g^(p)(c0) / p!``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import AverageMismatch, EvenOrderZero, ValidationError, ZeroLeadingCoefficient
from .fourier import FourierSeries, average
from .frequency import as_frequency_vector

TAYLOR_TOL = 1e-12
AVERAGE_TOL = 1e-10


def recenter(coeffs_in_x, c0: float) -> np.ndarray:
    """Taylor coefficients at ``c0`` of the polynomial ``sum_j coeffs[j] x**j``."""
    c = np.asarray(coeffs_in_x, dtype=float)
    out = np.zeros_like(c)
    for p in range(len(c)):
        out[p] = sum(c[j] * comb(j, p) * c0 ** (j - p) for j in range(p, len(c)))
    return out


@dataclass(frozen=True)
class Nonlinearity:
    c0: float
    taylor: tuple

    @classmethod
    def from_polynomial(cls, coeffs_in_x, c0: float = 0.0) -> "Nonlinearity":
        return cls(float(c0), tuple(float(a) for a in recenter(coeffs_in_x, c0)))

    @property
    def gotn(self) -> int | None:
        """Order of the zero of ``g - g(c0)`` at ``c0`` (``None`` if g is constant)."""
        for p in range(1, len(self.taylor)):
            if abs(self.taylor[p]) > TAYLOR_TOL:
                return p
        return None

    @property
    def a(self) -> float:
        n = self.gotn
        if n is None:
            raise ZeroLeadingCoefficient("g - g(c0) vanishes identically")
        return self.taylor[n]

    def __call__(self, x):
        """g(x) from the Taylor data (Horner in ``x - c0``)."""
        y = np.asarray(x, dtype=float) - self.c0
        out = np.zeros_like(y)
        for a in reversed(self.taylor):
            out = out * y + a
        return out


@dataclass(frozen=True)
class Problem:
    omega: np.ndarray
    forcing: FourierSeries
    nonlinearity: Nonlinearity
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "omega", as_frequency_vector(self.omega))
        if self.forcing.dim != self.omega.shape[0]:
            raise ValidationError("forcing dimension differs from len(omega)")

    @classmethod
    def build(cls, omega, forcing, g_coeffs, c0: float = 0.0, epsilon: float = 0.0) -> "Problem":
        """Convenience constructor; ``forcing`` is a dict ``{nu: f_nu}`` or a series."""
        omega = as_frequency_vector(omega)
        if not isinstance(forcing, FourierSeries):
            forcing = FourierSeries.from_dict(forcing, dim=omega.shape[0], declared_real=True)
        return cls(omega, forcing, Nonlinearity.from_polynomial(g_coeffs, c0), float(epsilon))

    def with_epsilon(self, epsilon: float) -> "Problem":
        return Problem(self.omega, self.forcing, self.nonlinearity, float(epsilon))

    @property
    def dim(self) -> int:
        return self.omega.shape[0]

    @property
    def degree(self) -> int:
        """Degree N of the trigonometric polynomial f."""
        return self.forcing.degree

    @property
    def f_tilde(self) -> FourierSeries:
        return self.forcing.without_zero_mode()

    def frequencies(self, modes) -> np.ndarray:
        return np.asarray(modes, dtype=float).reshape(-1, self.dim) @ self.omega


@dataclass(frozen=True)
class ValidationReport:
    gotn: int
    a: float
    N: int
    solver: str


def validate(problem: Problem) -> ValidationReport:
    """
    Check the non-degeneracy requirements and pick the solver.

    Raises ``AverageMismatch`` if ``g(c0) != f_0``, ``ZeroLeadingCoefficient``
    if ``g - g(c0)`` has no nonzero Taylor coefficient, ``EvenOrderZero`` if
    the first nonzero one has even order.
    """
    nl = problem.nonlinearity
    f0 = average(problem.forcing)
    if abs(nl.taylor[0] - f0) > AVERAGE_TOL:
        raise AverageMismatch(f"g(c0) = {nl.taylor[0]!r} differs from average of f = {f0!r}")
    if not problem.forcing.is_real():
        raise ValidationError("forcing is not a real function")
    n = nl.gotn
    if n is None:
        raise ZeroLeadingCoefficient("g - g(c0) vanishes identically")
    if n % 2 == 0:
        raise EvenOrderZero(f"zero of even order {n}: no response solution near c0")
    return ValidationReport(gotn=n, a=nl.taylor[n], N=problem.degree,
                            solver="n1" if n == 1 else "n3")


def shifted_g_tail(nonlinearity: Nonlinearity) -> np.ndarray:
    """
    Taylor coefficients of the nonlinear remainder, indexed by power.

    For a simple zero this is ``g(c0+x) - g(c0) - a x`` (entries from p = 2);
    for a zero of order n >= 3 it is ``sum_{p >= n} a_p x**p``. Lower entries
    are zero and trailing zeros are trimmed, so ``g = x`` gives an empty array.
    """
    n = nonlinearity.gotn
    if n is None:
        raise ZeroLeadingCoefficient("g - g(c0) vanishes identically")
    start = 2 if n == 1 else n
    tail = np.array(nonlinearity.taylor, dtype=float)
    tail[:start] = 0.0
    nz = np.nonzero(tail)[0]
    return tail[: nz[-1] + 1] if nz.size else np.zeros(0)
