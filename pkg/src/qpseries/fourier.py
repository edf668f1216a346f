"""
Sparse truncated Fourier series on the d-torus.

A series is stored as a lexicographically sorted array of integer mode
vectors together with the matching complex coefficients.  Products are exact
sparse convolutions (no FFT): supports stay small and the order-by-order
identities must hold to rounding error.
"""
from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch

REALITY_TOL = 1e-13


def _canonical(modes: np.ndarray, coeffs: np.ndarray, dim: int):
    if modes.shape[0] == 0:
        return np.zeros((0, dim), dtype=np.int64), np.zeros(0, dtype=np.complex128)
    uniq, inverse = np.unique(modes, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    n = uniq.shape[0]
    re = np.bincount(inverse, weights=coeffs.real, minlength=n)
    im = np.bincount(inverse, weights=coeffs.imag, minlength=n)
    values = re + 1j * im
    keep = values != 0
    return np.ascontiguousarray(uniq[keep]), values[keep]


class FourierSeries:
    """
    Finite sum ``sum_nu c_nu exp(i nu . psi)`` with ``nu`` in ``Z^dim``.

    Parameters
    ----------
    modes : array_like, shape (n, dim)
        Integer mode vectors; duplicates are summed.
    coeffs : array_like, shape (n,)
        Complex coefficients.
    dim : int, optional
        Torus dimension, required when ``modes`` is empty.
    declared_real : bool
        Whether the series represents a real function, i.e. whether
        ``c_{-nu} = conj(c_nu)`` is expected to hold.

    Only exact zeros are pruned; tiny coefficients are kept on purpose.
    """

    __slots__ = ("dim", "modes", "coeffs", "declared_real", "_index")

    def __init__(self, modes, coeffs, dim: int | None = None, declared_real: bool = False):
        modes = np.asarray(modes, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        if dim is None:
            if modes.ndim != 2 or modes.shape[0] == 0:
                raise ValueError("dim must be given for an empty series")
            dim = modes.shape[1]
        modes = modes.reshape(-1, dim)
        if modes.shape[0] != coeffs.shape[0]:
            raise ValueError("modes and coeffs have different lengths")
        self.dim = int(dim)
        self.modes, self.coeffs = _canonical(modes, coeffs, self.dim)
        self.modes.setflags(write=False)
        self.coeffs.setflags(write=False)
        self.declared_real = bool(declared_real)
        self._index = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dim: int, declared_real: bool = True) -> "FourierSeries":
        return cls(np.zeros((0, dim)), np.zeros(0), dim=dim, declared_real=declared_real)

    @classmethod
    def constant(cls, value: complex, dim: int) -> "FourierSeries":
        return cls(np.zeros((1, dim)), [value], dim=dim,
                   declared_real=np.imag(value) == 0)

    @classmethod
    def from_dict(cls, data: Mapping, dim: int | None = None,
                  declared_real: bool = False) -> "FourierSeries":
        keys = [tuple(np.atleast_1d(k).tolist()) for k in data]
        if dim is None and keys:
            dim = len(keys[0])
        if any(len(k) != dim for k in keys):
            raise DimensionMismatch("mode vectors of inconsistent length")
        return cls(np.array(keys, dtype=np.int64).reshape(-1, dim or 1),
                   np.array(list(data.values()), dtype=np.complex128),
                   dim=dim, declared_real=declared_real)

    @classmethod
    def from_records(cls, records: Iterable[Mapping], dim: int | None = None,
                     declared_real: bool = False) -> "FourierSeries":
        """Build from records ``{"nu": [...], "re": x, "im": y}``."""
        records = list(records)
        modes = [list(r["nu"]) for r in records]
        coeffs = [complex(r.get("re", 0.0), r.get("im", 0.0)) for r in records]
        if dim is None:
            if not modes:
                raise ValueError("dim must be given for an empty record list")
            dim = len(modes[0])
        if any(len(m) != dim for m in modes):
            raise DimensionMismatch("mode vectors of inconsistent length")
        return cls(np.array(modes, dtype=np.int64).reshape(-1, dim), coeffs,
                   dim=dim, declared_real=declared_real)

    # -- container protocol -------------------------------------------------
    def __len__(self) -> int:
        return self.modes.shape[0]

    def __bool__(self) -> bool:
        return len(self) > 0

    def __iter__(self):
        return iter(self.items())

    def items(self):
        return [(tuple(int(x) for x in m), complex(c)) for m, c in zip(self.modes, self.coeffs)]

    def to_dict(self) -> dict:
        return dict(self.items())

    def to_records(self) -> list[dict]:
        return [{"nu": list(m), "re": c.real, "im": c.imag} for m, c in self.items()]

    def __getitem__(self, nu) -> complex:
        if self._index is None:
            self._index = {tuple(int(x) for x in m): i for i, m in enumerate(self.modes)}
        key = tuple(int(x) for x in np.atleast_1d(nu))
        if len(key) != self.dim:
            raise DimensionMismatch(f"mode {key} has length != {self.dim}")
        i = self._index.get(key)
        return 0j if i is None else complex(self.coeffs[i])

    def __contains__(self, nu) -> bool:
        return self[nu] != 0

    def __repr__(self) -> str:
        return f"FourierSeries(dim={self.dim}, n_modes={len(self)}, real={self.declared_real})"

    # -- linear structure ----------------------------------------------------
    def _check(self, other: "FourierSeries"):
        if not isinstance(other, FourierSeries):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionMismatch(f"dims {self.dim} and {other.dim}")
        return None

    def __add__(self, other):
        if np.isscalar(other):
            other = FourierSeries.constant(other, self.dim)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FourierSeries(np.vstack([self.modes, other.modes]),
                             np.concatenate([self.coeffs, other.coeffs]), dim=self.dim,
                             declared_real=self.declared_real and other.declared_real)

    __radd__ = __add__

    def __neg__(self):
        return FourierSeries(self.modes, -self.coeffs, dim=self.dim,
                             declared_real=self.declared_real)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor: complex) -> "FourierSeries":
        real = self.declared_real and np.imag(factor) == 0
        return FourierSeries(self.modes, self.coeffs * factor, dim=self.dim, declared_real=real)

    def __mul__(self, other):
        if isinstance(other, FourierSeries):
            return convolve(self, other)
        if np.isscalar(other):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, p: int) -> "FourierSeries":
        return power(self, p)

    # -- queries --------------------------------------------------------------
    @property
    def degree(self) -> int:
        """Largest l1 norm of a stored mode (0 for the empty series)."""
        if len(self) == 0:
            return 0
        return int(np.abs(self.modes).sum(axis=1).max())

    def sup_coeff(self) -> float:
        return float(np.abs(self.coeffs).max()) if len(self) else 0.0

    def without_zero_mode(self) -> "FourierSeries":
        keep = np.any(self.modes != 0, axis=1)
        return FourierSeries(self.modes[keep], self.coeffs[keep], dim=self.dim,
                             declared_real=self.declared_real)

    def conjugate_defect(self) -> float:
        """max |c_{-nu} - conj(c_nu)| over the union of both supports."""
        if len(self) == 0:
            return 0.0
        mirrored = FourierSeries(-self.modes, np.conj(self.coeffs), dim=self.dim)
        diff = self - mirrored
        return diff.sup_coeff()

    def is_real(self, tol: float = REALITY_TOL) -> bool:
        return self.conjugate_defect() <= tol

    def __call__(self, psi) -> np.ndarray | complex:
        return evaluate(self, psi)


def _require_same_dim(a: FourierSeries, b: FourierSeries) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot combine series of dims {a.dim} and {b.dim}")


def convolve(a: FourierSeries, b: FourierSeries) -> FourierSeries:
    """Coefficients of the pointwise product of ``a`` and ``b``."""
    _require_same_dim(a, b)
    real = a.declared_real and b.declared_real
    if len(a) == 0 or len(b) == 0:
        return FourierSeries.zero(a.dim, declared_real=real)
    modes = (a.modes[:, None, :] + b.modes[None, :, :]).reshape(-1, a.dim)
    coeffs = np.multiply.outer(a.coeffs, b.coeffs).reshape(-1)
    return FourierSeries(modes, coeffs, dim=a.dim, declared_real=real)


def power(a: FourierSeries, p: int) -> FourierSeries:
    if p < 0:
        raise ValueError("negative power")
    out = FourierSeries.constant(1.0, a.dim)
    for _ in range(p):
        out = convolve(out, a)
    return out


def average(a: FourierSeries) -> complex:
    """Average over the torus, i.e. the zero-mode coefficient."""
    return a[(0,) * a.dim]


def evaluate(a: FourierSeries, psi) -> np.ndarray | complex:
    """
    Evaluate ``a`` at angle(s) ``psi``.

    ``psi`` may be a single point of length ``dim`` or an array of shape
    ``(m, dim)``; for ``dim == 1`` a flat array of angles is also accepted.
    """
    psi = np.asarray(psi, dtype=float)
    scalar = psi.ndim == 0 or (psi.ndim == 1 and a.dim > 1)
    if psi.ndim == 0:
        psi = psi.reshape(1, 1)
    elif psi.ndim == 1:
        psi = psi.reshape(-1, 1) if a.dim == 1 else psi.reshape(1, -1)
    if psi.shape[-1] != a.dim:
        raise DimensionMismatch(f"angle of length {psi.shape[-1]} for a dim-{a.dim} series")
    if len(a) == 0:
        out = np.zeros(psi.shape[0], dtype=np.complex128)
    else:
        phase = psi @ a.modes.T.astype(float)
        out = np.exp(1j * phase) @ a.coeffs
    return complex(out[0]) if scalar else out


def directional_derivative(a: FourierSeries, omega, order: int = 1) -> FourierSeries:
    """Time derivative along ``psi = omega t``: multiply mode nu by ``(i omega.nu)**order``."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    omega = np.asarray(omega, dtype=float).reshape(-1)
    if omega.shape[0] != a.dim:
        raise DimensionMismatch("omega length differs from series dimension")
    factor = (1j * (a.modes @ omega)) ** order
    return FourierSeries(a.modes, a.coeffs * factor, dim=a.dim, declared_real=a.declared_real)


def compose_polynomial(coeffs: Sequence[float], u: FourierSeries) -> FourierSeries:
    """``sum_p coeffs[p] * u**p`` evaluated by Horner's rule over convolution."""
    coeffs = list(coeffs)
    out = FourierSeries.zero(u.dim, declared_real=u.declared_real)
    for c in reversed(coeffs):
        out = convolve(out, u)
        if c != 0:
            out = out + FourierSeries.constant(c, u.dim)
    out.declared_real = u.declared_real and all(np.imag(c) == 0 for c in coeffs)
    return out
