"""The logarithmic nonlinearity ``f(z) = z ln|z|`` and its companions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .grid import GridFunction

#: Moduli below the smallest positive normal double are treated as zero.
TINY = np.finfo(np.float64).tiny


def _as_output(out: np.ndarray, scalar: bool):
    return out[()] if scalar else out


def f_log(z):
    """``z ln|z|`` with ``f(0) = 0``; also 0 whenever ``|z| < TINY``."""
    arr = np.asarray(z, dtype=np.complex128)
    a = np.abs(arr)
    out = np.where(a < TINY, 0.0, arr * np.log(np.maximum(a, TINY)))
    return _as_output(out, arr.ndim == 0)


def f_log_eps(z, eps: float):
    """Regularized nonlinearity ``z ln(eps + |z|)``, ``eps > 0``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    arr = np.asarray(z, dtype=np.complex128)
    out = arr * np.log(eps + np.abs(arr))
    return _as_output(out, arr.ndim == 0)


def F_primitive(rho, lam: float):
    """Energy density ``lam (rho ln rho - rho)``, continuous at ``rho = 0``."""
    arr = np.asarray(rho, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("density must be non-negative")
    out = lam * (xlogy(arr, arr) - arr)
    return _as_output(np.asarray(out), arr.ndim == 0)


def apply_f(u: GridFunction) -> GridFunction:
    """Elementwise ``f_log``; the boundary stays zero since ``f(0) = 0``."""
    return GridFunction(u.spec, f_log(u.values), copy=False)


@dataclass(frozen=True)
class LogNonlinearity:
    """``lam`` is the interaction strength, ``eps`` an optional regularization.

    ``eps = 0`` gives the unregularized ``f``; the time steppers never
    regularize, so ``eps > 0`` exists for diagnostics only.
    """

    lam: float
    eps: float = 0.0

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("lambda must be nonzero")
        if not self.eps >= 0:
            raise ValueError(f"eps must be >= 0, got {self.eps!r}")

    def __call__(self, z):
        return f_log(z) if self.eps == 0 else f_log_eps(z, self.eps)

    def density(self, rho):
        return F_primitive(rho, self.lam)
