"""Sine-basis diagonalization of the Dirichlet discrete Laplacian.

The 1D operator ``A = tridiag(1, -2, 1) / h^2`` of size ``J - 1`` has the
eigenvectors ``v_k[j] = sin(k pi j / J)`` and eigenvalues
``-(4 / h^2) sin^2(k pi / (2 J))`` for ``k, j = 1..J-1``.

Transform normalization::

    dst_forward:  c_k = sum_j x_j sin(k pi j / J)
    dst_inverse:  x_j = (2 / J) sum_k c_k sin(k pi j / J)

so ``dst_inverse(dst_forward(x)) == x`` and ``||dst_forward(x)||_2^2 =
(J / 2) ||x||_2^2``.

Set the environment variable ``LOGSE_THREADS`` to cap the number of FFT
worker threads; by default all cores are used. Each line is transformed
independently, so results do not depend on the thread count.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sp_fft

from .grid import GridFunction, GridSpec, _laplacian

#: Below this length the direct O(J^2) summation is used.
FFT_THRESHOLD = 64


class SolverError(RuntimeError):
    """Raised when a shifted Laplacian system is (numerically) singular."""


def fft_workers() -> int:
    env = os.environ.get("LOGSE_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"LOGSE_THREADS must be >= 1, got {env!r}")
        return n
    return -1


def eigenvalues(J: int, h: float) -> np.ndarray:
    """Eigenvalues of the ``(J-1) x (J-1)`` Dirichlet second-difference matrix."""
    if J < 2:
        raise ValueError(f"need J >= 2, got {J}")
    if not h > 0:
        raise ValueError(f"need h > 0, got {h}")
    k = np.arange(1, J)
    return -(4.0 / h**2) * np.sin(k * np.pi / (2 * J)) ** 2


def sine_matrix(J: int) -> np.ndarray:
    """``S[k-1, j-1] = sin(k pi j / J)``; symmetric, ``S @ S = (J/2) I``."""
    idx = np.arange(1, J)
    return np.sin(np.pi * np.outer(idx, idx) / J)


@dataclass(frozen=True)
class SineBasis:
    J: int
    h: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return eigenvalues(self.J, self.h)

    def vector(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.J - 1:
            raise ValueError(f"mode index must be in [1, {self.J - 1}], got {k}")
        return np.sin(k * np.pi * np.arange(1, self.J) / self.J)


def _dst_direct(x: np.ndarray, axis: int) -> np.ndarray:
    J = x.shape[axis] + 1
    return np.moveaxis(np.tensordot(sine_matrix(J), np.moveaxis(x, axis, 0), axes=1), 0, axis)


def _dst_fft(x: np.ndarray, axis: int) -> np.ndarray:
    # odd extension [0, x, 0, -reversed(x)] of length 2J; its DFT is -2i * DST(x)
    xl = np.moveaxis(x, axis, -1)
    J = xl.shape[-1] + 1
    ext = np.zeros(xl.shape[:-1] + (2 * J,), dtype=np.complex128)
    ext[..., 1:J] = xl
    ext[..., J + 1 :] = -xl[..., ::-1]
    spec = sp_fft.fft(ext, axis=-1, overwrite_x=True, workers=fft_workers())
    return np.moveaxis(0.5j * spec[..., 1:J], -1, axis)


def _check_line(x: np.ndarray, axis: int, J: int | None) -> None:
    if x.ndim == 0:
        raise ValueError("cannot transform a scalar")
    n = x.shape[axis]
    if n < 1:
        raise ValueError("transform length must be at least 1")
    if J is not None and n != J - 1:
        raise ValueError(f"expected length J - 1 = {J - 1}, got {n}")


def dst_forward(x, axis: int = -1, *, J: int | None = None, method: str = "auto") -> np.ndarray:
    """Unnormalized type-I sine transform along ``axis``.

    ``method`` is ``"fft"`` (odd extension, O(J log J)), ``"direct"``
    (O(J^2) summation) or ``"auto"`` (FFT once ``J >= FFT_THRESHOLD``).
    """
    x = np.asarray(x)
    _check_line(x, axis, J)
    n = x.shape[axis]
    if method == "auto":
        method = "fft" if n + 1 >= FFT_THRESHOLD else "direct"
    if method == "fft":
        out = _dst_fft(x, axis)
    elif method == "direct":
        out = _dst_direct(x.astype(np.complex128), axis)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out if np.iscomplexobj(x) else out.real


def dst_inverse(c, axis: int = -1, *, J: int | None = None, method: str = "auto") -> np.ndarray:
    """Inverse of :func:`dst_forward`."""
    c = np.asarray(c)
    _check_line(c, axis, J)
    n = c.shape[axis]
    return dst_forward(c, axis, method=method) * (2.0 / (n + 1))


@functools.lru_cache(maxsize=32)
def _laplacian_symbol(spec: GridSpec) -> np.ndarray:
    """Sum of 1D eigenvalues over all interior multi-indices (read-only)."""
    total = np.zeros(spec.interior_shape)
    for axis, (J, h) in enumerate(zip(spec.counts, spec.spacings)):
        shape = [1] * spec.dim
        shape[axis] = J - 1
        total = total + eigenvalues(J, h).reshape(shape)
    total.flags.writeable = False
    return total


def solve_interior(sigma: complex, rhs: np.ndarray, spec: GridSpec, method: str = "auto") -> np.ndarray:
    """Solve ``(sigma I + delta^2) w = rhs`` for interior arrays."""
    symbol = sigma + _laplacian_symbol(spec)
    mags = np.abs(symbol)
    worst = int(np.argmin(mags))
    if not mags.flat[worst] >= 1e-300:
        mode = tuple(int(i) + 1 for i in np.unravel_index(worst, symbol.shape))
        raise SolverError(f"singular shifted Laplacian: sigma={sigma!r} annihilates mode {mode}")
    c = np.asarray(rhs, dtype=np.complex128)
    for axis in range(spec.dim):
        c = dst_forward(c, axis, method=method)
    scale = float(np.prod([2.0 / J for J in spec.counts]))
    c = c * (scale / symbol)
    for axis in range(spec.dim):
        c = dst_forward(c, axis, method=method)
    return c


def solve_shifted_laplacian(sigma: complex, b: GridFunction, *, method: str = "auto") -> GridFunction:
    """Return ``w`` in ``X_h^0`` with ``sigma w + delta^2_nabla w = b`` on the interior."""
    w = solve_interior(sigma, b.interior, b.spec, method=method)
    return GridFunction.from_interior(b.spec, w)


def shifted_residual(sigma: complex, w: GridFunction, b: GridFunction) -> float:
    """Relative residual ``||sigma w + delta^2 w - b|| / max(1, ||b||)`` (discrete L2)."""
    r = sigma * w.values + _laplacian(w.values, w.spec.spacings) - b.values
    vol = w.spec.cell_volume
    sl = w.spec.interior
    rn = np.sqrt(vol * np.sum(np.abs(r[sl]) ** 2))
    bn = np.sqrt(vol * np.sum(np.abs(b.values[sl]) ** 2))
    return float(rn / max(1.0, bn))


def dense_laplacian(spec: GridSpec) -> np.ndarray:
    """Dense matrix of ``delta^2_nabla`` on the interior, C (row-major) ordering.

    Built as a Kronecker sum of the tridiagonal 1D matrices; meant as an
    independent oracle for small grids.
    """
    mats = []
    for J, h in zip(spec.counts, spec.spacings):
        n = J - 1
        A = (np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / h**2
        mats.append(A)
    sizes = [m.shape[0] for m in mats]
    total = np.zeros((int(np.prod(sizes)),) * 2)
    for axis, A in enumerate(mats):
        term = np.ones((1, 1))
        for other, n in enumerate(sizes):
            term = np.kron(term, A if other == axis else np.eye(n))
        total += term
    return total
