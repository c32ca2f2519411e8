"""Rectangular tensor grids and grid functions with homogeneous Dirichlet data.

Storage convention: a grid function holds the full node lattice, boundary
included, as a C-ordered complex array of shape ``(J_0 + 1, ..., J_{d-1} + 1)``.
Axis 0 is ``x``, axis 1 is ``y``, axis 2 is ``z``; the last axis varies fastest.

The array kernels prefixed with an underscore accept extra leading (batch)
axes: the lattice always occupies the trailing ``dim`` axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

NORM_KINDS = ("l2", "lr", "seminorm_h1", "seminorm_h2", "linf")


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid on a box ``prod_i [a_i, b_i]`` with ``J_i`` cells per axis."""

    bounds: tuple[tuple[float, float], ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        counts = tuple(int(J) for J in self.counts)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "counts", counts)
        if len(counts) not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(counts)}")
        if len(bounds) != len(counts):
            raise ValueError("bounds and counts must have the same length")
        for i, ((a, b), J) in enumerate(zip(bounds, counts)):
            if not a < b:
                raise ValueError(f"axis {i}: need a < b, got ({a}, {b})")
            if J < 2:
                raise ValueError(f"axis {i}: need at least 2 cells, got {J}")

    @classmethod
    def uniform(cls, dim: int, lower: float, upper: float, cells: int) -> "GridSpec":
        """Same interval and cell count on every axis."""
        return cls(((lower, upper),) * dim, (cells,) * dim)

    @classmethod
    def from_spacing(cls, dim: int, lower: float, upper: float, h: float) -> "GridSpec":
        """Cube grid with spacing ``h``; ``(upper - lower) / h`` must be an integer."""
        cells = (upper - lower) / h
        J = int(round(cells))
        if abs(cells - J) > 1e-9 * max(1.0, cells):
            raise ValueError(f"spacing {h} does not divide [{lower}, {upper}]")
        return cls.uniform(dim, lower, upper, J)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple((b - a) / J for (a, b), J in zip(self.bounds, self.counts))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(J + 1 for J in self.counts)

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return tuple(J - 1 for J in self.counts)

    @property
    def n_interior(self) -> int:
        return int(np.prod(self.interior_shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    @property
    def volume(self) -> float:
        """Measure of the domain, ``|Omega|``."""
        return float(np.prod([b - a for a, b in self.bounds]))

    @property
    def interior(self) -> tuple[slice, ...]:
        return (slice(1, -1),) * self.dim

    def coords(self, axis: int) -> np.ndarray:
        """Node coordinates ``a + j h`` for ``j = 0..J`` along ``axis``."""
        _check_axis(axis, self.dim)
        (a, _), J, h = self.bounds[axis], self.counts[axis], self.spacings[axis]
        return a + h * np.arange(J + 1)

    def mesh(self) -> list[np.ndarray]:
        """Coordinate arrays over the full lattice (``ij`` indexing)."""
        return np.meshgrid(*(self.coords(i) for i in range(self.dim)), indexing="ij")

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.bounds, tuple(factor * J for J in self.counts))


class GridFunction:
    """Complex grid function in ``X_h^0``: boundary values are exactly zero.

    Instances are immutable; the underlying array is marked read-only.
    """

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values: np.ndarray, *, copy: bool = True):
        arr = np.array(values, dtype=np.complex128, copy=True if copy else None, order="C")
        if arr.shape != spec.shape:
            raise ValueError(f"values shape {arr.shape} does not match grid {spec.shape}")
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError("grid function contains NaN or Inf")
        if np.any(_boundary_values(arr, spec.dim) != 0):
            raise ValueError("grid function must vanish on the boundary")
        arr.flags.writeable = False
        self.spec = spec
        self.values = arr

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridFunction":
        return cls(spec, np.zeros(spec.shape, dtype=np.complex128), copy=False)

    @classmethod
    def from_interior(cls, spec: GridSpec, interior: np.ndarray) -> "GridFunction":
        arr = np.zeros(spec.shape, dtype=np.complex128)
        arr[spec.interior] = interior
        return cls(spec, arr, copy=False)

    @classmethod
    def sample(cls, spec: GridSpec, func: Callable[..., np.ndarray]) -> "GridFunction":
        """Evaluate ``func(x, y, ...)`` on the nodes and zero the boundary."""
        arr = np.zeros(spec.shape, dtype=np.complex128)
        arr[...] = func(*spec.mesh())
        _zero_boundary(arr, spec.dim)
        return cls(spec, arr, copy=False)

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.spec.interior]

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, GridFunction):
            _check_same_spec(self, other)
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.spec, self.values + self._coerce(other), copy=False)

    def __sub__(self, other):
        return GridFunction(self.spec, self.values - self._coerce(other), copy=False)

    def __mul__(self, scalar):
        if isinstance(scalar, GridFunction):
            return NotImplemented
        return GridFunction(self.spec, self.values * scalar, copy=False)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.spec, -self.values, copy=False)

    def __repr__(self):
        return f"GridFunction(counts={self.spec.counts}, bounds={self.spec.bounds})"


def _check_axis(axis: int, dim: int) -> None:
    if not isinstance(axis, (int, np.integer)) or not 0 <= axis < dim:
        raise ValueError(f"axis must be in [0, {dim}), got {axis!r}")


def _check_same_spec(u: GridFunction, v: GridFunction) -> None:
    if u.spec != v.spec:
        raise ValueError("grid functions live on different grids")


def _boundary_values(arr: np.ndarray, dim: int) -> np.ndarray:
    lead = arr.ndim - dim
    parts = []
    for ax in range(dim):
        for idx in (0, -1):
            sl = [slice(None)] * arr.ndim
            sl[lead + ax] = idx
            parts.append(arr[tuple(sl)].ravel())
    return np.concatenate(parts)


def _zero_boundary(arr: np.ndarray, dim: int) -> None:
    lead = arr.ndim - dim
    for ax in range(dim):
        for idx in (0, -1):
            sl = [slice(None)] * arr.ndim
            sl[lead + ax] = idx
            arr[tuple(sl)] = 0


# --- array kernels (trailing ``dim`` axes are the lattice) -------------------


def _interior_slices(ndim: int, dim: int) -> tuple[slice, ...]:
    return (slice(None),) * (ndim - dim) + (slice(1, -1),) * dim


def _second_difference(values: np.ndarray, axis: int, h: float, dim: int) -> np.ndarray:
    ax = values.ndim - dim + axis
    out = np.zeros_like(values)
    inner = list(_interior_slices(values.ndim, dim))

    def shifted(offset):
        sl = list(inner)
        sl[ax] = slice(1 + offset, values.shape[ax] - 1 + offset)
        return values[tuple(sl)]

    out[tuple(inner)] = (shifted(1) - 2.0 * shifted(0) + shifted(-1)) / (h * h)
    return out


def _laplacian(values: np.ndarray, spacings: Sequence[float]) -> np.ndarray:
    dim = len(spacings)
    out = _second_difference(values, 0, spacings[0], dim)
    for axis in range(1, dim):
        out += _second_difference(values, axis, spacings[axis], dim)
    return out


def _forward_difference(values: np.ndarray, axis: int, h: float, dim: int) -> np.ndarray:
    return np.diff(values, axis=values.ndim - dim + axis) / h


def _lattice_axes(ndim: int, dim: int) -> tuple[int, ...]:
    return tuple(range(ndim - dim, ndim))


def _inner(u: np.ndarray, v: np.ndarray, spacings: Sequence[float]) -> np.ndarray:
    dim = len(spacings)
    sl = _interior_slices(u.ndim, dim)
    return np.prod(spacings) * np.sum(u[sl] * np.conj(v[sl]), axis=_lattice_axes(u.ndim, dim))


def _norm(values: np.ndarray, spacings: Sequence[float], kind: str, r: float | None = None):
    dim = len(spacings)
    axes = _lattice_axes(values.ndim, dim)
    vol = float(np.prod(spacings))
    sl = _interior_slices(values.ndim, dim)
    if kind == "l2":
        return np.sqrt(vol * np.sum(np.abs(values[sl]) ** 2, axis=axes))
    if kind == "lr":
        if r is None or not r >= 1:
            raise ValueError(f"lr norm needs r >= 1, got {r!r}")
        return (vol * np.sum(np.abs(values[sl]) ** r, axis=axes)) ** (1.0 / r)
    if kind == "seminorm_h1":
        total = 0.0
        for axis in range(dim):
            d = _forward_difference(values, axis, spacings[axis], dim)
            total = total + np.sum(np.abs(d) ** 2, axis=axes)
        return np.sqrt(vol * total)
    if kind == "seminorm_h2":
        return _norm(_laplacian(values, spacings), spacings, "l2")
    if kind == "linf":
        return np.max(np.abs(values[sl]), axis=axes)
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


# --- public operations ---------------------------------------------------------


def second_difference(u: GridFunction, axis: int) -> GridFunction:
    """Centered second difference along ``axis``; zero on the boundary."""
    _check_axis(axis, u.spec.dim)
    out = _second_difference(u.values, axis, u.spec.spacings[axis], u.spec.dim)
    return GridFunction(u.spec, out, copy=False)


def discrete_laplacian(u: GridFunction) -> GridFunction:
    """Five-point (in 2D) discrete Laplacian, the sum of second differences."""
    return GridFunction(u.spec, _laplacian(u.values, u.spec.spacings), copy=False)


def forward_difference(u: GridFunction, axis: int) -> np.ndarray:
    """Forward difference ``(u_{j+1} - u_j) / h`` on the cell offsets ``j = 0..J-1``.

    The result is a staggered array with ``J`` entries along ``axis`` and the
    full ``J + 1`` nodes along the other axes.
    """
    _check_axis(axis, u.spec.dim)
    return _forward_difference(u.values, axis, u.spec.spacings[axis], u.spec.dim)


def inner_product(u: GridFunction, v: GridFunction) -> complex:
    """Discrete inner product ``h^d sum_interior u conj(v)``."""
    _check_same_spec(u, v)
    return complex(_inner(u.values, v.values, u.spec.spacings))


def norm(u: GridFunction, kind: str = "l2", r: float | None = None) -> float:
    """Discrete norms over ``X_h^0``.

    Parameters
    ----------
    kind : {"l2", "lr", "seminorm_h1", "seminorm_h2", "linf"}
        ``lr`` requires ``r >= 1``. ``seminorm_h1`` sums forward differences
        over all cell offsets ``0..J-1``, including the boundary-adjacent ones.
    """
    return float(_norm(u.values, u.spec.spacings, kind, r))
