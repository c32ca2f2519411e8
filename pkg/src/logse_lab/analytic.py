"""Closed-form Gausson solutions, dynamics initial data and a PDE-residual oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import GridFunction, GridSpec

PI_QUARTER = np.pi ** -0.25


@dataclass(frozen=True)
class GaussonParams:
    """Gausson ``exp(-2i lam omega t + omega + d/2 + (lam/2)|x|^2)``; needs ``lam < 0``."""

    omega: float
    lam: float
    dim: int = 2

    def __post_init__(self):
        if not self.lam < 0:
            raise ValueError(f"Gausson needs lambda < 0, got {self.lam}")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")

    @property
    def mass(self) -> float:
        """``int |u|^2 = e^{2 omega + d} (pi/|lam|)^{d/2}``."""
        return float(np.exp(2 * self.omega + self.dim) * (np.pi / abs(self.lam)) ** (self.dim / 2))

    @property
    def gradient_energy(self) -> float:
        """``int |grad u|^2 = mass * |lam| d / 2``."""
        return self.mass * abs(self.lam) * self.dim / 2

    @property
    def energy(self) -> float:
        """``int |grad u|^2 + int F(|u|^2) = lam (2 omega - 1) mass``."""
        return self.lam * (2 * self.omega - 1) * self.mass


def _r2(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        return x**2
    if x.shape[-1] != dim:
        raise ValueError(f"points must have trailing dimension {dim}, got shape {x.shape}")
    return np.sum(x**2, axis=-1)


def gausson(x, t: float, p: GaussonParams):
    """Exact Gausson at points ``x`` (trailing axis of length ``d``) and time ``t``."""
    r2 = _r2(x, p.dim)
    return np.exp(-2j * p.lam * p.omega * t + p.omega + p.dim / 2 + 0.5 * p.lam * r2)


def gausson_flipped_phase(x, t: float, p: GaussonParams):
    """Variant with the phase sign ``+2i lam omega t``; solves the equation only for ``omega = 0``."""
    r2 = _r2(x, p.dim)
    return np.exp(2j * p.lam * p.omega * t + p.omega + p.dim / 2 + 0.5 * p.lam * r2)


def exact_on_grid(p: GaussonParams, spec: GridSpec, t: float) -> GridFunction:
    """Sample :func:`gausson` at the nodes; boundary values are set to zero."""
    if spec.dim != p.dim:
        raise ValueError(f"grid dimension {spec.dim} != Gausson dimension {p.dim}")
    r2 = sum(c**2 for c in spec.mesh())
    phase = np.exp(-2j * p.lam * p.omega * t)
    return GridFunction.sample(spec, lambda *_: phase * np.exp(p.omega + p.dim / 2 + 0.5 * p.lam * r2))


def exact_sampler(p: GaussonParams, spec: GridSpec) -> Callable[[float], GridFunction]:
    """``t -> exact_on_grid(p, spec, t)`` reusing the time-independent profile."""
    r2 = sum(c**2 for c in spec.mesh())
    profile = GridFunction.sample(spec, lambda *_: np.exp(p.omega + p.dim / 2 + 0.5 * p.lam * r2))

    def sample(t: float) -> GridFunction:
        return profile * np.exp(-2j * p.lam * p.omega * t)

    return sample


# --- PDE residual oracle --------------------------------------------------------

# fourth-order central stencils
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFSETS = np.arange(-2, 3)


def pde_residual(
    func: Callable[[np.ndarray, float], np.ndarray],
    points: np.ndarray,
    t: float,
    lam: float,
    step: float,
) -> np.ndarray:
    """``i u_t + Lap u - lam u ln|u|^2`` at ``points`` via fourth-order differences.

    ``func(x, t)`` takes points with a trailing coordinate axis. For a true
    solution the residual decays like ``step**4``.
    """
    points = np.asarray(points, dtype=float)
    dim = points.shape[-1]
    u = func(points, t)
    u_t = sum(c * func(points, t + k * step) for c, k in zip(_D1, _OFFSETS) if c) / step
    lap = np.zeros_like(u)
    for axis in range(dim):
        shift = np.zeros(dim)
        shift[axis] = 1.0
        lap = lap + sum(c * func(points + k * step * shift, t) for c, k in zip(_D2, _OFFSETS)) / step**2
    return 1j * u_t + lap - lam * u * np.log(np.abs(u) ** 2)


# --- dynamics initial data ---------------------------------------------------------


@dataclass(frozen=True)
class TwoGaussonParams:
    """Superposition ``sum_j b_j exp(i x.v_j + (lam/2)|x - x_j|^2)``."""

    b1: float
    b2: float
    v1: tuple[float, ...]
    v2: tuple[float, ...]
    x1_0: tuple[float, ...]
    x2_0: tuple[float, ...]
    lam: float = -1.0

    def __post_init__(self):
        dims = {len(self.v1), len(self.v2), len(self.x1_0), len(self.x2_0)}
        if len(dims) != 1:
            raise ValueError("velocity and center vectors must share one dimension")
        if not self.lam < 0:
            raise ValueError("lambda must be negative")

    def __call__(self, *coords: np.ndarray) -> np.ndarray:
        out = 0
        for b, v, c in ((self.b1, self.v1, self.x1_0), (self.b2, self.v2, self.x2_0)):
            phase = sum(vi * xi for vi, xi in zip(v, coords))
            r2 = sum((xi - ci) ** 2 for xi, ci in zip(coords, c))
            out = out + b * np.exp(1j * phase + 0.5 * self.lam * r2)
        return out


TWO_GAUSSON_CASES = {
    "IV": TwoGaussonParams(PI_QUARTER, PI_QUARTER, (0.0, 0.0), (0.0, 0.0), (-2.0, 0.0), (2.0, 0.0)),
    "V": TwoGaussonParams(PI_QUARTER, PI_QUARTER / 1.5, (-0.15, 0.0), (0.0, 0.0), (0.0, 0.0), (5.0, 0.0)),
    "VI": TwoGaussonParams(PI_QUARTER, PI_QUARTER, (0.0, 0.0), (0.0, 0.85), (-2.0, 0.0), (2.0, 0.0)),
}


def _case_I(x, y):
    return np.exp(-(x**2 + y**2))


def _case_II(x, y):
    return (x - 0.5 + 1j * y) * (x + 0.5 + 1j * y) * np.exp(-(x**2 + y**2))


def _case_III(x, y):
    return (x - 0.5 + 1j * y) * (x + 0.5 - 1j * y) * np.exp(-(x**2 + y**2))


INITIAL_DATA: dict[str, Callable[..., np.ndarray]] = {
    "I": _case_I,
    "II": _case_II,
    "III": _case_III,
    **TWO_GAUSSON_CASES,
}


@dataclass(frozen=True)
class CasePreset:
    """Reference run settings for a dynamics case."""

    lam: float
    tau: float
    h: float
    half_width: float
    scheme: str


CASE_PRESETS = {
    "I": CasePreset(-10.0, 0.01, 1 / 32, 8.0, "BDF1"),
    "II": CasePreset(1.0, 0.01, 1 / 32, 8.0, "BDF1"),
    "III": CasePreset(1.0, 0.01, 1 / 32, 8.0, "BDF1"),
    "IV": CasePreset(-1.0, 0.001, 1 / 16, 16.0, "BDF2"),
    "V": CasePreset(-1.0, 0.001, 1 / 16, 16.0, "BDF2"),
    "VI": CasePreset(-1.0, 0.001, 1 / 16, 48.0, "BDF2"),
}


def normalize_case(case: str) -> str:
    key = str(case).upper()
    if key.startswith("CASE-") or key.startswith("CASE_"):
        key = key[5:]
    if key not in INITIAL_DATA:
        raise ValueError(f"unknown case {case!r}; expected one of {sorted(INITIAL_DATA)}")
    return key


def initial_condition(case: str, spec: GridSpec) -> GridFunction:
    """Sample the initial datum of dynamics case ``I``..``VI`` on a 2D grid."""
    key = normalize_case(case)
    if spec.dim != 2:
        raise ValueError("dynamics cases are two-dimensional")
    return GridFunction.sample(spec, INITIAL_DATA[key])
