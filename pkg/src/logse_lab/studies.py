"""Refinement studies on the exact Gausson and dynamics trend metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .analytic import GaussonParams, exact_sampler
from .diagnostics import ConvergenceReport, error_norms, estimate_order, mass, truncation_error
from .grid import GridFunction, GridSpec
from .stepping import Every, Scheme, SchemeParams, run_simulation


@dataclass
class GaussonRun:
    l2_final: float
    h1_final: float
    l2_max: float
    h1_max: float
    mass_drift: float


def run_gausson(
    scheme: Scheme | str,
    p: GaussonParams,
    spec: GridSpec,
    tau: float,
    t_final: float,
    *,
    check_residual: bool = False,
    track_max: bool = True,
) -> GaussonRun:
    """Run a scheme from the sampled Gausson and measure errors against it.

    ``*_max`` are maxima over all steps ``1..N`` (NaN unless ``track_max``);
    ``mass_drift`` is the relative mass change at ``t_final``.
    """
    exact = exact_sampler(p, spec)
    params = SchemeParams.from_final_time(p.lam, tau, t_final, scheme=scheme, check_residual=check_residual)
    u0 = exact(0.0)
    worst = [0.0, 0.0] if track_max else [math.nan, math.nan]

    def track(step: int, t: float, u: GridFunction) -> None:
        if step == 0:
            return
        l2, h1 = error_norms(u, exact(t))
        worst[0] = max(worst[0], l2)
        worst[1] = max(worst[1], h1)

    res = run_simulation(u0, params, [Every(1, track)] if track_max else [], series_stride=None)
    l2, h1 = error_norms(res.final, exact(params.t_final))
    m0 = mass(u0)
    drift = abs(mass(res.final) - m0) / m0
    return GaussonRun(l2, h1, worst[0], worst[1], drift)


def _check_mode(mode: str) -> bool:
    """Validate ``mode`` and return whether per-step maxima are needed."""
    if mode not in ("final", "max"):
        raise ValueError(f"error mode must be 'final' or 'max', got {mode!r}")
    return mode == "max"


def _errors(runs: Sequence[GaussonRun], mode: str) -> dict[str, list[float]]:
    if mode == "final":
        return {"l2": [r.l2_final for r in runs], "h1": [r.h1_final for r in runs]}
    return {"l2": [r.l2_max for r in runs], "h1": [r.h1_max for r in runs]}


def temporal_study(
    scheme: Scheme | str,
    p: GaussonParams,
    spec: GridSpec,
    taus: Sequence[float],
    t_final: float,
    *,
    error_mode: str = "final",
    check_residual: bool = False,
) -> ConvergenceReport:
    """Errors at fixed grid ``spec`` across halving time steps ``taus``."""
    track = _check_mode(error_mode)
    runs = [run_gausson(scheme, p, spec, tau, t_final, check_residual=check_residual, track_max=track) for tau in taus]
    report = estimate_order(taus, _errors(runs, error_mode), "tau")
    report.extra["mass_drift"] = np.array([r.mass_drift for r in runs])
    return report


def spatial_study(
    scheme: Scheme | str,
    p: GaussonParams,
    lower: float,
    upper: float,
    hs: Sequence[float],
    tau: float,
    t_final: float,
    *,
    error_mode: str = "final",
    check_residual: bool = False,
) -> ConvergenceReport:
    """Errors at fixed ``tau`` across halving mesh sizes ``hs`` on ``[lower, upper]^d``."""
    track = _check_mode(error_mode)
    runs = [
        run_gausson(
            scheme, p, GridSpec.from_spacing(p.dim, lower, upper, h), tau, t_final,
            check_residual=check_residual, track_max=track,
        )
        for h in hs
    ]
    report = estimate_order(hs, _errors(runs, error_mode), "h")
    report.extra["mass_drift"] = np.array([r.mass_drift for r in runs])
    return report


def truncation_study(
    scheme: Scheme | str,
    p: GaussonParams,
    lower: float,
    upper: float,
    axis: str,
    values: Sequence[float],
    *,
    fixed: float,
    n: int = 1,
) -> ConvergenceReport:
    """Truncation-error norms under refinement of ``tau`` (``axis="time"``, fixed ``h``)
    or of ``h`` (``axis="space"``, fixed ``tau``)."""
    errs = []
    if axis == "time":
        sampler = exact_sampler(p, GridSpec.from_spacing(p.dim, lower, upper, fixed))
        errs = [truncation_error(scheme, sampler, tau, n, p.lam) for tau in values]
        name = "tau"
    elif axis == "space":
        for h in values:
            sampler = exact_sampler(p, GridSpec.from_spacing(p.dim, lower, upper, h))
            errs.append(truncation_error(scheme, sampler, fixed, n, p.lam))
        name = "h"
    else:
        raise ValueError(f"axis must be 'time' or 'space', got {axis!r}")
    return estimate_order(values, {"xi": errs}, name)


# --- dynamics trend metrics --------------------------------------------------------


def peak_modulus(u: GridFunction) -> float:
    return float(np.max(np.abs(u.interior)))


def vortex_core_density(u: GridFunction, guess: tuple[float, float], radius: float) -> tuple[float, float, float]:
    """Minimum of ``rho / max(rho)`` within ``radius`` of ``guess``.

    Returns ``(value, x, y)`` where ``(x, y)`` is the minimizing node, used as
    the next guess when tracking a vortex core in time.
    """
    spec = u.spec
    X, Y = spec.mesh()
    rho = np.abs(u.values) ** 2
    top = rho.max()
    if top == 0:
        return 0.0, guess[0], guess[1]
    window = (X - guess[0]) ** 2 + (Y - guess[1]) ** 2 <= radius**2
    inner = np.zeros_like(window)
    inner[spec.interior] = True
    window &= inner
    masked = np.where(window, rho, np.inf)
    i = np.unravel_index(np.argmin(masked), masked.shape)
    return float(rho[i] / top), float(X[i]), float(Y[i])


class CoreTracker:
    """Observer following the ``x < 0`` vortex core of a symmetric dipole."""

    def __init__(self, start: tuple[float, float] = (-0.5, 0.0), radius: float = 0.25):
        self.pos = start
        self.radius = radius
        self.times: list[float] = []
        self.values: list[float] = []
        self.positions: list[tuple[float, float]] = []

    def __call__(self, step: int, t: float, u: GridFunction) -> None:
        val, x, y = vortex_core_density(u, self.pos, self.radius)
        self.pos = (x, y)
        self.times.append(t)
        self.values.append(val)
        self.positions.append((x, y))


def strictly_increasing(values: Sequence[float]) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) > 0))


def trend_slope(times: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``values`` against ``times``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    return float(np.polyfit(t, v, 1)[0])


def first_drop(values: Sequence[float]) -> Optional[int]:
    """Index of the first non-increase in ``values``, or ``None``."""
    v = np.asarray(values, dtype=float)
    bad = np.nonzero(np.diff(v) <= 0)[0]
    return int(bad[0]) + 1 if len(bad) else None


def phase_vortices(u: GridFunction, floor: float = 1e-12) -> list[tuple[float, float, int]]:
    """Phase singularities of a 2D field as ``(x, y, winding)``.

    The winding of a grid cell is the sum of wrapped phase increments around
    its four corners divided by ``2 pi``. Cells touching a node with
    ``|u| <= floor`` are skipped; an interior node where the field vanishes
    is reported itself when the ring of its eight neighbors winds.
    """
    if u.spec.dim != 2:
        raise ValueError("vortex detection needs a 2D grid")
    v = u.values
    ph = np.angle(v)
    a = np.abs(v)
    X, Y = u.spec.mesh()

    def inc(p, q):
        return np.angle(np.exp(1j * (q - p)))

    c00, c10, c11, c01 = ph[:-1, :-1], ph[1:, :-1], ph[1:, 1:], ph[:-1, 1:]
    w = np.rint((inc(c00, c10) + inc(c10, c11) + inc(c11, c01) + inc(c01, c00)) / (2 * np.pi)).astype(int)
    live = np.minimum.reduce([a[:-1, :-1], a[1:, :-1], a[1:, 1:], a[:-1, 1:]]) > floor
    xc = 0.5 * (X[:-1, :-1] + X[1:, 1:])
    yc = 0.5 * (Y[:-1, :-1] + Y[1:, 1:])
    out = [(float(xc[i]), float(yc[i]), int(w[i])) for i in zip(*np.nonzero((w != 0) & live))]

    ring = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
    n0, n1 = v.shape
    for i, j in zip(*np.nonzero(a <= floor)):
        if not (0 < i < n0 - 1 and 0 < j < n1 - 1):
            continue
        nodes = [(i + di, j + dj) for di, dj in ring]
        if min(a[k] for k in nodes) <= floor:
            continue
        total = sum(inc(ph[p], ph[q]) for p, q in zip(nodes, nodes[1:] + nodes[:1]))
        wind = int(np.rint(total / (2 * np.pi)))
        if wind:
            out.append((float(X[i, j]), float(Y[i, j]), wind))
    return out


class DipoleTracker:
    """Observer for a vortex dipole: the normalized density ``rho / max rho``
    at the midpoint of the closest pair of opposite windings.

    Records NaN once no such pair is left.
    """

    def __init__(self):
        self.times: list[float] = []
        self.values: list[float] = []
        self.pairs: list[Optional[tuple[tuple[float, float], tuple[float, float]]]] = []

    def __call__(self, step: int, t: float, u: GridFunction) -> None:
        found = phase_vortices(u)
        plus = [(x, y) for x, y, w in found if w > 0]
        minus = [(x, y) for x, y, w in found if w < 0]
        self.times.append(t)
        if not plus or not minus:
            self.values.append(math.nan)
            self.pairs.append(None)
            return
        a, b = min(((p, m) for p in plus for m in minus), key=lambda pm: math.dist(*pm))
        mid = (0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]))
        X, Y = u.spec.mesh()
        i = np.unravel_index(np.argmin((X - mid[0]) ** 2 + (Y - mid[1]) ** 2), X.shape)
        rho = np.abs(u.values) ** 2
        self.values.append(float(rho[i] / rho.max()))
        self.pairs.append((a, b))
