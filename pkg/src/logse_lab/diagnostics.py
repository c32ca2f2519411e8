"""Observables, error norms, truncation defects and observed convergence orders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import GridFunction, GridSpec, _laplacian, _norm, _check_same_spec
from .nonlinearity import F_primitive, f_log
from .stepping import Scheme


def mass(u: GridFunction) -> float:
    """Discrete mass ``||u||^2``."""
    return float(_norm(u.values, u.spec.spacings, "l2")) ** 2


def energy(u: GridFunction, lam: float) -> float:
    """Discrete energy ``|u|_1^2 + h^d sum F(|u|^2)``.

    The gradient part uses forward differences (the discrete semi-H1 norm),
    the potential part is nodewise quadrature of ``F(rho) = lam (rho ln rho - rho)``.
    """
    grad = float(_norm(u.values, u.spec.spacings, "seminorm_h1")) ** 2
    rho = np.abs(u.interior) ** 2
    return grad + u.spec.cell_volume * float(np.sum(F_primitive(rho, lam)))


def error_norms(numeric: GridFunction, exact: GridFunction) -> tuple[float, float]:
    """``(||e||, |e|_1)`` for ``e = exact - numeric``."""
    _check_same_spec(numeric, exact)
    e = exact.values - numeric.values
    h = numeric.spec.spacings
    return float(_norm(e, h, "l2")), float(_norm(e, h, "seminorm_h1"))


def truncation_error(
    scheme: Scheme | str,
    exact: Callable[[float], GridFunction],
    tau: float,
    n: int,
    lam: float,
) -> float:
    """Discrete L2 norm of the local truncation error at time level ``n``.

    ``exact(t)`` samples the exact solution on a fixed grid. For BDF1 the
    defect is ``i (U^{n+1} - U^n)/tau + d2 U^{n+1} - 2 lam f(U^n)``; for BDF2
    it is ``i D U^{n+1} + d2 U^{n+1} - 2 lam f(2U^n - U^{n-1})`` with the
    three-level difference ``D``, falling back to the BDF1 defect at ``n = 0``.
    """
    scheme = Scheme(scheme)
    if n < 0:
        raise ValueError("n must be >= 0")
    U1 = exact((n + 1) * tau)
    U0 = exact(n * tau)
    spec = U1.spec
    lap = _laplacian(U1.values, spec.spacings)
    if scheme is Scheme.BDF1 or n == 0:
        xi = 1j * (U1.values - U0.values) / tau + lap - 2.0 * lam * f_log(U0.values)
    else:
        Um = exact((n - 1) * tau).values
        dt = (3.0 * U1.values - 4.0 * U0.values + Um) / (2.0 * tau)
        xi = 1j * dt + lap - 2.0 * lam * f_log(2.0 * U0.values - Um)
    return float(_norm(xi, spec.spacings, "l2"))


# --- time series ---------------------------------------------------------------


@dataclass
class ObservableSeries:
    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    l2_error: Optional[np.ndarray] = None
    h1_error: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.times)
        for name in ("mass", "energy", "l2_error", "h1_error"):
            arr = getattr(self, name)
            if arr is not None and len(arr) != n:
                raise ValueError(f"series '{name}' has length {len(arr)}, expected {n}")

    def relative_mass_drift(self) -> np.ndarray:
        m0 = self.mass[0]
        return np.abs(self.mass - m0) / m0 if m0 > 0 else np.zeros_like(self.mass)


class SeriesRecorder:
    """Observer accumulating mass, energy and (optionally) errors against ``exact(t)``."""

    def __init__(self, lam: float, exact: Optional[Callable[[float], GridFunction]] = None):
        self.lam = lam
        self.exact = exact
        self._rows: list[tuple] = []

    def __call__(self, step: int, t: float, u: GridFunction) -> None:
        row = (t, mass(u), energy(u, self.lam))
        if self.exact is not None:
            row += error_norms(u, self.exact(t))
        self._rows.append(row)

    def series(self) -> ObservableSeries:
        cols = list(zip(*self._rows)) if self._rows else [()] * (5 if self.exact else 3)
        arrs = [np.asarray(c, dtype=float) for c in cols]
        if self.exact is not None:
            return ObservableSeries(*arrs)
        return ObservableSeries(*arrs[:3])


# --- convergence orders --------------------------------------------------------


@dataclass
class ConvergenceReport:
    """Errors across a refinement sequence and the orders observed from them.

    ``orders[name][k]`` is ``log(e_k / e_{k+1}) / log(p_k / p_{k+1})`` (the
    base-2 log ratio for halving), ``fitted[name]`` the least-squares slope of
    ``log e`` against ``log p``.
    """

    param_name: str
    params: np.ndarray
    errors: dict[str, np.ndarray]
    orders: dict[str, np.ndarray] = field(default_factory=dict)
    fitted: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    degenerate: bool = False
    extra: dict[str, np.ndarray] = field(default_factory=dict)

    def rows(self) -> list[dict[str, float]]:
        out = []
        for k, p in enumerate(self.params):
            row = {self.param_name: float(p)}
            for name, errs in self.errors.items():
                row[f"{name}_error"] = float(errs[k])
            for name, ords in self.orders.items():
                row[f"order_{name}"] = float(ords[k - 1]) if k > 0 else math.nan
            out.append(row)
        return out


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    A = np.vstack([x, np.ones_like(x)]).T
    slope, _ = np.linalg.lstsq(A, y, rcond=None)[0]
    return float(slope)


def estimate_order(
    params: Sequence[float],
    errors: dict[str, Sequence[float]] | Sequence[float],
    param_name: str = "param",
) -> ConvergenceReport:
    """Pairwise and fitted observed orders for a halving refinement sequence.

    ``errors`` is either one sequence or a mapping from norm name to sequence.
    All-zero errors mark the report ``degenerate`` (orders are NaN); errors that
    fail to decrease are reported in ``warnings`` without aborting.
    """
    p = np.asarray(params, dtype=float)
    if p.ndim != 1 or len(p) < 3:
        raise ValueError("need at least 3 refinement levels")
    if np.any(p <= 0) or np.any(np.diff(p) >= 0):
        raise ValueError("parameters must be positive and strictly decreasing")
    ratios = p[:-1] / p[1:]
    if not np.allclose(ratios, 2.0, rtol=1e-9):
        raise ValueError(f"parameters must halve at each level, got ratios {ratios}")
    if not isinstance(errors, dict):
        errors = {"l2": errors}

    report = ConvergenceReport(param_name, p, {k: np.asarray(v, dtype=float) for k, v in errors.items()})
    logp = np.log(p)
    for name, e in report.errors.items():
        if len(e) != len(p):
            raise ValueError(f"'{name}': {len(e)} errors for {len(p)} parameters")
        if np.all(e == 0):
            report.degenerate = True
            report.warnings.append(f"{name}: all errors are zero (degenerate data)")
            report.orders[name] = np.full(len(p) - 1, math.nan)
            report.fitted[name] = math.nan
            continue
        if np.any(e <= 0) or not np.all(np.isfinite(e)):
            report.warnings.append(f"{name}: non-positive or non-finite errors")
            report.orders[name] = np.full(len(p) - 1, math.nan)
            report.fitted[name] = math.nan
            continue
        if np.any(np.diff(e) >= 0):
            report.warnings.append(f"{name}: errors are not monotonically decreasing")
        loge = np.log(e)
        report.orders[name] = (loge[:-1] - loge[1:]) / (logp[:-1] - logp[1:])
        report.fitted[name] = _fit_slope(logp, loge)
    return report
