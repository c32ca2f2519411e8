"""Acceptance criteria, one test per criterion.

Each test records a ``CRITERION n: PASS|FAIL ...`` line (echoed in the pytest
terminal summary) before asserting, so the report is complete even when a
criterion fails. Every tolerance below is pinned; none is tuned to the
measured values.
"""

import math
import time

import numpy as np
import pytest

from logse_lab.analytic import CASE_PRESETS, GaussonParams, exact_on_grid, gausson, gausson_flipped_phase, initial_condition, pde_residual
from logse_lab.diagnostics import estimate_order, mass
from logse_lab.grid import GridSpec
from logse_lab.properties import check_dense_solver, run_all
from logse_lab.stepping import Every, SchemeParams, run_simulation
from logse_lab.studies import DipoleTracker, peak_modulus, spatial_study, strictly_increasing, temporal_study, truncation_study

pytestmark = pytest.mark.slow

TAUS = [0.1 * 2.0**-j for j in range(1, 5)]
HS = [(1 / 8) * 2.0**-j for j in range(0, 4)]
STATIONARY = GaussonParams(omega=0.0, lam=-1.0)
MOVING = GaussonParams(omega=1.0, lam=-1.0)
# Gausson values on the boundary of [-6, 6]^2 are below e^{-17}; on [-5, 5]^2
# they are about e^{-11.5} and zeroing them caps the finest-grid defects.
WIDE = (-6.0, 6.0)


def _fmt(values):
    return "[" + ", ".join(f"{v:.4f}" for v in np.atleast_1d(values)) + "]"


def record(log, n, passed, **detail):
    parts = [f"CRITERION {n}:", "PASS" if passed else "FAIL"]
    parts += [f"{k}={v}" for k, v in detail.items()]
    line = " ".join(parts)
    log.append(line)
    print(line)
    return passed


@pytest.fixture(scope="session")
def reference_temporal():
    """The stationary-Gausson temporal study on [-5, 5]^2, h = 1/32, T = 0.5."""
    spec = GridSpec.from_spacing(2, -5, 5, 1 / 32)
    out = {}
    for scheme in ("BDF1", "BDF2"):
        t0 = time.perf_counter()
        out[scheme] = temporal_study(scheme, STATIONARY, spec, TAUS, 0.5)
        out[scheme].extra["seconds"] = time.perf_counter() - t0
    return out


def test_criterion_1_bdf1_temporal_order(reference_temporal, acceptance_log):
    rep = reference_temporal["BDF1"]
    order = rep.fitted["l2"]
    ok = 0.85 <= order <= 1.15
    record(acceptance_log, 1, ok, fitted_l2=f"{order:.4f}", window="[0.85,1.15]", pairwise=_fmt(rep.orders["l2"]),
           l2_errors=_fmt(np.log10(rep.errors["l2"])) + "(log10)", seconds=f"{rep.extra['seconds']:.1f}")
    assert ok


def test_criterion_2_bdf2_temporal_order(reference_temporal, acceptance_log):
    rep = reference_temporal["BDF2"]
    l2, h1 = rep.fitted["l2"], rep.fitted["h1"]
    ok = 1.8 <= l2 <= 2.2 and h1 >= 1.4
    record(acceptance_log, 2, ok, fitted_l2=f"{l2:.4f}", window_l2="[1.8,2.2]", fitted_h1=f"{h1:.4f}", min_h1=1.4,
           pairwise_l2=_fmt(rep.orders["l2"]), seconds=f"{rep.extra['seconds']:.1f}")
    assert ok


def test_criterion_3_spatial_order(acceptance_log):
    fitted, ok = {}, True
    t0 = time.perf_counter()
    for scheme in ("BDF1", "BDF2"):
        rep = spatial_study(scheme, STATIONARY, *WIDE, HS, 1e-3, 0.25)
        for norm in ("l2", "h1"):
            fitted[f"{scheme}_{norm}"] = rep.fitted[norm]
            ok &= 1.8 <= rep.fitted[norm] <= 2.2
    detail = {k: f"{v:.4f}" for k, v in fitted.items()}
    record(acceptance_log, 3, ok, window="[1.8,2.2]", box="[-6,6]^2", **detail, seconds=f"{time.perf_counter() - t0:.1f}")
    assert ok


def test_criterion_4_bdf1_h1_temporal(reference_temporal, acceptance_log):
    rep = reference_temporal["BDF1"]
    h1 = rep.fitted["h1"]
    ok = h1 >= 0.45
    record(acceptance_log, 4, ok, fitted_h1=f"{h1:.4f}", min=0.45, pairwise=_fmt(rep.orders["h1"]))
    assert ok


def test_criterion_5_truncation_scaling(acceptance_log):
    t0 = time.perf_counter()
    windows = {"BDF1": (0.9, 1.1), "BDF2": (1.7, 2.2)}
    detail, ok = {}, True
    for scheme, (lo, hi) in windows.items():
        rt = truncation_study(scheme, MOVING, *WIDE, "time", TAUS, fixed=1 / 64)
        rs = truncation_study(scheme, MOVING, *WIDE, "space", HS, fixed=1e-7)
        ot, os_ = rt.orders["xi"], rs.orders["xi"]
        ok &= bool(np.all((ot >= lo) & (ot <= hi)) and np.all((os_ >= 1.9) & (os_ <= 2.1)))
        detail[f"{scheme}_time"] = _fmt(ot)
        detail[f"{scheme}_space"] = _fmt(os_)
    record(acceptance_log, 5, ok, **detail, time_windows="BDF1[0.9,1.1],BDF2[1.7,2.2]", space_window="[1.9,2.1]",
           seconds=f"{time.perf_counter() - t0:.1f}")
    assert ok


def test_criterion_6_solver_oracle(acceptance_log):
    t0 = time.perf_counter()
    r = check_dense_solver(np.random.default_rng(6), cases=100, max_interior=512, tol=1e-10)
    record(acceptance_log, 6, r.passed, cases=r.samples, worst_rel_diff=f"{r.detail['max_rel_diff']:.3e}",
           tol=1e-10, seconds=f"{time.perf_counter() - t0:.1f}")
    assert r.passed


def test_criterion_7_inequality_suite(acceptance_log):
    t0 = time.perf_counter()
    results = run_all(seed=0, samples=100_000)
    failed = [r.name for r in results if not r.passed]
    small = [r.name for r in results if r.name not in ("dense_solver_oracle", "dst_roundtrip", "summation_by_parts")
             and r.samples < 100_000]
    ok = not failed and not small
    record(acceptance_log, 7, ok, suites=len(results), failed=",".join(failed) or "none",
           under_sampled=",".join(small) or "none", seconds=f"{time.perf_counter() - t0:.1f}")
    assert ok


def test_criterion_8_gausson_validity(acceptance_log):
    p = GaussonParams(0.5, -1.0)
    pts = np.random.default_rng(8).uniform(-1.5, 1.5, (20, 2))
    steps = [0.04, 0.02, 0.01]

    def levels(func):
        return [float(np.max(np.abs(pde_residual(lambda x, t: func(x, t, p), pts, 0.3, p.lam, s)))) for s in steps]

    good, bad = levels(gausson), levels(gausson_flipped_phase)
    order = estimate_order(steps, good).fitted["l2"]
    u = exact_on_grid(STATIONARY, GridSpec.from_spacing(2, -5, 5, 1 / 64), 0.0)
    rel = abs(mass(u) - math.pi * math.e**2) / (math.pi * math.e**2)
    ok = order >= 3.5 and good[-1] < 1e-5 and bad[-1] > 1e-1 and rel <= 1e-6
    record(acceptance_log, 8, ok, residual_order=f"{order:.3f}", residual=f"{good[-1]:.2e}",
           flipped_phase_residual=f"{bad[-1]:.3e}", mass_rel_err=f"{rel:.2e}")
    assert ok


def test_criterion_9_mass_drift(reference_temporal, acceptance_log):
    drift = np.asarray(reference_temporal["BDF1"].extra["mass_drift"])
    ratios = drift[:-1] / drift[1:]
    ok = bool(np.all((ratios >= 1.6) & (ratios <= 2.4)))
    record(acceptance_log, 9, ok, ratios=_fmt(ratios), window="[1.6,2.4]", drift_finest=f"{drift[-1]:.3e}")
    assert ok


def _run_case(case, observers, t_final=1.0):
    pre = CASE_PRESETS[case]
    spec = GridSpec.from_spacing(2, -pre.half_width, pre.half_width, pre.h)
    p = SchemeParams.from_final_time(pre.lam, pre.tau, t_final, scheme=pre.scheme)
    run_simulation(initial_condition(case, spec), p, observers, series_stride=None)


def test_criterion_10_dynamics(acceptance_log):
    t0 = time.perf_counter()
    peaks = []
    _run_case("I", [Every(1, lambda n, t, u: peaks.append(peak_modulus(u)))])
    dipole = DipoleTracker()
    _run_case("III", [Every(10, dipole)])
    focusing = strictly_increasing(peaks)
    drop = next((i for i in range(1, len(peaks)) if peaks[i] <= peaks[i - 1]), None)
    rising = strictly_increasing(dipole.values)
    a, b = dipole.pairs[-1] if dipole.pairs[-1] else ((math.nan,) * 2,) * 2
    ok = focusing and rising
    record(acceptance_log, 10, ok, caseI_peak_increasing=focusing,
           caseI_first_drop_t=f"{0.01 * drop:.2f}" if drop else "none", caseI_peak_max=f"{max(peaks):.3f}",
           caseIII_midpoint_density_increasing=rising, caseIII_density=_fmt(dipole.values[::2]),
           caseIII_final_separation=f"{math.dist(a, b):.3f}", seconds=f"{time.perf_counter() - t0:.1f}")
    assert ok
