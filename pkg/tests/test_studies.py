import math

import numpy as np
import pytest

from logse_lab.analytic import GaussonParams, initial_condition
from logse_lab.grid import GridFunction, GridSpec
from logse_lab.stepping import Every, SchemeParams, run_simulation
from logse_lab.studies import (
    CoreTracker,
    DipoleTracker,
    first_drop,
    peak_modulus,
    phase_vortices,
    run_gausson,
    spatial_study,
    strictly_increasing,
    temporal_study,
    trend_slope,
    truncation_study,
    vortex_core_density,
)

TAUS = [0.05, 0.025, 0.0125, 0.00625]


@pytest.fixture(scope="module")
def moving_phase_studies():
    """omega = 1 makes the time error visible above the spatial floor."""
    spec = GridSpec.from_spacing(2, -5, 5, 1 / 32)
    p = GaussonParams(1.0, -1.0)
    return {s: temporal_study(s, p, spec, TAUS, 0.5) for s in ("BDF1", "BDF2")}


def test_bdf1_first_order_in_time(moving_phase_studies):
    rep = moving_phase_studies["BDF1"]
    assert 0.95 <= rep.fitted["l2"] <= 1.05
    assert 0.95 <= rep.fitted["h1"] <= 1.05
    # halving tau halves the error
    e = np.asarray(rep.errors["l2"])
    np.testing.assert_allclose(e[:-1] / e[1:], 2.0, rtol=0.05)


def test_bdf2_second_order_in_time(moving_phase_studies):
    rep = moving_phase_studies["BDF2"]
    assert 1.8 <= rep.fitted["l2"] <= 2.2
    e = np.asarray(rep.errors["l2"])
    quarter = e[:-2] / e[2:]
    assert np.all((quarter > 10) & (quarter < 20))


def test_bdf2_beats_bdf1(moving_phase_studies):
    assert np.all(np.asarray(moving_phase_studies["BDF2"].errors["l2"]) < np.asarray(moving_phase_studies["BDF1"].errors["l2"]))


def test_error_modes_agree_in_order():
    spec = GridSpec.from_spacing(2, -5, 5, 1 / 16)
    p = GaussonParams(1.0, -1.0)
    rep = temporal_study("BDF1", p, spec, [0.05, 0.025, 0.0125], 0.25, error_mode="max")
    assert 0.9 <= rep.fitted["l2"] <= 1.1
    with pytest.raises(ValueError):
        temporal_study("BDF1", p, spec, [0.05, 0.025, 0.0125], 0.25, error_mode="mean")


def test_run_gausson_max_bounds_final():
    run = run_gausson("BDF2", GaussonParams(1.0, -1.0), GridSpec.from_spacing(2, -5, 5, 1 / 8), 0.05, 0.25)
    assert run.l2_max >= run.l2_final and run.h1_max >= run.h1_final
    quick = run_gausson("BDF2", GaussonParams(1.0, -1.0), GridSpec.from_spacing(2, -5, 5, 1 / 8), 0.05, 0.25, track_max=False)
    assert math.isnan(quick.l2_max) and quick.l2_final == run.l2_final


def test_spatial_study_second_order():
    rep = spatial_study("BDF2", GaussonParams(0.0, -1.0), -6, 6, [0.5, 0.25, 0.125], 0.01, 0.05)
    assert 1.8 <= rep.fitted["l2"] <= 2.2
    assert rep.param_name == "h"


def test_truncation_study_axes():
    p = GaussonParams(1.0, -1.0)
    rep = truncation_study("BDF1", p, -6, 6, "time", [0.04, 0.02, 0.01], fixed=1 / 16)
    assert rep.param_name == "tau" and 0.9 <= rep.fitted["xi"] <= 1.1
    with pytest.raises(ValueError):
        truncation_study("BDF1", p, -6, 6, "diagonal", [0.04, 0.02, 0.01], fixed=1 / 16)


def test_case_IV_stays_mirror_symmetric():
    spec = GridSpec.from_spacing(2, -8, 8, 1 / 8)
    u0 = initial_condition("IV", spec)
    res = run_simulation(u0, SchemeParams(-1.0, 0.01, 20, "BDF2"), series_stride=None)
    v = res.final.values
    assert np.max(np.abs(v - v[::-1, :])) <= 1e-8 * np.max(np.abs(v))



def test_vortex_core_density_finds_zero():
    spec = GridSpec.from_spacing(2, -2, 2, 1 / 16)
    core = (-0.5, 0.125)
    u = GridFunction.sample(spec, lambda x, y: ((x - core[0]) + 1j * (y - core[1])) * np.exp(-(x**2 + y**2)))
    val, x, y = vortex_core_density(u, (-0.4, 0.0), 0.3)
    assert val == 0 and (x, y) == pytest.approx(core)
    assert vortex_core_density(GridFunction.zeros(spec), (0, 0), 0.3)[0] == 0


def test_core_tracker_follows_motion():
    spec = GridSpec.from_spacing(2, -2, 2, 1 / 16)
    tracker = CoreTracker(start=(-0.5, 0.0), radius=0.2)
    for n, cy in enumerate((0.0, 0.125, 0.25, 0.375)):
        u = GridFunction.sample(spec, lambda x, y, cy=cy: ((x + 0.5) + 1j * (y - cy)) * np.exp(-(x**2 + y**2)))
        tracker(n, 0.1 * n, u)
    assert [p[1] for p in tracker.positions] == pytest.approx([0.0, 0.125, 0.25, 0.375])
    assert tracker.values == [0.0] * 4 and tracker.times == pytest.approx([0, 0.1, 0.2, 0.3])


def test_trend_helpers():
    assert strictly_increasing([1, 2, 3]) and not strictly_increasing([1, 2, 2])
    assert trend_slope([0, 1, 2], [1, 3, 5]) == pytest.approx(2.0)
    assert first_drop([1, 2, 3]) is None and first_drop([1, 3, 2, 4]) == 2


def test_peak_modulus():
    spec = GridSpec.uniform(1, 0, 1, 4)
    u = GridFunction.from_interior(spec, np.array([1, -2j, 0.5]))
    assert peak_modulus(u) == 2.0


def test_observer_driven_peak_series():
    spec = GridSpec.from_spacing(2, -4, 4, 1 / 4)
    peaks = []
    run_simulation(initial_condition("I", spec), SchemeParams(-10.0, 0.01, 5, "BDF1"),
                   [Every(1, lambda n, t, u: peaks.append(peak_modulus(u)))], series_stride=None)
    assert len(peaks) == 6 and peaks[0] == pytest.approx(1.0)


def test_phase_vortices_off_grid():
    spec = GridSpec.from_spacing(2, -2, 2, 1 / 8)
    env = lambda x, y: np.exp(-(x**2 + y**2))
    u = GridFunction.sample(spec, lambda x, y: ((x - 0.3) + 1j * (y + 0.2)) * env(x, y))
    assert phase_vortices(u) == [(0.3125, -0.1875, 1)]
    v = GridFunction.sample(spec, lambda x, y: ((x - 0.3) - 1j * (y + 0.2)) * env(x, y))
    assert phase_vortices(v) == [(0.3125, -0.1875, -1)]


@pytest.mark.parametrize("case, windings", [("II", {(-0.5, 1), (0.5, 1)}), ("III", {(-0.5, -1), (0.5, 1)})])
def test_phase_vortices_on_nodes(case, windings):
    u = initial_condition(case, GridSpec.from_spacing(2, -4, 4, 1 / 8))
    found = phase_vortices(u)
    assert {(x, w) for x, y, w in found} == windings
    assert all(y == 0 for _, y, _ in found)
    with pytest.raises(ValueError):
        phase_vortices(GridFunction.zeros(GridSpec.uniform(1, 0, 1, 4)))


def test_dipole_tracker():
    spec = GridSpec.from_spacing(2, -4, 4, 1 / 8)
    tracker = DipoleTracker()
    tracker(0, 0.0, initial_condition("III", spec))
    tracker(1, 0.1, initial_condition("I", spec))
    u = initial_condition("III", spec)
    rho = np.abs(u.values) ** 2
    X, Y = spec.mesh()
    assert tracker.values[0] == pytest.approx(rho[(X == 0) & (Y == 0)][0] / rho.max())
    assert math.isnan(tracker.values[1]) and tracker.pairs[1] is None
