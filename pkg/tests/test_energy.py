import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sunedge.energy import (SECONDS_PER_YEAR, BatteryTrace, LifetimeModel, PowerParams,
                            battery_step, cycle_depths, dod, lifetime_estimate, per_task_energy,
                            simulate_battery)

P = PowerParams()
CAP = 60 * 3600.0


def test_sunlit_idle_full_battery_stays_full():
    assert battery_step(1, 0, 0, P, CAP).battery == CAP


def test_eclipse_idle_drain_is_44_joules():
    assert battery_step(0, 0, 0, P, CAP).battery == CAP - 44.0


def test_eclipse_processing_with_gsl_drain_is_120_joules():
    assert battery_step(0, 1, 1, P, CAP).battery == CAP - 120.0


def test_brownout_clamps_and_reports():
    r = battery_step(0, 1, 1, P, 50.0)
    assert r.battery == 0.0 and r.brownout
    tr = simulate_battery(np.zeros((3, 1), bool), 1, 1, PowerParams(battery_volume=100 / 3600))
    assert tr.levels[-1, 0] == 0.0 and tr.brownouts == [(0, 0), (1, 0), (2, 0)]


def test_dod_definition():
    # levels[0] is the initial charge; dod(.., t) reads the level after slot t
    levels = np.array([[CAP], [CAP], [CAP / 2], [0.0]])
    tr = BatteryTrace(CAP, levels)
    assert [dod(tr, 0, t) for t in range(3)] == [0.0, 0.5, 1.0]


def test_per_task_energy_values():
    assert per_task_energy(30, 10) == 300
    assert per_task_energy(60, 3) == 180
    assert per_task_energy(50, 67) == 3350
    with pytest.raises(ValueError):
        per_task_energy(0, 3)


def test_zero_dod_gives_ceiling_and_flag():
    model = LifetimeModel.calibrated(5730.0)
    est = lifetime_estimate(np.zeros(100), model, 10)
    assert est.degenerate and est.years == model.ceiling_years


def test_constant_cycle_depth_closed_form():
    model = LifetimeModel(a=1000.0, b=2.0, cycle_period_s=6000.0)
    series = np.tile(np.r_[np.linspace(0, 0.3, 5), np.linspace(0.3, 0, 5)], 4)
    est = lifetime_estimate(series, model, 10)
    assert est.mean_cycle_dod == pytest.approx(0.3)
    assert est.years == pytest.approx(1000.0 * 0.3**-2 * 6000.0 / SECONDS_PER_YEAR)


def test_calibration_halves_life_per_twenty_points():
    model = LifetimeModel.calibrated(5730.0, ref_dod=0.4, ref_cycles=20000)
    assert model.cycles(0.4) == pytest.approx(20000)
    assert model.cycles(0.6) == pytest.approx(10000)
    # b = ln 2 / ln 1.5
    assert model.b == pytest.approx(math.log(2) / math.log(1.5))


def test_cycle_depths_takes_window_maxima():
    assert cycle_depths([0.1, 0.3, 0.2, 0.5, 0.4], 2).tolist() == [0.3, 0.5, 0.4]


def test_power_params_reject_negative():
    with pytest.raises(ValueError):
        PowerParams(p_cp=-1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.integers(0, 2), st.booleans()), min_size=1, max_size=50))
def test_levels_stay_in_range_and_match_stepwise(steps):
    sun = np.array([[s] for s, _, _ in steps])
    proc = np.array([[p] for _, p, _ in steps])
    gsl = np.array([[g] for _, _, g in steps])
    small = PowerParams(battery_volume=1.0)
    tr = simulate_battery(sun, proc, gsl, small)
    assert ((tr.levels >= 0) & (tr.levels <= small.capacity_j)).all()
    b = small.capacity_j
    for t, (s, p, g) in enumerate(steps):
        b = battery_step(s, p, g, small, b).battery
        assert tr.levels[t + 1, 0] == b


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_lifetime_monotone_in_depth(d1, d2):
    model = LifetimeModel.calibrated(5730.0)
    lo, hi = sorted((d1, d2))
    assert model.cycles(lo) >= model.cycles(hi)
