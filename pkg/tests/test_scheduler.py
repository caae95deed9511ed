import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sunedge.sbeo import SbeoInstance, Task, check_feasible
from sunedge.scheduler import (InfeasibleDeadline, SunlightAware, arrange, assign_orbits,
                               knapsack_select, orbital_cycle, query_energy, sunlit_run_lengths)
from sunedge.simkit.engine import Simulation, simulate
from sunedge.simkit.random_instances import random_desk_instance


def best_subset(weights, cap):
    """Reference: every subset, max weight <= cap, then fewer items, then ids."""
    best = None
    ids = sorted(weights)
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            w = sum(weights[i] for i in combo)
            if w > cap:
                continue
            key = (-w, len(combo), list(combo))
            if best is None or key < best[0]:
                best = (key, list(combo))
    return best[1]


# -- orbital cycle ----------------------------------------------------------

def test_orbital_cycle_values():
    assert orbital_cycle(550, 1.0) == 5730
    assert orbital_cycle(1200, 1.0) == 6556
    assert orbital_cycle(550, 2.0) == round(5730.127 / 2)


# -- knapsack ---------------------------------------------------------------

def test_knapsack_examples():
    w = {0: 3, 1: 4, 2: 5}
    assert knapsack_select(w, w, 0) == []
    assert sorted(w[i] for i in knapsack_select(w, w, 7)) == [3, 4]
    assert knapsack_select([0, 1], {0: 6, 1: 5}, 4) == []


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 12), min_size=0, max_size=7), st.integers(0, 30))
def test_knapsack_matches_exhaustive(ws, cap):
    weights = dict(enumerate(ws))
    assert knapsack_select(weights, weights, cap) == best_subset(weights, cap)


# -- orbit assignment --------------------------------------------------------

def one_sat_per_orbit(sunlit_counts, cycle=10):
    sun = np.zeros((cycle, len(sunlit_counts)), dtype=bool)
    for s, n in enumerate(sunlit_counts):
        sun[:n, s] = True
    return sun


def test_self_sufficient_orbit_keeps_itself():
    sun = one_sat_per_orbit([10, 2, 2])
    a = assign_orbits(sun, np.arange(3), [Task(0, 0, 1.0, 0, 3, 9)], 0, 10)
    # sole task orbit: target = Int(1 * 14) - 10 = 4, both idle orbits fit
    assert a.target[0] == 4 and a.orbits_for(0) == [0, 1, 2]
    tasks = [Task(0, 0, 1.0, 0, 1, 9), Task(1, 1, 1.0, 0, 9, 9)]
    a = assign_orbits(sun, np.arange(3), tasks, 0, 10)
    # w0 = 0.1: target0 = Int(1.4) - 10 < 0
    assert a.target[0] < 0 and a.orbits_for(0) == [0]


def test_picks_the_idle_orbit_that_fills_the_gap():
    sun = one_sat_per_orbit([1, 5, 7, 3])
    tasks = [Task(0, 0, 1.0, 0, 2, 9), Task(1, 3, 1.0, 0, 2, 9)]
    a = assign_orbits(sun, np.arange(4), tasks, 0, 10)
    assert a.target.tolist()[0] == 7 and a.target.tolist()[3] == 5
    assert a.orbits_for(0) == [0, 2]
    assert a.orbits_for(3) == [3, 1]
    assert a.idle == []


def test_no_tasks_every_orbit_alone():
    a = assign_orbits(one_sat_per_orbit([3, 4]), np.arange(2), [], 0, 10)
    assert a.alt_set == {0: [0], 1: [1]}


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 10), min_size=3, max_size=7), st.data())
def test_assignment_disjoint_proportional_maximal(counts, data):
    m = len(counts)
    busy = data.draw(st.lists(st.integers(0, m - 1), min_size=1, max_size=m, unique=True))
    tasks = [Task(k, o, 1.0, 0, data.draw(st.integers(1, 5)), 9) for k, o in enumerate(busy)]
    a = assign_orbits(one_sat_per_orbit(counts), np.arange(m), tasks, 0, 10)
    seen = set()
    for i in sorted(set(busy)):
        alt = a.orbits_for(i)
        assert alt[0] == i
        assert not seen & set(alt)
        seen |= set(alt)
        extra = alt[1:]
        if a.target[i] >= 0:
            assert sum(a.sunlit[j] for j in extra) <= a.target[i]
    for i in sorted(set(busy)):
        if a.target[i] >= 0:
            used = sum(a.sunlit[j] for j in a.orbits_for(i)[1:])
            # an orbit left idle would overflow the target (or add nothing)
            for j in a.idle:
                assert used + a.sunlit[j] > a.target[i] or a.sunlit[j] == 0


def test_assignment_work_grows_at_most_quadratically():
    works = {}
    for m in (4, 8, 16):
        rng = np.random.default_rng(m)
        sun = rng.random((50, m)) < 0.6
        tasks = [Task(k, k, 1.0, 0, 5, 40) for k in range(m // 2)]
        works[m] = assign_orbits(sun, np.arange(m), tasks, 0, 50).work
    assert works[16] / works[4] <= (16 / 4) ** 2 * 1.5


# -- arrangement -------------------------------------------------------------

def test_arrange_idle_sunlit_starts_now():
    run = sunlit_run_lengths(np.ones((20, 1)))[:, 0]
    plan = arrange(run, 3, [Task(0, 0, 1.0, 3, 2, 15)])
    assert plan.start == {0: 3} and plan.flag_sun


def test_arrange_delays_to_sunrise():
    run = sunlit_run_lengths(np.r_[np.zeros(8), np.ones(12)][:, None])[:, 0]
    plan = arrange(run, 0, [Task(0, 0, 1.0, 0, 3, 20)])
    assert plan.start == {0: 8} and plan.flag_sun


def test_arrange_deadline_forces_eclipse():
    run = sunlit_run_lengths(np.r_[np.zeros(8), np.ones(12)][:, None])[:, 0]
    plan = arrange(run, 0, [Task(0, 0, 1.0, 0, 3, 6)])
    assert plan.start == {0: 3} and not plan.flag_sun


def test_arrange_chains_tasks_and_reports_infeasible():
    run = sunlit_run_lengths(np.ones((30, 1)))[:, 0]
    plan = arrange(run, 0, [Task(0, 0, 1.0, 0, 3, 20), Task(1, 0, 1.0, 0, 3, 20)])
    assert plan.start == {0: 0, 1: 3}
    bad = [Task(0, 0, 1.0, 0, 3, 4), Task(1, 0, 1.0, 0, 3, 4)]
    plan = arrange(run, 0, bad)
    assert plan.infeasible
    with pytest.raises(InfeasibleDeadline):
        arrange(run, 0, bad, strict=True)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.booleans(), min_size=20, max_size=40), st.data())
def test_arrange_sound_and_sunlight_optimal(sun_bits, data):
    n_t = len(sun_bits)
    run = sunlit_run_lengths(np.array(sun_bits)[:, None])[:, 0]
    tasks = []
    for k in range(data.draw(st.integers(1, 4))):
        t_cp = data.draw(st.integers(1, 4))
        dl = data.draw(st.integers(t_cp, n_t))
        tasks.append(Task(k, 0, 1.0, 0, t_cp, dl))
    plan = arrange(run, 0, tasks)
    if plan.infeasible:
        return
    by_id = {k.id: k for k in tasks}
    busy = set()
    earliest = 0
    for kid in plan.order:
        k, b = by_id[kid], plan.start[kid]
        slots = set(range(b, b + k.t_cp))
        assert not busy & slots and b + k.t_cp <= k.deadline
        busy |= slots
        if not plan.sunlit[kid]:
            # no start in [earliest, b] has a fully sunlit window
            assert all(run[x] < k.t_cp for x in range(earliest, b + 1))
        earliest = b + k.t_cp
    assert plan.flag_sun == all(plan.sunlit.values())


# -- energy query ------------------------------------------------------------

def test_query_energy_examples():
    sun = np.ones((100, 2), dtype=np.int64)
    sun[:90, 1] = 0
    cs = np.vstack([np.zeros((1, 2), np.int64), np.cumsum(sun, axis=0)])
    full = query_energy(cs, 0, 0, 100, 216000.0, 0, 120, 60, 1.0)
    assert full == 120 * 100 + 216000
    assert full - query_energy(cs, 0, 0, 100, 216000.0, 3, 120, 60, 1.0) == 60 * 3
    assert query_energy(cs, 1, 0, 100, 216000.0, 0, 120, 60, 1.0) < full


# -- offloading, through the engine ------------------------------------------

def tiny(sun, tasks, vis=None, isl=((0, 1), (0, 2), (1, 3), (2, 3)), orbit_of=(0, 0, 1, 1)):
    sun = np.asarray(sun, bool)
    n_t, n_s = sun.shape
    vis = np.zeros((n_t, n_s, 0), bool) if vis is None else vis
    return SbeoInstance(n_s, vis.shape[2], 1.0, sun, vis, list(isl), np.array(orbit_of), tasks,
                        cycle_slots=n_t)


def test_ground_fast_path_when_station_free():
    vis = np.zeros((400, 4, 1), bool)
    vis[:, 0, 0] = True
    inst = tiny(np.ones((400, 4)), [Task(0, 0, 100e6, 0, 3, 300)], vis=vis)
    r = simulate(inst, "SunlightAware")
    assert r.solution.dst == [4] and r.ground_finish[0] == pytest.approx(1.0)


def test_local_when_sunlit_and_idle():
    inst = tiny(np.ones((400, 4)), [Task(0, 0, 100e6, 0, 3, 300)])
    r = simulate(inst, "SunlightAware")
    assert r.solution.dst == [0] and r.solution.start == [0]


def test_offload_to_max_energy_satellite_of_sunlit_orbit():
    sun = np.zeros((400, 4), bool)
    sun[:, 2:] = True
    sun[100:120, 2] = False  # sat 2 sees a little less sun than sat 3
    inst = tiny(sun, [Task(0, 0, 100e6, 0, 3, 300)])
    r = simulate(inst, "SunlightAware")
    assert r.solution.dst == [3]
    assert check_feasible(inst, r.solution) == []
    assert r.solution.start[0] >= r.t_of[0]


def test_counter_conservation_and_ground_path_on_random_instances():
    rng = np.random.default_rng(11)
    for _ in range(20):
        inst = random_desk_instance(rng)
        strat = SunlightAware()
        sim = Simulation(inst, strat)
        cases = []
        orig = strat.begin_epoch

        def epoch(s, t, orig=orig):
            if strat.state is not None:
                cases.append((int(strat.state.cnt.sum()), strat.case_c_slots))
            orig(s, t)

        strat.begin_epoch = epoch
        r = sim.run_all()
        cases.append((int(strat.state.cnt.sum()), strat.case_c_slots))
        assert all(a == b for a, b in cases)
        for i, k in enumerate(inst.tasks):
            if r.solution.dst[i] >= inst.num_sats:
                assert r.ground_finish[i] <= k.deadline
