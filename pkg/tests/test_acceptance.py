"""Acceptance suite.  Each test records one pass/fail line per criterion; the
lines are repeated in the terminal summary.  Tolerances are fixed here."""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import record_criterion
from sunedge.energy import PowerParams, per_task_energy, simulate_battery
from sunedge.orbital import (ConstellationSpec, Shell, eclipse_fraction, full_orbit_sunlit,
                             is_sunlit, propagate, sunlit_ratio)
from sunedge.sbeo import brute_force_solve, check_feasible, objective
from sunedge.simkit.config import PRESETS
from sunedge.simkit.engine import simulate
from sunedge.simkit.random_instances import random_desk_instance, random_tiny_instance
from sunedge.simkit.run import run_simulation

REL_TOL_BATTERY = 1e-6
SUNLIT_SHARE_MIN = 0.90
REDUCTION_VS_GREEDY_MIN = 0.20
ORACLE_MATCH_MIN = 0.50
ORACLE_INSTANCES = 200
RANDOM_DESK_INSTANCES = 1000
MATCH_TOL = 1e-9
DOMINANCE_TOL = 1e-12


def test_criterion_1_battery_closed_form():
    t0 = time.perf_counter()
    p = PowerParams()
    cap = p.capacity_j
    n = 600
    steps = np.arange(n + 1)
    checks = []
    # idle in eclipse: 4 + 4 * 10 = 44 W
    tr = simulate_battery(np.zeros((n, 1), bool), 0, 0, p)
    checks.append(np.allclose(tr.levels[:, 0], cap - 44.0 * steps, rtol=REL_TOL_BATTERY, atol=0))
    # processing with the GSL up in eclipse: 44 + 60 + 16 = 120 W
    tr = simulate_battery(np.zeros((n, 1), bool), 1, 1, p)
    checks.append(np.allclose(tr.levels[:, 0], cap - 120.0 * steps, rtol=REL_TOL_BATTERY, atol=0))
    # eclipse then sunlight: drain, then recharge at 120 - 44 = 76 W up to capacity
    sun = np.r_[np.zeros(300, bool), np.ones(300, bool)][:, None]
    tr = simulate_battery(sun, 0, 0, p)
    low = cap - 44.0 * 300
    want = np.r_[cap - 44.0 * np.arange(301), np.minimum(low + 76.0 * np.arange(1, 301), cap)]
    checks.append(np.allclose(tr.levels[:, 0], want, rtol=REL_TOL_BATTERY, atol=0))
    # processing in sunlight: 120 - 104 = +16 W, stays full
    tr = simulate_battery(np.ones((n, 1), bool), 1, 0, p)
    checks.append(np.allclose(tr.levels[:, 0], cap, rtol=REL_TOL_BATTERY, atol=0))
    elapsed = time.perf_counter() - t0
    ok = all(checks) and elapsed < 1.0
    record_criterion(1, ok, f"{sum(checks)}/{len(checks)} traces exact, {elapsed:.3f} s")
    assert ok


def test_criterion_2_per_task_energy():
    expected = {"ship_detection": {30: 300, 50: 250, 60: 180},
                "wildfire": {30: 3600, 50: 3350, 60: 3060}}
    got = {task: {w: per_task_energy(w, PRESETS["tasks"][task]["processing_s"][w]) for w in levels}
           for task, levels in expected.items()}
    ok = got == expected
    record_criterion(2, ok, f"{got}")
    assert ok


def _beta_orbit(h, theta, n_slots):
    # sun on +x; an orbit with RAAN 90 deg and inclination theta has beta = theta
    spec = ConstellationSpec((Shell(h, theta, 1, 1, raan_offset_deg=90.0),))
    pos = propagate(spec, np.arange(n_slots), 1.0)
    return is_sunlit(pos, np.array([1.0, 0.0, 0.0]))


def test_criterion_3_geometry_consistency():
    t0 = time.perf_counter()
    samples = [(h, th) for h in (400.0, 550.0, 800.0, 1200.0, 2000.0)
               for th in (0.0, 30.0, 55.0, 60.0, 65.0, 68.0, 70.0, 75.0, 85.0)]
    disagree = []
    for h, th in samples:
        period = Shell(h, 0.0, 1, 1).period_s
        n = int(math.ceil(period))
        ratio = sunlit_ratio(_beta_orbit(h, th, n), 0, slice(0, n))
        predicted = full_orbit_sunlit(h, th)
        shadow_slots = eclipse_fraction(h, th) * period
        if predicted and ratio != 1.0:
            disagree.append((h, th, ratio))
        elif not predicted and ratio == 1.0 and shadow_slots >= 1.0:
            disagree.append((h, th, ratio))
    elapsed = time.perf_counter() - t0
    ok = not disagree and len(samples) >= 20 and elapsed < 10.0
    record_criterion(3, ok, f"{len(samples)} samples, disagreements {disagree}, {elapsed:.2f} s")
    assert ok


def test_criterion_4_constraint_soundness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    checked = flagged = 0
    bad = []
    for n in range(RANDOM_DESK_INSTANCES):
        inst = random_desk_instance(rng)
        res = simulate(inst, "SunlightAware")
        if res.flagged("infeasible_deadline", "no_feasible_destination"):
            flagged += 1
            continue
        checked += 1
        violations = check_feasible(inst, res.solution)
        if violations:
            bad.append((n, violations[:2]))
    elapsed = time.perf_counter() - t0
    ok = not bad and checked > 0 and elapsed < 300.0
    record_criterion(4, ok, f"{checked} checked, {flagged} flagged, {len(bad)} with violations, "
                            f"{elapsed:.1f} s")
    assert ok, bad[:3]


def test_criterion_5_oracle_gap():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    gaps, skipped = [], 0
    while len(gaps) < ORACLE_INSTANCES:
        inst = random_tiny_instance(rng)
        res = simulate(inst, "SunlightAware")
        if check_feasible(inst, res.solution):
            skipped += 1  # heuristic missed a deadline: no objective to compare
            continue
        gaps.append(objective(inst, res.solution) - objective(inst, brute_force_solve(inst)))
    gaps = np.array(gaps)
    elapsed = time.perf_counter() - t0
    dominated = bool((gaps >= -DOMINANCE_TOL).all())
    match = float(np.mean(np.abs(gaps) <= MATCH_TOL))
    ok = dominated and match >= ORACLE_MATCH_MIN and elapsed < 600.0
    record_criterion(5, ok, f"{len(gaps)} instances ({skipped} infeasible heuristic runs skipped), "
                            f"dominance {dominated}, match {match:.2%}, mean gap {gaps.mean():.5f}, "
                            f"{elapsed:.1f} s")
    assert ok


def _sunlit_share(run):
    inst = run.result.instance
    sol = run.result.solution
    done = lit = 0
    for i, k in enumerate(inst.tasks):
        d, b = sol.dst[i], sol.start[i]
        if d < inst.num_sats and b is not None:
            done += 1
            lit += bool(inst.sun[b:b + k.t_cp, d].all())
    return lit / done if done else 1.0


def test_criterion_6_directional_reproduction(desk_runs):
    t0 = time.perf_counter()
    sa, li, gp, go = (desk_runs(n) for n in
                      ("SunlightAware", "LocalImmediate", "GreedyPeer", "GroundOnly"))
    m = {n: r.report for n, r in (("SA", sa), ("LI", li), ("GP", gp), ("GO", go))}
    reduction = 1 - m["SA"].global_max_dod / m["GP"].global_max_dod
    share = _sunlit_share(sa)
    parts = {
        "lower_than_local": m["SA"].global_max_dod < m["LI"].global_max_dod,
        "lower_than_greedy": m["SA"].global_max_dod < m["GP"].global_max_dod,
        "reduction_vs_greedy": reduction >= REDUCTION_VS_GREEDY_MIN,
        "sunlit_share": share >= SUNLIT_SHARE_MIN,
        "sa_no_misses": m["SA"].miss_rate == 0.0,
        "ground_only_misses": m["GO"].miss_rate > 0.0,
    }
    elapsed = time.perf_counter() - t0
    ok = all(parts.values()) and elapsed < 300.0
    record_criterion(6, ok, f"max DoD SA {m['SA'].global_max_dod:.4f} LI {m['LI'].global_max_dod:.4f} "
                            f"GP {m['GP'].global_max_dod:.4f}, reduction {reduction:.1%}, "
                            f"sunlit share {share:.3f}, miss SA {m['SA'].miss_rate:.4f} "
                            f"GO {m['GO'].miss_rate:.4f}, tasks {len(m['SA'].tasks)}")
    assert ok, parts


def test_criterion_7_seasonal_trend(desk_config):
    t0 = time.perf_counter()
    avg = {}
    for day in (80, 172, 266, 355):
        cfg = desk_config.with_overrides(
            constellation=replace(desk_config.constellation, epoch_day_of_year=day))
        avg[day] = run_simulation(cfg, "SunlightAware").report.average_dod
    elapsed = time.perf_counter() - t0
    ordered = all(avg[s] <= avg[e] for s in (172, 355) for e in (80, 266))
    ok = ordered and elapsed < 600.0
    record_criterion(7, ok, "avg DoD " + ", ".join(f"day {d}: {v:.5f}" for d, v in avg.items())
                     + f", {elapsed:.1f} s")
    assert ok


def test_criterion_8_lifetime_ordering(desk_runs):
    life = {n: desk_runs(n).report.min_lifetime
            for n in ("SunlightAware", "LocalImmediate", "GreedyPeer")}
    ok = life["SunlightAware"] >= life["LocalImmediate"] >= life["GreedyPeer"]
    record_criterion(8, ok, "min per-satellite lifetime (years) "
                     + ", ".join(f"{n} {v:.3f}" for n, v in life.items()))
    assert ok


@pytest.mark.parametrize("strategy", ["SunlightAware", "GreedyPeer"])
def test_criterion_9_determinism(desk_config, tmp_path, strategy):
    outputs = []
    for rep in range(2):
        run = run_simulation(desk_config, strategy)
        run.export(tmp_path / str(rep))
        outputs.append({f: (tmp_path / str(rep) / f).read_bytes()
                        for f in ("metrics.csv", "tasks.csv", "dod_trace.csv", "summary.json")})
    ok = outputs[0] == outputs[1]
    prev = CRITERIA_9.setdefault("runs", [])
    prev.append((strategy, ok))
    record_criterion(9, all(o for _, o in prev),
                     "byte-identical exports for " + ", ".join(f"{s}: {o}" for s, o in prev))
    assert ok


CRITERIA_9: dict = {}
