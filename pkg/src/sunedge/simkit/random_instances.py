"""Randomised synthetic instances for property checks and oracle comparisons.

Sunlight follows an orbit-like square wave (one eclipse block per period,
phase-shifted along each plane) and ground passes are short random windows,
so instances look like small constellations without any geometry cost.
"""

from __future__ import annotations

import numpy as np

from ..energy import PowerParams
from ..sbeo import SbeoInstance, Task


def square_wave_sun(n_slots: int, orbit_of: np.ndarray, period: int, eclipse: int,
                    rng: np.random.Generator) -> np.ndarray:
    orbit_of = np.asarray(orbit_of)
    n_s = orbit_of.size
    plane_phase = rng.integers(0, period, size=int(orbit_of.max()) + 1)
    sun = np.ones((n_slots, n_s), dtype=bool)
    t = np.arange(n_slots)
    for s in range(n_s):
        members = np.flatnonzero(orbit_of == orbit_of[s])
        pos = int(np.searchsorted(members, s))
        phase = (plane_phase[orbit_of[s]] + pos * period // max(len(members), 1)) % period
        sun[:, s] = ((t + phase) % period) >= eclipse
    return sun


def random_passes(n_slots: int, n_sats: int, n_stations: int, rng: np.random.Generator,
                  passes_per_sat: float, pass_len: tuple[int, int]) -> np.ndarray:
    vis = np.zeros((n_slots, n_sats, n_stations), dtype=bool)
    if n_stations == 0:
        return vis
    for s in range(n_sats):
        for _ in range(rng.poisson(passes_per_sat)):
            g = rng.integers(n_stations)
            length = int(rng.integers(pass_len[0], pass_len[1] + 1))
            t0 = int(rng.integers(0, max(1, n_slots - 1)))
            vis[t0:t0 + length, s, g] = True
    return vis


def grid_isl(num_planes: int, per_plane: int) -> list[tuple[int, int]]:
    edges = set()
    for p in range(num_planes):
        for j in range(per_plane):
            i = p * per_plane + j
            for k in (p * per_plane + (j + 1) % per_plane, ((p + 1) % num_planes) * per_plane + j):
                if k != i:
                    edges.add((min(i, k), max(i, k)))
    return sorted(edges)


def random_tiny_instance(rng: np.random.Generator, max_sats: int = 3, max_tasks: int = 4,
                         max_slots: int = 60, max_slack: int = 6) -> SbeoInstance:
    """At most 3 satellites, 4 tasks and 60 slots; deadlines leave at most
    ``max_slack`` spare slots so the exhaustive oracle stays tractable.

    A small battery makes the 60-slot window long enough for DoD differences
    to show.
    """
    n_s = int(rng.integers(1, max_sats + 1))
    n_g = int(rng.integers(0, 2))
    n_t = int(rng.integers(min(20, max_slots), max_slots + 1))
    orbit_of = np.sort(rng.integers(0, 2, size=n_s))
    orbit_of = np.unique(orbit_of, return_inverse=True)[1]
    period = int(rng.integers(min(10, n_t - 1), min(30, n_t)))
    sun = square_wave_sun(n_t, orbit_of, period, int(rng.integers(2, period // 2 + 1)), rng)
    vis = random_passes(n_t, n_s, n_g, rng, 1.0, (2, 8))
    isl = [(i, i + 1) for i in range(n_s - 1)]
    power = PowerParams(battery_volume=float(rng.choice([0.5, 1.0, 2.0])))
    tasks = []
    for k in range(int(rng.integers(1, max_tasks + 1))):
        t_cp = int(rng.integers(1, 6))
        arrival = int(rng.integers(0, n_t - t_cp - 1))
        deadline = min(n_t, arrival + t_cp + 1 + int(rng.integers(0, max_slack)))
        size = float(rng.choice([1e8, 5e8, 1e9, 2e9]))
        tasks.append(Task(k, int(rng.integers(n_s)), size, arrival, t_cp, deadline))
    return SbeoInstance(n_s, n_g, 1.0, sun, vis, isl, orbit_of, tasks, power=power,
                        cycle_slots=period)


def random_desk_instance(rng: np.random.Generator, max_planes: int = 6, max_per_plane: int = 8,
                         max_tasks: int = 200) -> SbeoInstance:
    """Up to 48 satellites on a +Grid, up to 200 tasks, 300-400 slots."""
    n_p = int(rng.integers(2, max_planes + 1))
    n_q = int(rng.integers(2, max_per_plane + 1))
    n_s = n_p * n_q
    n_g = int(rng.integers(0, 11))
    n_t = int(rng.integers(300, 401))
    orbit_of = np.repeat(np.arange(n_p), n_q)
    period = int(rng.integers(80, 200))
    sun = square_wave_sun(n_t, orbit_of, period, int(period * rng.uniform(0.0, 0.45)), rng)
    vis = random_passes(n_t, n_s, n_g, rng, 1.5, (5, 40))
    tasks = []
    for k in range(int(rng.integers(0, max_tasks + 1))):
        t_cp = int(rng.integers(1, 11))
        arrival = int(rng.integers(0, n_t - t_cp - 60))
        deadline = min(n_t, arrival + t_cp + int(rng.integers(0, 120)))
        size = float(rng.choice([1e8, 4e8, 8e8]))
        tasks.append(Task(k, int(rng.integers(n_s)), size, arrival, t_cp, deadline))
    tasks.sort(key=lambda k: (k.arrival, k.src, k.id))
    tasks = [Task(i, k.src, k.size, k.arrival, k.t_cp, k.deadline) for i, k in enumerate(tasks)]
    return SbeoInstance(n_s, n_g, 1.0, sun, vis, grid_isl(n_p, n_q), orbit_of, tasks,
                        cycle_slots=period)
