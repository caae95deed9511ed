"""Task generation from regions of interest."""

from __future__ import annotations

import math

import numpy as np

from ..orbital import Sky
from ..sbeo import Task
from .config import ScenarioConfig


def in_regions(latlon: np.ndarray, boxes) -> np.ndarray:
    """Boolean mask of points inside any ``[lat0, lat1, lon0, lon1]`` box."""
    lat, lon = latlon[..., 0], latlon[..., 1]
    mask = np.zeros(lat.shape, dtype=bool)
    for la0, la1, lo0, lo1 in boxes:
        mask |= (lat >= la0) & (lat <= la1) & (lon >= lo0) & (lon <= lo1)
    return mask


def capture_slots(inside: np.ndarray, interval: int, phase: np.ndarray) -> list[tuple[int, int]]:
    """(slot, sat) captures: inside an RoI and at least ``interval`` slots after
    the previous capture.  ``phase[s]`` delays the first capture only."""
    out = []
    for s in range(inside.shape[1]):
        slots = np.flatnonzero(inside[:, s])
        if slots.size == 0:
            continue
        last = None
        first_ok = int(slots[0]) + int(phase[s])
        for t in slots:
            t = int(t)
            if last is None:
                if t < first_ok:
                    continue
            elif t - last < interval:
                continue
            out.append((t, s))
            last = t
    return out


def generate_workload(config: ScenarioConfig, sky: Sky) -> list[Task]:
    """Tasks captured over the configured regions, ids in (arrival, src) order.

    Tasks whose deadline falls past the horizon are dropped so that every
    emitted task is judged on a complete window.
    """
    wl = config.workload
    dt = config.dt
    interval = max(1, int(math.ceil(wl.interval_s() / dt - 1e-9)))
    inside = in_regions(sky.subsatellite(), wl.boxes())
    rng = np.random.default_rng(config.seed)
    phase = rng.integers(0, interval, size=sky.num_sats)
    t_cp = config.processing_slots
    ddl = config.deadline_slots
    horizon = sky.num_slots
    tasks = []
    for t, s in sorted(capture_slots(inside, interval, phase)):
        if t + ddl > horizon:
            continue
        tasks.append(Task(len(tasks), s, wl.image_bits, t, t_cp, t + ddl))
    return tasks
