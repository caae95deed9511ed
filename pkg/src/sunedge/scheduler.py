"""Sunlight-aware scheduling: orbit assignment, orbit-based offloading and
deadline-first processing arrangement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .orbital import MU_EARTH, R_EARTH
from .sbeo import Task


class InfeasibleDeadline(Exception):
    def __init__(self, task_ids):
        super().__init__(f"tasks cannot meet their deadlines: {list(task_ids)}")
        self.task_ids = list(task_ids)


class NoFeasibleDestination(Exception):
    pass


def orbital_cycle(altitude_km: float, dt: float) -> int:
    """Orbital period in whole slots."""
    return int(round(2 * math.pi * math.sqrt((R_EARTH + altitude_km) ** 3 / MU_EARTH) / dt))


# --------------------------------------------------------------------------
# knapsack


def knapsack_select(items: Iterable[int], weights, capacity: int) -> list[int]:
    """0/1 knapsack with value = weight: the subset of ``items`` whose total
    weight is as large as possible without exceeding ``capacity``.

    Ties prefer fewer items, then the lexicographically smallest sorted id list.
    """
    items = sorted(int(i) for i in items)
    capacity = int(capacity)
    if capacity <= 0 or not items:
        return []
    w = [int(weights[i]) for i in items]
    n = len(items)
    inf = np.iinfo(np.int64).max // 2
    # fewest[i][c]: fewest items from items[i:] summing to exactly c
    fewest = np.full((n + 1, capacity + 1), inf, dtype=np.int64)
    fewest[n, 0] = 0
    for i in range(n - 1, -1, -1):
        fewest[i] = fewest[i + 1]
        wi = w[i]
        if wi <= capacity:
            cand = fewest[i + 1, :capacity + 1 - wi] + 1
            np.minimum(fewest[i, wi:], cand, out=fewest[i, wi:])
    reachable = np.flatnonzero(fewest[0] < inf)
    rem = int(reachable.max())
    need = int(fewest[0, rem])
    chosen = []
    for i in range(n):
        if need == 0:
            break
        wi = w[i]
        if wi <= rem and fewest[i + 1, rem - wi] == need - 1:
            chosen.append(items[i])
            rem -= wi
            need -= 1
    return chosen


# --------------------------------------------------------------------------
# orbit assignment


@dataclass
class OrbitAssignment:
    start: int
    cycle: int
    alt_set: dict[int, list[int]]
    sunlit: np.ndarray  # per orbit, satellite-slots of sunlight in the window
    task: np.ndarray  # per orbit, processing slots generated in the window
    weight: np.ndarray
    target: np.ndarray
    idle: list[int]  # idle orbits left unassigned
    work: int = 0  # elementary operations, for complexity checks

    def orbits_for(self, orbit: int) -> list[int]:
        return self.alt_set.get(orbit, [orbit])


def sunlit_window(sun: np.ndarray, t: int, cycle: int) -> np.ndarray:
    """Sunlit slots per satellite over ``[t, t + cycle - 1]`` (clipped)."""
    return np.asarray(sun[t:t + cycle], dtype=np.int64).sum(axis=0)


def assign_orbits(sun: np.ndarray, orbit_of: np.ndarray, tasks: Sequence[Task], t: int,
                  cycle: int) -> OrbitAssignment:
    """Match each task-generating orbit with idle orbits whose combined
    sunlight is proportional to its share of the predicted processing load."""
    orbit_of = np.asarray(orbit_of)
    m = int(orbit_of.max()) + 1
    per_sat = sunlit_window(sun, t, cycle)
    sunlit = np.bincount(orbit_of, weights=per_sat, minlength=m).astype(np.int64)
    work = int(np.asarray(sun[t:t + cycle]).size)
    task = np.zeros(m, dtype=np.int64)
    for k in tasks:
        if t <= k.arrival <= t + cycle - 1:
            task[orbit_of[k.src]] += k.t_cp
    total_task = int(task.sum())
    if total_task == 0:
        alt = {i: [i] for i in range(m)}
        zero = np.zeros(m)
        return OrbitAssignment(t, cycle, alt, sunlit, task, zero, zero.astype(int),
                               list(range(m)), work)
    weight = task / total_task
    target = np.array([int(weight[i] * sunlit.sum()) - sunlit[i] for i in range(m)], dtype=np.int64)
    idle = [i for i in range(m) if task[i] == 0]
    alt = {}
    for i in range(m):
        if target[i] < 0:
            alt[i] = [i]
            continue
        subset = knapsack_select(idle, sunlit, int(target[i]))
        work += (len(idle) + 1) * (int(target[i]) + 1)
        alt[i] = [i] + subset
        idle = [j for j in idle if j not in subset]
    return OrbitAssignment(t, cycle, alt, sunlit, task, weight, target, idle, work)


# --------------------------------------------------------------------------
# processing arrangement


def sunlit_run_lengths(sun: np.ndarray) -> np.ndarray:
    """``run[t, s]``: consecutive sunlit slots starting at ``t`` (0 if dark)."""
    sun = np.asarray(sun, dtype=bool)
    run = np.zeros((sun.shape[0] + 1,) + sun.shape[1:], dtype=np.int64)
    for t in range(sun.shape[0] - 1, -1, -1):
        run[t] = np.where(sun[t], run[t + 1] + 1, 0)
    return run[:-1]


@dataclass
class Arrangement:
    start: dict[int, int]  # task id -> first processing slot
    flag_sun: bool
    sunlit: dict[int, bool]
    infeasible: list[int] = field(default_factory=list)
    order: list[int] = field(default_factory=list)

    def raise_if_infeasible(self):
        if self.infeasible:
            raise InfeasibleDeadline(self.infeasible)


def arrange(run: np.ndarray, t: int, tasks: Sequence[Task], strict: bool = False) -> Arrangement:
    """Deadline-first arrangement of ``tasks`` on one satellite from slot ``t``.

    ``run`` is that satellite's column of :func:`sunlit_run_lengths`.  Tasks
    are sorted by deadline; each one starts at the first slot whose whole
    processing window is sunlit, if that is no later than its latest start,
    otherwise at its latest start.  A task whose latest start already lies
    before its earliest start is placed at the earliest start and reported in
    ``infeasible``.
    """
    order = sorted(tasks, key=lambda k: (k.deadline, k.id))
    n = len(order)
    latest = [0] * n
    if n:
        latest[-1] = order[-1].deadline - order[-1].t_cp
        for i in range(n - 2, -1, -1):
            latest[i] = min(order[i].deadline, latest[i + 1]) - order[i].t_cp
    horizon = len(run)
    earliest = t
    flag = True
    start, lit, bad = {}, {}, []
    for i, k in enumerate(order):
        b = None
        if earliest <= latest[i] and earliest < horizon:
            window = run[earliest:min(latest[i], horizon - 1) + 1]
            hits = np.flatnonzero(window >= k.t_cp)
            if hits.size:
                b = earliest + int(hits[0])
        if b is None:
            flag = False
            b = latest[i]
            if b < earliest:
                bad.append(k.id)
                b = earliest
        start[k.id] = b
        lit[k.id] = b < horizon and bool(run[b] >= k.t_cp)
        earliest = b + k.t_cp
    result = Arrangement(start, flag, lit, bad, [k.id for k in order])
    if strict:
        result.raise_if_infeasible()
    return result


# --------------------------------------------------------------------------
# energy query


def query_energy(sun_cumsum: np.ndarray, s: int, t: int, cycle: int, battery: float,
                 queued_slots: int, p_solar: float, p_cp: float, dt: float) -> float:
    """Energy outlook of satellite ``s`` in joules: solar input over the next
    cycle plus stored charge minus the processing already queued there.

    ``sun_cumsum`` is the (T + 1, S) prefix sum of the sunlight indicator.
    """
    hi = min(t + cycle, sun_cumsum.shape[0] - 1)
    lit = int(sun_cumsum[hi, s] - sun_cumsum[min(t, hi), s])
    return p_solar * lit * dt + battery - p_cp * queued_slots * dt


# --------------------------------------------------------------------------
# the strategy


@dataclass
class OffloadState:
    cnt: np.ndarray
    t_gs: np.ndarray  # per-station next free time, in slots


class SunlightAware:
    """Ground first, then delayed local processing in sunlight, then the
    least loaded orbit of the pre-assigned subset."""

    name = "SunlightAware"

    def __init__(self):
        self.assignment: OrbitAssignment | None = None
        self.state: OffloadState | None = None
        self.case_c_slots = 0

    def begin_epoch(self, sim, t: int) -> None:
        inst = sim.instance
        self.assignment = assign_orbits(inst.sun_forecast, inst.orbit_of, inst.tasks, t, inst.cycle_slots)
        self.state = OffloadState(np.zeros(inst.num_orbits, dtype=np.int64), sim.t_gs)
        self.case_c_slots = 0

    # Algorithm 2
    def dispatch(self, sim, idx: int, t: int) -> None:
        inst = sim.instance
        task = inst.tasks[idx]
        src = task.src

        g = sim.nearest_available_station(src, t)
        if g is not None:
            begin = max(sim.t_gs[g], float(t))
            if begin + inst.ground_transfer_slots(task.size) <= task.deadline:
                sim.send_to_ground(idx, g, begin)
                return

        queue = sim.pending_tasks(src, t)
        plan = arrange(sim.run[:, src], sim.earliest_free(src, t), queue + [task])
        if plan.flag_sun:
            sim.send_local(idx)
            sim.commit(src, plan, t)
            return

        orbit = self._pick_orbit(inst.orbit_of[src])
        self.state.cnt[orbit] += task.t_cp
        self.case_c_slots += task.t_cp
        members = np.flatnonzero(inst.orbit_of == orbit)
        energy = [sim.energy_outlook(s, t) for s in members]
        dst = int(members[int(np.argmax(energy))])
        if dst == src:
            if plan.infeasible:
                sim.record("infeasible_deadline", t, src, plan.infeasible)
            sim.send_local(idx)
            sim.commit(src, plan, t)
        else:
            sim.send_to_satellite(idx, dst)

    def _pick_orbit(self, own: int) -> int:
        a = self.assignment
        best, best_ratio = own, math.inf
        for j in sorted(a.orbits_for(own)):
            if a.sunlit[j] <= 0:
                continue
            ratio = self.state.cnt[j] / a.sunlit[j]
            if ratio < best_ratio:
                best, best_ratio = j, ratio
        return best

    def on_delivered(self, sim, idx: int, t: int) -> None:
        task = sim.instance.tasks[idx]
        dst = sim.dst[idx]
        plan = arrange(sim.run[:, dst], sim.earliest_free(dst, t), sim.pending_tasks(dst, t) + [task])
        if plan.infeasible:
            sim.record("no_feasible_destination", t, dst, plan.infeasible)
        sim.commit(dst, plan, t)
