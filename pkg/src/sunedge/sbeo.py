"""Battery-energy optimisation problem: instances, constraints, objective, oracle.

An :class:`SbeoInstance` is a fully precomputed world: per-slot sunlight and
ground visibility, a static ISL graph, power parameters and the task set.
Node ids: satellites ``0..S-1``, ground station ``g`` is ``S + g``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import nettopo
from .energy import PowerParams, simulate_battery


class TooLarge(Exception):
    """The brute-force search space exceeds the configured guard."""


class Infeasible(Exception):
    """No candidate solution satisfies every constraint."""


@dataclass(frozen=True)
class Task:
    """Arrival, compute time and deadline are in slots; size is in bits.

    Processing occupies slots ``start .. start + t_cp - 1`` and must end by the
    deadline, i.e. ``start + t_cp <= deadline``.
    """

    id: int
    src: int
    size: float
    arrival: int
    t_cp: int
    deadline: int

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError(f"task {self.id}: size must be positive")
        if self.t_cp < 1:
            raise ValueError(f"task {self.id}: t_cp must be >= 1")
        if self.arrival + self.t_cp > self.deadline:
            raise ValueError(f"task {self.id}: arrival + t_cp exceeds deadline")

    @property
    def latest_start(self) -> int:
        return self.deadline - self.t_cp


@dataclass
class SbeoInstance:
    num_sats: int
    num_stations: int
    dt: float
    sun: np.ndarray  # (T, S) bool
    gs_visible: np.ndarray  # (T, S, G) bool
    isl: list[tuple[int, int]]
    orbit_of: np.ndarray  # (S,) orbit index
    tasks: list[Task]
    power: PowerParams = field(default_factory=PowerParams)
    cycle_slots: int | None = None
    isl_capacity: float = nettopo.ISL_CAPACITY
    gsl_capacity: float = nettopo.GSL_CAPACITY
    gsl_mode: str = "connectivity"
    fairness: str = "equal"
    gs_range: np.ndarray | None = None  # (T, S, G) great-circle distance, tie-breaks only
    sun_forecast: np.ndarray | None = None  # (T', S), T' >= T; sunlight known beyond the horizon

    def __post_init__(self):
        self.sun = np.asarray(self.sun, dtype=bool)
        self.gs_visible = np.asarray(self.gs_visible, dtype=bool).reshape(
            self.sun.shape[0], self.num_sats, self.num_stations)
        self.orbit_of = np.asarray(self.orbit_of, dtype=int)
        self.isl = [(int(i), int(j)) for i, j in self.isl]
        self.tasks = sorted(self.tasks, key=lambda k: k.id)
        if self.sun.shape[1] != self.num_sats:
            raise ValueError("sun indicator width must equal num_sats")
        if self.sun_forecast is None:
            self.sun_forecast = self.sun
        else:
            self.sun_forecast = np.asarray(self.sun_forecast, dtype=bool)
            n_t = self.sun.shape[0]
            if (self.sun_forecast.shape[0] < n_t
                    or not np.array_equal(self.sun_forecast[:n_t], self.sun)):
                raise ValueError("sun_forecast must extend the sun indicator")
        if self.cycle_slots is None:
            self.cycle_slots = self.horizon
        if self.gsl_mode not in ("connectivity", "transmit"):
            raise ValueError(f"unknown gsl_mode {self.gsl_mode!r}")
        for k in self.tasks:
            if not 0 <= k.src < self.num_sats:
                raise ValueError(f"task {k.id}: unknown source {k.src}")
            if k.deadline > self.horizon:
                raise ValueError(f"task {k.id}: deadline {k.deadline} beyond horizon {self.horizon}")
        self._isl_topo = None

    @property
    def horizon(self) -> int:
        return self.sun.shape[0]

    @property
    def num_orbits(self) -> int:
        return int(self.orbit_of.max()) + 1 if self.num_sats else 0

    @property
    def nodes(self) -> range:
        return range(self.num_sats + self.num_stations)

    def is_station(self, node: int) -> bool:
        return node >= self.num_sats

    def isl_topology(self) -> nettopo.TopologySnapshot:
        """ISL-only snapshot.  Ground stations never relay, so satellite to
        satellite routes are the same in every slot."""
        if self._isl_topo is None:
            self._isl_topo = nettopo.build_snapshot(
                0, self.num_sats, self.isl, np.zeros((self.num_sats, 0), bool),
                self.isl_capacity, self.gsl_capacity, self.power.isl_count)
        return self._isl_topo

    def snapshot(self, t: int) -> nettopo.TopologySnapshot:
        return nettopo.build_snapshot(t, self.num_sats, self.isl, self.gs_visible[t],
                                      self.isl_capacity, self.gsl_capacity, self.power.isl_count)

    def gsl_on(self) -> np.ndarray:
        return nettopo.gsl_indicator(self.gs_visible).astype(bool)

    def ground_transfer_slots(self, size: float) -> float:
        return nettopo.transfer_slots(size, self.gsl_capacity, self.dt)

    def first_visible(self, sat: int, station: int, start: int) -> int | None:
        col = self.gs_visible[start:, sat, station]
        hit = np.flatnonzero(col)
        return int(start + hit[0]) if hit.size else None

    # serialisation -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "num_sats": self.num_sats,
            "num_stations": self.num_stations,
            "dt": self.dt,
            "sun": self.sun.astype(int).tolist(),
            "gs_visible": self.gs_visible.astype(int).tolist(),
            "isl": [list(e) for e in self.isl],
            "orbit_of": self.orbit_of.tolist(),
            "tasks": [vars(k).copy() for k in self.tasks],
            "power": vars(self.power).copy(),
            "cycle_slots": self.cycle_slots,
            "isl_capacity": self.isl_capacity,
            "gsl_capacity": self.gsl_capacity,
            "gsl_mode": self.gsl_mode,
            "fairness": self.fairness,
            "gs_range": None if self.gs_range is None else np.asarray(self.gs_range).tolist(),
            "sun_forecast": self.sun_forecast[self.horizon:].astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SbeoInstance":
        d = dict(d)
        d["tasks"] = [Task(**k) for k in d["tasks"]]
        d["power"] = PowerParams(**d["power"])
        d["isl"] = [tuple(e) for e in d["isl"]]
        n_t = len(d["sun"])
        d["gs_visible"] = np.asarray(d["gs_visible"], dtype=bool).reshape(
            n_t, d["num_sats"], d["num_stations"])
        extra = np.asarray(d.pop("sun_forecast", None) or [], dtype=bool).reshape(-1, d["num_sats"])
        d["sun_forecast"] = np.vstack([np.asarray(d["sun"], dtype=bool).reshape(n_t, -1), extra])
        if d.get("gs_range") is not None:
            d["gs_range"] = np.asarray(d["gs_range"], dtype=float)
        return cls(**d)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "SbeoInstance":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "SbeoInstance":
        return cls.loads(Path(path).read_text())


@dataclass
class SbeoSolution:
    """``dst[k]`` is a node id; ``start[k]`` is the first processing slot, or
    ``None`` for ground destinations."""

    dst: list[int]
    start: list[int | None]

    def task_sets(self, instance: SbeoInstance) -> dict[int, list[int]]:
        out = {s: [] for s in range(instance.num_sats)}
        for idx, d in enumerate(self.dst):
            if d < instance.num_sats:
                out[d].append(instance.tasks[idx].id)
        return out

    def processing_matrix(self, instance: SbeoInstance) -> np.ndarray:
        """Dense ``x[k, t]``, shape (K, T)."""
        x = np.zeros((len(instance.tasks), instance.horizon), dtype=bool)
        for idx, (task, d, b) in enumerate(zip(instance.tasks, self.dst, self.start)):
            if d < instance.num_sats and b is not None:
                x[idx, max(b, 0):max(0, min(b + task.t_cp, instance.horizon))] = True
        return x

    def key(self) -> tuple:
        return tuple(self.dst) + tuple(-1 if b is None else b for b in self.start)


@dataclass(frozen=True)
class Violation:
    constraint: str  # single_task | offload_order | deadline | horizon | destination
    task_ids: tuple[int, ...]
    slot: int | None = None
    sat: int | None = None
    detail: str = ""


@dataclass
class OffloadReplay:
    """Offload completion per task index.

    ``t_of`` is the slot in which the last bit arrives (``None`` if it never
    does within the horizon).  Ground deliveries also carry the fractional
    finish time of the serial downlink queue, which is their completion.
    """

    t_of: list[int | None]
    ground_finish: dict[int, float]
    ground_start: dict[int, float]
    flows: dict[int, nettopo.FlowState]


def replay_offloads(instance: SbeoInstance, dst) -> OffloadReplay:
    tasks = instance.tasks
    n = instance.num_sats
    t_of: list[int | None] = [None] * len(tasks)
    ground_finish, ground_start = {}, {}
    flows: dict[int, nettopo.FlowState] = {}
    topo = instance.isl_topology()
    free = {}
    order = sorted(range(len(tasks)), key=lambda i: (tasks[i].arrival, tasks[i].id))
    for idx in order:
        k, d = tasks[idx], dst[idx]
        if d == k.src:
            t_of[idx] = nettopo.local_offload_shortcut(k.arrival)
        elif d >= n:
            g = d - n
            vis = instance.first_visible(k.src, g, k.arrival)
            if vis is None:
                ground_finish[idx] = math.inf
                continue
            begin = max(free.get(g, 0.0), float(vis))
            end = begin + instance.ground_transfer_slots(k.size)
            free[g] = end
            ground_start[idx], ground_finish[idx] = begin, end
            t_of[idx] = math.ceil(end) - 1 if end > begin else int(begin)
        else:
            flows[idx] = nettopo.FlowState(k.id, k.size, nettopo.route(topo, k.src, d))
    if flows:
        by_arrival = sorted(flows, key=lambda i: tasks[i].arrival)
        t0 = tasks[by_arrival[0]].arrival
        nxt = 0
        active: list[int] = []
        for t in range(t0, instance.horizon):
            while nxt < len(by_arrival) and tasks[by_arrival[nxt]].arrival <= t:
                active.append(by_arrival[nxt])
                nxt += 1
            if not active:
                if nxt >= len(by_arrival):
                    break
                continue
            snap = nettopo.TopologySnapshot(t, topo.num_sats, 0, topo.capacity, topo.isl_count)
            nettopo.advance_flows([flows[i] for i in active], snap, instance.dt, instance.fairness)
            for i in active:
                if flows[i].done:
                    t_of[i] = flows[i].finished_slot
            active = [i for i in active if not flows[i].done]
    return OffloadReplay(t_of, ground_finish, ground_start, flows)


def check_feasible(instance: SbeoInstance, solution: SbeoSolution,
                   replay: OffloadReplay | None = None) -> list[Violation]:
    """All constraint violations; an empty list means feasible."""
    tasks = instance.tasks
    n = instance.num_sats
    out: list[Violation] = []
    if len(solution.dst) != len(tasks) or len(solution.start) != len(tasks):
        raise ValueError("solution must cover every task")
    for k, d in zip(tasks, solution.dst):
        if not 0 <= d < n + instance.num_stations:
            out.append(Violation("destination", (k.id,), detail=f"unknown node {d}"))
    if out:
        return out
    replay = replay or replay_offloads(instance, solution.dst)

    occupancy: dict[tuple[int, int], list[int]] = {}
    for idx, (k, d, b) in enumerate(zip(tasks, solution.dst, solution.start)):
        if d >= n:
            fin = replay.ground_finish[idx]
            if fin > k.deadline:
                out.append(Violation("deadline", (k.id,), detail=f"ground delivery ends {fin:.3f}"))
            continue
        if b is None:
            out.append(Violation("offload_order", (k.id,), sat=d, detail="never processed"))
            continue
        if b < 0 or b + k.t_cp > instance.horizon:
            out.append(Violation("horizon", (k.id,), slot=b, sat=d))
        for t in range(b, b + k.t_cp):
            occupancy.setdefault((d, t), []).append(k.id)
        tof = replay.t_of[idx]
        if tof is None or tof > b:
            out.append(Violation("offload_order", (k.id,), slot=b, sat=d,
                                 detail=f"offload finishes at {tof}"))
        if b + k.t_cp > k.deadline:
            out.append(Violation("deadline", (k.id,), slot=b + k.t_cp - 1, sat=d,
                                 detail=f"ends {b + k.t_cp} > deadline {k.deadline}"))
    for (s, t), ids in sorted(occupancy.items()):
        if len(ids) > 1:
            out.append(Violation("single_task", tuple(sorted(ids)), slot=t, sat=s))
    return out


def occupancy_matrix(instance: SbeoInstance, solution: SbeoSolution) -> np.ndarray:
    """Tasks in progress per (slot, satellite), shape (T, S)."""
    occ = np.zeros((instance.horizon, instance.num_sats), dtype=int)
    for k, d, b in zip(instance.tasks, solution.dst, solution.start):
        if d < instance.num_sats and b is not None:
            occ[max(b, 0):max(0, min(b + k.t_cp, instance.horizon)), d] += 1
    return occ


def transmit_matrix(instance: SbeoInstance, replay: OffloadReplay, dst) -> np.ndarray:
    """Slots in which a satellite is downlinking to a station, shape (T, S)."""
    tx = np.zeros((instance.horizon, instance.num_sats), dtype=bool)
    for idx, begin in replay.ground_start.items():
        end = replay.ground_finish[idx]
        lo, hi = int(math.floor(begin)), int(math.ceil(end))
        tx[lo:min(hi, instance.horizon), instance.tasks[idx].src] = True
    return tx


def battery_trace(instance: SbeoInstance, solution: SbeoSolution, replay: OffloadReplay | None = None):
    occ = occupancy_matrix(instance, solution)
    if instance.gsl_mode == "connectivity":
        gsl = instance.gsl_on()
    else:
        replay = replay or replay_offloads(instance, solution.dst)
        gsl = transmit_matrix(instance, replay, solution.dst)
    return simulate_battery(instance.sun, occ, gsl, instance.power, instance.dt)


def objective(instance: SbeoInstance, solution: SbeoSolution) -> float:
    """Largest depth of discharge over all satellites and slots."""
    trace = battery_trace(instance, solution)
    return float(trace.dod[1:].max(initial=0.0))


# --------------------------------------------------------------------------
# exhaustive oracle

SEARCH_GUARD = 10**7
_TIE = 1e-12


def _start_range(instance, task, lower):
    return range(max(lower, task.arrival), task.latest_start + 1)


def search_space_size(instance: SbeoInstance) -> int:
    total = 1
    for k in instance.tasks:
        per = instance.num_stations + len(_start_range(instance, k, k.arrival)) * instance.num_sats
        total *= max(per, 1)
    return total


def _column_max_dod(instance, sat, occ_rows, gsl_col):
    """Max DoD of one satellite for each candidate occupancy row, (C, T) -> (C,)."""
    p = instance.power
    sun = instance.sun[:, sat].astype(float)
    base = (sun * p.p_solar - p.p_basic - p.isl_count * p.p_isl - gsl_col * p.p_gsl) * instance.dt
    net = base[None, :] - occ_rows * (p.p_cp * instance.dt)
    cap = p.capacity_j
    level = np.full(occ_rows.shape[0], cap)
    lowest = level.copy()
    for t in range(instance.horizon):
        level = np.maximum(np.minimum(level + net[:, t], cap), 0.0)
        np.minimum(lowest, level, out=lowest)
    return 1.0 - lowest / cap


def _sat_combos(instance, sat, members, replay):
    """Feasible start combinations for the tasks placed on ``sat``.

    Yields (starts, occupancy row) in lexicographic order of ``starts``.
    """
    tasks = instance.tasks
    ranges = []
    for idx in members:
        tof = replay.t_of[idx]
        if tof is None:
            return [], np.zeros((0, instance.horizon))
        ranges.append(_start_range(instance, tasks[idx], tof))
    combos, rows = [], []
    for starts in itertools.product(*ranges):
        row = np.zeros(instance.horizon)
        ok = True
        for idx, b in zip(members, starts):
            seg = row[b:b + tasks[idx].t_cp]
            if seg.any():
                ok = False
                break
            seg[:] = 1
        if ok:
            combos.append(starts)
            rows.append(row)
    return combos, np.array(rows).reshape(len(rows), instance.horizon)


def _gsl_matrix(instance, replay, dst):
    if instance.gsl_mode == "connectivity":
        return instance.gsl_on().astype(float)
    return transmit_matrix(instance, replay, dst).astype(float)


def _evaluate_dst(instance, dst):
    """Best objective for a fixed destination vector, or None if infeasible."""
    tasks = instance.tasks
    replay = replay_offloads(instance, dst)
    for idx, d in enumerate(dst):
        if d >= instance.num_sats and replay.ground_finish[idx] > tasks[idx].deadline:
            return None
    gsl = _gsl_matrix(instance, replay, dst)
    per_sat = {}
    value = 0.0
    for s in range(instance.num_sats):
        members = [i for i, d in enumerate(dst) if d == s]
        if members:
            combos, rows = _sat_combos(instance, s, members, replay)
            if not combos:
                return None
        else:
            combos, rows = [()], np.zeros((1, instance.horizon))
        f = _column_max_dod(instance, s, rows, gsl[:, s])
        per_sat[s] = (members, combos, f)
        value = max(value, float(f.min()))
    return value, per_sat


def brute_force_solve(instance: SbeoInstance, guard: int = SEARCH_GUARD) -> SbeoSolution:
    """Exact minimiser of :func:`objective` by enumeration.

    Destinations range over every node, start slots over
    ``[offload finish, deadline - t_cp]``.  Per-satellite battery traces only
    depend on the tasks placed there, so each destination vector is solved
    satellite by satellite.  Ties go to the lexicographically smallest
    ``(dst..., start...)`` vector.
    """
    size = search_space_size(instance)
    if size > guard:
        raise TooLarge(f"search space {size} exceeds guard {guard}")
    tasks = instance.tasks
    topo = instance.isl_topology()
    choices = []
    for k in tasks:
        opts = []
        for d in instance.nodes:
            if d < instance.num_sats and d != k.src:
                try:
                    nettopo.route(topo, k.src, d)
                except nettopo.Unreachable:
                    continue
            opts.append(d)
        choices.append(opts)

    best_val, best_dst, best_detail = math.inf, None, None
    for dst in itertools.product(*choices):
        res = _evaluate_dst(instance, list(dst))
        if res is None:
            continue
        val, per_sat = res
        if val < best_val - _TIE:
            best_val, best_dst, best_detail = val, dst, per_sat
    if best_dst is None:
        raise Infeasible("no candidate satisfies the constraints")

    start: list[int | None] = [None] * len(tasks)
    for members, combos, f in best_detail.values():
        if not members:
            continue
        pick = int(np.flatnonzero(f <= best_val + _TIE)[0])
        for idx, b in zip(members, combos[pick]):
            start[idx] = b
    return SbeoSolution(list(best_dst), start)


def exhaustive_solve(instance: SbeoInstance, guard: int = 10**5) -> SbeoSolution:
    """Literal enumeration of every (dst, start) assignment through
    :func:`check_feasible` and :func:`objective`.  Micro instances only."""
    per_task = []
    for k in instance.tasks:
        opts = [(d, None) for d in instance.nodes if d >= instance.num_sats]
        opts += [(d, b) for d in range(instance.num_sats) for b in range(0, instance.horizon - k.t_cp + 1)]
        per_task.append(opts)
    total = math.prod(len(o) for o in per_task)
    if total > guard:
        raise TooLarge(f"search space {total} exceeds guard {guard}")
    best, best_val = None, math.inf
    for combo in itertools.product(*per_task):
        sol = SbeoSolution([c[0] for c in combo], [c[1] for c in combo])
        try:
            if check_feasible(instance, sol):
                continue
        except nettopo.Unreachable:
            continue
        val = objective(instance, sol)
        if val < best_val - _TIE or (abs(val - best_val) <= _TIE and sol.key() < best.key()):
            best, best_val = sol, val
    if best is None:
        raise Infeasible("no candidate satisfies the constraints")
    return best
