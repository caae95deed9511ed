"""Slot-by-slot execution of a strategy over an :class:`SbeoInstance`."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .. import nettopo
from ..sbeo import SbeoInstance, SbeoSolution
from ..scheduler import query_energy, sunlit_run_lengths


@dataclass(frozen=True)
class Event:
    kind: str  # infeasible_deadline | no_feasible_destination | brownout
    slot: int
    sat: int | None
    task_ids: tuple[int, ...] = ()


@dataclass
class SimResult:
    instance: SbeoInstance
    strategy: str
    solution: SbeoSolution
    t_of: list[int | None]
    ground_finish: dict[int, float]
    levels: np.ndarray  # (T + 1, S) joules
    events: list[Event] = field(default_factory=list)

    @property
    def dod(self) -> np.ndarray:
        """(T, S) depth of discharge after every slot."""
        return 1.0 - self.levels[1:] / self.instance.power.capacity_j

    def completion(self, idx: int) -> float:
        """End of processing (or ground delivery) in slot units; inf if never."""
        task = self.instance.tasks[idx]
        d = self.solution.dst[idx]
        if d >= self.instance.num_sats:
            return self.ground_finish.get(idx, math.inf)
        b = self.solution.start[idx]
        if b is None or b + task.t_cp > self.instance.horizon:
            return math.inf
        return float(b + task.t_cp)

    def flagged(self, *kinds: str) -> bool:
        kinds = kinds or ("infeasible_deadline", "no_feasible_destination")
        return any(e.kind in kinds for e in self.events)


class Simulation:
    """Mutable run state plus the primitives strategies act through."""

    def __init__(self, instance: SbeoInstance, strategy):
        self.instance = instance
        self.strategy = strategy
        n_t, n_s = instance.horizon, instance.num_sats
        self.run = sunlit_run_lengths(instance.sun)
        self.sun_cumsum = np.vstack([np.zeros((1, n_s), np.int64),
                                     np.cumsum(instance.sun_forecast, axis=0, dtype=np.int64)])
        cap = instance.power.capacity_j
        self.levels = np.empty((n_t + 1, n_s))
        self.levels[0] = cap
        self.battery = self.levels[0].copy()
        self.t_gs = np.zeros(instance.num_stations)
        k = len(instance.tasks)
        self.dst: list[int | None] = [None] * k
        self.start: list[int | None] = [None] * k
        self.t_of: list[int | None] = [None] * k
        self.ground_finish: dict[int, float] = {}
        self.index = {task.id: i for i, task in enumerate(instance.tasks)}
        self.active: dict[int, list[int]] = defaultdict(list)  # unfinished tasks per satellite
        self.flows: dict[int, nettopo.FlowState] = {}
        self.occ = np.zeros((n_t, n_s), dtype=np.int64)
        self.tx = np.zeros((n_t, n_s), dtype=bool)
        self.events: list[Event] = []
        self.topo = instance.isl_topology()
        self._routes: dict[tuple[int, int], list[int]] = {}
        self._neighbors = {s: [v for v in self.topo.neighbors(s)] for s in range(n_s)}
        self.gsl_on = instance.gsl_on() if instance.gsl_mode == "connectivity" else self.tx

    # -- queries ----------------------------------------------------------
    def isl_neighbors(self, s: int) -> list[int]:
        return self._neighbors[s]

    def _prune(self, s: int, t: int) -> list[int]:
        tasks = self.instance.tasks
        keep = [i for i in self.active[s]
                if self.start[i] is None or self.start[i] + tasks[i].t_cp > t]
        self.active[s] = keep
        return keep

    def pending_tasks(self, s: int, t: int) -> list:
        """Tasks delivered to ``s`` whose processing has not begun."""
        tasks = self.instance.tasks
        return [tasks[i] for i in self._prune(s, t)
                if self.t_of[i] is not None and self.t_of[i] <= t
                and (self.start[i] is None or self.start[i] >= t)]

    def earliest_free(self, s: int, t: int) -> int:
        """First slot after any task already running on ``s``."""
        tasks = self.instance.tasks
        ends = [self.start[i] + tasks[i].t_cp for i in self._prune(s, t)
                if self.start[i] is not None and self.start[i] < t]
        return max([t] + ends)

    def busy_until(self, s: int, t: int) -> int:
        """First slot after every task committed on ``s`` (FIFO tail)."""
        tasks = self.instance.tasks
        ends = [self.start[i] + tasks[i].t_cp for i in self._prune(s, t) if self.start[i] is not None]
        return max([t] + ends)

    def queued_slots(self, s: int, t: int) -> int:
        tasks = self.instance.tasks
        total = 0
        for i in self._prune(s, t):
            b = self.start[i]
            total += tasks[i].t_cp if b is None or b >= t else b + tasks[i].t_cp - t
        return total

    def energy_outlook(self, s: int, t: int) -> float:
        p = self.instance.power
        return query_energy(self.sun_cumsum, s, t, self.instance.cycle_slots, self.battery[s],
                            self.queued_slots(s, t), p.p_solar, p.p_cp, self.instance.dt)

    def nearest_available_station(self, src: int, t: int) -> int | None:
        inst = self.instance
        visible = np.flatnonzero(inst.gs_visible[t, src])
        if visible.size == 0:
            return None

        def key(g):
            dist = 0.0 if inst.gs_range is None else float(inst.gs_range[t, src, g])
            return (max(self.t_gs[g], float(t)), dist, int(g))

        return int(min(visible, key=key))

    # -- actions ----------------------------------------------------------
    def record(self, kind: str, t: int, sat: int | None, task_ids=()) -> None:
        self.events.append(Event(kind, t, sat, tuple(task_ids)))

    def send_local(self, idx: int) -> None:
        task = self.instance.tasks[idx]
        self.dst[idx] = task.src
        self.t_of[idx] = nettopo.local_offload_shortcut(task.arrival)
        self.active[task.src].append(idx)

    def send_to_satellite(self, idx: int, dst: int) -> None:
        task = self.instance.tasks[idx]
        key = (task.src, dst)
        if key not in self._routes:
            self._routes[key] = nettopo.route(self.topo, task.src, dst)
        self.dst[idx] = dst
        self.active[dst].append(idx)
        self.flows[idx] = nettopo.FlowState(task.id, task.size, self._routes[key])

    def send_to_ground(self, idx: int, g: int, begin: float | None) -> None:
        inst = self.instance
        task = inst.tasks[idx]
        self.dst[idx] = inst.num_sats + g
        if begin is None:
            self.ground_finish[idx] = math.inf
            return
        end = begin + inst.ground_transfer_slots(task.size)
        self.t_gs[g] = end
        self.ground_finish[idx] = end
        self.t_of[idx] = math.ceil(end) - 1 if end > begin else int(begin)
        self.tx[int(math.floor(begin)):min(int(math.ceil(end)), inst.horizon), task.src] = True

    def commit_start(self, idx: int, s: int, b: int) -> None:
        cp = self.instance.tasks[idx].t_cp
        old = self.start[idx]
        if old is not None:
            self.occ[old:old + cp, s] -= 1
        self.start[idx] = b
        self.occ[b:b + cp, s] += 1

    def commit(self, s: int, plan, t: int) -> None:
        for task_id, b in plan.start.items():
            idx = self.index[task_id]
            if self.start[idx] != b:
                self.commit_start(idx, s, b)

    # -- main loop --------------------------------------------------------
    def run_all(self) -> SimResult:
        inst = self.instance
        arrivals = defaultdict(list)
        for idx, task in enumerate(inst.tasks):
            arrivals[task.arrival].append(idx)
        cycle = max(1, int(inst.cycle_slots))
        p = inst.power
        base = (inst.sun * p.p_solar - p.p_basic - p.isl_count * p.p_isl) * inst.dt
        cap = p.capacity_j
        for t in range(inst.horizon):
            if t % cycle == 0:
                self.strategy.begin_epoch(self, t)
            for idx in arrivals.get(t, ()):
                self.strategy.dispatch(self, idx, t)
            if self.flows:
                snap = nettopo.TopologySnapshot(t, self.topo.num_sats, 0, self.topo.capacity,
                                                self.topo.isl_count)
                done = nettopo.advance_flows(self.flows.values(), snap, inst.dt, inst.fairness)
                for flow in done:
                    idx = self.index[flow.task_id]
                    del self.flows[idx]
                    self.t_of[idx] = t
                for flow in sorted(done, key=lambda f: f.task_id):
                    self.strategy.on_delivered(self, self.index[flow.task_id], t)
            net = base[t] - self.occ[t] * (p.p_cp * inst.dt) - self.gsl_on[t] * (p.p_gsl * inst.dt)
            raw = np.minimum(self.battery + net, cap)
            if (raw < 0).any():
                for s in np.flatnonzero(raw < 0):
                    self.record("brownout", t, int(s))
                raw = np.maximum(raw, 0.0)
            self.battery = raw
            self.levels[t + 1] = raw
        solution = SbeoSolution([d if d is not None else inst.tasks[i].src
                                 for i, d in enumerate(self.dst)], list(self.start))
        return SimResult(inst, getattr(self.strategy, "name", type(self.strategy).__name__),
                         solution, list(self.t_of), dict(self.ground_finish), self.levels, self.events)


def simulate(instance: SbeoInstance, strategy) -> SimResult:
    """Run ``strategy`` (an object or a strategy name) over ``instance``."""
    if isinstance(strategy, str):
        from ..baselines import make_strategy
        strategy = make_strategy(strategy)
    return Simulation(instance, strategy).run_all()
