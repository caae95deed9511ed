"""Per-slot network graph, deterministic routing and fair-share transfers."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

ISL_CAPACITY = 1e9  # bits/s
GSL_CAPACITY = 100e6  # bits/s
ISL_COUNT = 4


class Unreachable(Exception):
    """No path between two nodes in the current snapshot."""


class StalePath(Exception):
    """A flow's stored path uses an edge missing from the snapshot."""


@dataclass
class TopologySnapshot:
    """Undirected graph of one slot; node ids are ints, ground stations last."""

    slot: int
    num_sats: int
    num_stations: int
    capacity: dict[tuple[int, int], float]
    isl_count: int = ISL_COUNT
    _adj: dict[int, list[int]] = field(default=None, repr=False)

    def __post_init__(self):
        adj = defaultdict(set)
        for i, j in self.capacity:
            adj[i].add(j)
            adj[j].add(i)
        self._adj = {k: sorted(v) for k, v in adj.items()}

    @property
    def nodes(self) -> range:
        return range(self.num_sats + self.num_stations)

    def is_station(self, node: int) -> bool:
        return node >= self.num_sats

    def neighbors(self, node: int) -> list[int]:
        return self._adj.get(node, [])

    def has_edge(self, i: int, j: int) -> bool:
        return i == j or (min(i, j), max(i, j)) in self.capacity

    def cap(self, i: int, j: int) -> float:
        if i == j:
            return float("inf")
        return self.capacity[(min(i, j), max(i, j))]


def build_snapshot(slot: int, num_sats: int, isl: Iterable[tuple[int, int]],
                   gs_visible_row: np.ndarray, isl_capacity: float = ISL_CAPACITY,
                   gsl_capacity: float = GSL_CAPACITY, isl_count: int = ISL_COUNT) -> TopologySnapshot:
    """``gs_visible_row`` is the (S, G) visibility matrix of this slot."""
    vis = np.asarray(gs_visible_row, dtype=bool).reshape(num_sats, -1)
    capacity = {(min(i, j), max(i, j)): isl_capacity for i, j in isl}
    for s, g in zip(*np.nonzero(vis)):
        capacity[(int(s), num_sats + int(g))] = gsl_capacity
    return TopologySnapshot(slot, num_sats, vis.shape[1], capacity, isl_count)


def gsl_indicator(gs_visible_row) -> np.ndarray:
    """``1 - prod_g (1 - Vis[s, g])`` for every satellite of one slot."""
    vis = np.asarray(gs_visible_row, dtype=bool)
    return 1 - np.prod(1 - vis.astype(int), axis=-1)


def route(topo: TopologySnapshot, i: int, j: int, transit_stations: bool = False) -> list[int]:
    """Minimum-hop path from ``i`` to ``j``.

    Among equal-length paths the lexicographically smallest node sequence is
    returned.  Ground stations are only endpoints unless ``transit_stations``.
    """
    if i == j:
        return [i]
    # hop distance to j, searched backwards
    dist = {j: 0}
    queue = deque([j])
    while queue:
        u = queue.popleft()
        if u != j and topo.is_station(u) and not transit_stations:
            continue
        for v in topo.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    if i not in dist:
        raise Unreachable(f"no path {i} -> {j} at slot {topo.slot}")
    path = [i]
    u = i
    while u != j:
        u = min(v for v in topo.neighbors(u)
                if dist.get(v, -1) == dist[u] - 1
                and (v == j or transit_stations or not topo.is_station(v)))
        path.append(u)
    return path


@dataclass
class FlowState:
    task_id: int
    size: float  # bits
    path: list[int]
    bytes_sent: float = 0.0  # cumulative bits delivered
    finished_slot: int | None = None
    history: list[tuple[int, float]] = field(default_factory=list)

    @property
    def done(self) -> bool:
        return self.finished_slot is not None

    def links(self):
        return [(self.path[n], self.path[n + 1]) for n in range(len(self.path) - 1)]


def link_shares(flows: Iterable[FlowState], topo: TopologySnapshot, fairness: str = "equal"
                ) -> dict[int, float]:
    """Per-flow rate (bits/s) for one slot.

    ``equal`` divides each link evenly among every flow crossing it and gives
    a flow the minimum over its path.  ``maxmin`` runs progressive filling so
    capacity left by flows bottlenecked elsewhere is redistributed.
    """
    active = [f for f in flows if not f.done and len(f.path) > 1]
    users = defaultdict(list)
    for f in active:
        for i, j in f.links():
            if not topo.has_edge(i, j):
                raise StalePath(f"task {f.task_id}: edge {(i, j)} absent at slot {topo.slot}")
            users[(i, j)].append(f.task_id)
    if fairness == "equal":
        return {f.task_id: min(topo.cap(i, j) / len(users[(i, j)]) for i, j in f.links())
                for f in active}
    if fairness != "maxmin":
        raise ValueError(f"unknown fairness mode {fairness!r}")
    rate = {}
    remaining = {link: topo.cap(*link) for link in users}
    unfrozen = {link: set(ids) for link, ids in users.items()}
    while len(rate) < len(active):
        link = min((lk for lk in unfrozen if unfrozen[lk]),
                   key=lambda lk: (remaining[lk] / len(unfrozen[lk]), lk))
        share = remaining[link] / len(unfrozen[link])
        for fid in sorted(unfrozen[link]):
            rate[fid] = share
            flow = next(f for f in active if f.task_id == fid)
            for lk in flow.links():
                remaining[lk] -= share
                unfrozen[lk].discard(fid)
    return rate


def advance_flows(active: Iterable[FlowState], topo: TopologySnapshot, dt: float,
                  fairness: str = "equal") -> list[FlowState]:
    """Move every unfinished flow forward by one slot; returns flows finishing now."""
    active = list(active)
    rates = link_shares(active, topo, fairness)
    finished = []
    for f in active:
        if f.done or f.task_id not in rates:
            continue
        sz = rates[f.task_id] * dt
        f.history.append((topo.slot, sz))
        f.bytes_sent = min(f.size, f.bytes_sent + sz)
        if f.bytes_sent >= f.size * (1 - 1e-12):
            f.bytes_sent = f.size
            f.finished_slot = topo.slot
            finished.append(f)
    return finished


def local_offload_shortcut(arrival_slot: int) -> int:
    """A task processed where it was captured finishes offloading on arrival."""
    return arrival_slot


def transfer_slots(size_bits: float, capacity: float, dt: float) -> float:
    """Duration of a single-hop transfer in (fractional) slots."""
    return size_bits / (capacity * dt)
