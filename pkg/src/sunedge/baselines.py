"""Simplified comparison strategies.

These are stand-ins that keep the defining decision rule of each family of
published schemes and nothing more:

* ``LocalImmediate``  process where captured, FIFO, as soon as possible.
* ``IntraOrbitPipeline`` (OEC-like)  round-robin over the source orbit.
* ``GreedyPeer`` (MHSPO-like)  the source or an ISL neighbour with the most
  stored energy; no Lyapunov drift control, no sunlight prediction.
* ``GroundOnly`` (L2D2-like)  always downlink, wait for the next pass.
"""

from __future__ import annotations

import enum

import numpy as np

from .scheduler import SunlightAware


class StrategyKind(str, enum.Enum):
    SunlightAware = "SunlightAware"
    LocalImmediate = "LocalImmediate"
    IntraOrbitPipeline = "IntraOrbitPipeline"
    GreedyPeer = "GreedyPeer"
    GroundOnly = "GroundOnly"


class _Fifo:
    """Satellite-side behaviour shared by the on-board baselines."""

    def begin_epoch(self, sim, t: int) -> None:
        pass

    def on_delivered(self, sim, idx: int, t: int) -> None:
        dst = sim.dst[idx]
        sim.commit_start(idx, dst, sim.busy_until(dst, t))


class LocalImmediate(_Fifo):
    name = StrategyKind.LocalImmediate.value

    def dispatch(self, sim, idx: int, t: int) -> None:
        sim.send_local(idx)
        self.on_delivered(sim, idx, t)


class IntraOrbitPipeline(_Fifo):
    name = StrategyKind.IntraOrbitPipeline.value

    def __init__(self):
        self.next_member: dict[int, int] = {}

    def dispatch(self, sim, idx: int, t: int) -> None:
        inst = sim.instance
        src = inst.tasks[idx].src
        orbit = int(inst.orbit_of[src])
        members = np.flatnonzero(inst.orbit_of == orbit)
        pos = self.next_member.get(orbit, 0)
        self.next_member[orbit] = (pos + 1) % len(members)
        dst = int(members[pos])
        if dst == src:
            sim.send_local(idx)
            self.on_delivered(sim, idx, t)
        else:
            sim.send_to_satellite(idx, dst)


class GreedyPeer(_Fifo):
    name = StrategyKind.GreedyPeer.value

    def dispatch(self, sim, idx: int, t: int) -> None:
        src = sim.instance.tasks[idx].src
        peers = sorted(sim.isl_neighbors(src))
        # the source wins ties, then the lowest id
        best = max([src] + peers, key=lambda s: (sim.battery[s], s == src, -s))
        if best == src:
            sim.send_local(idx)
            self.on_delivered(sim, idx, t)
        else:
            sim.send_to_satellite(idx, best)


class GroundOnly:
    name = StrategyKind.GroundOnly.value

    def begin_epoch(self, sim, t: int) -> None:
        pass

    def dispatch(self, sim, idx: int, t: int) -> None:
        inst = sim.instance
        task = inst.tasks[idx]
        best = None
        for g in range(inst.num_stations):
            vis = inst.first_visible(task.src, g, t)
            if vis is None:
                continue
            begin = max(sim.t_gs[g], float(vis))
            if best is None or begin < best[0]:
                best = (begin, g)
        if best is None and inst.num_stations == 0:
            # nowhere to send it: the task stays unprocessed and counts as a miss
            sim.record("no_feasible_destination", t, task.src, (task.id,))
        elif best is None:
            sim.send_to_ground(idx, 0, None)
        else:
            sim.send_to_ground(idx, best[1], best[0])

    def on_delivered(self, sim, idx: int, t: int) -> None:
        pass


STRATEGIES = {
    StrategyKind.SunlightAware: SunlightAware,
    StrategyKind.LocalImmediate: LocalImmediate,
    StrategyKind.IntraOrbitPipeline: IntraOrbitPipeline,
    StrategyKind.GreedyPeer: GreedyPeer,
    StrategyKind.GroundOnly: GroundOnly,
}


def make_strategy(name):
    try:
        kind = StrategyKind(name)
    except ValueError:
        raise ValueError(f"unknown strategy {name!r}; choose from "
                         f"{[k.value for k in StrategyKind]}") from None
    return STRATEGIES[kind]()
