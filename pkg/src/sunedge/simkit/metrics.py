"""Aggregate metrics for a finished run."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..energy import LifetimeModel, lifetime_estimate
from .engine import SimResult

PSD_KEYS = ("ground", "sunlit", "shadowed")


@dataclass(frozen=True)
class TaskRecord:
    id: int
    src: int
    dst: int
    arrival: int
    offload_finish: float | None
    start: int | None
    completion: float
    deadline: int

    @property
    def met(self) -> bool:
        return self.completion <= self.deadline


@dataclass
class MetricsReport:
    strategy: str
    max_dod: np.ndarray  # per satellite
    avg_dod: np.ndarray
    lifetime_years: np.ndarray
    lifetime_degenerate: np.ndarray
    tasks: list[TaskRecord]
    psd: dict[str, float]
    brownouts: int
    events: dict[str, int] = field(default_factory=dict)

    @property
    def global_max_dod(self) -> float:
        return float(self.max_dod.max()) if self.max_dod.size else 0.0

    @property
    def average_dod(self) -> float:
        return float(self.avg_dod.mean()) if self.avg_dod.size else 0.0

    @property
    def miss_rate(self) -> float:
        if not self.tasks:
            return 0.0
        return sum(not r.met for r in self.tasks) / len(self.tasks)

    @property
    def completion_times(self) -> np.ndarray:
        """Completion minus arrival per task, in slots (inf if never)."""
        return np.array([r.completion - r.arrival for r in self.tasks], dtype=float)

    @property
    def min_lifetime(self) -> float:
        return float(self.lifetime_years.min())

    @property
    def mean_lifetime(self) -> float:
        return float(self.lifetime_years.mean())

    def summary(self) -> dict:
        ct = self.completion_times
        finite = ct[np.isfinite(ct)]
        q = (lambda p: float(np.percentile(finite, p))) if finite.size else (lambda p: None)
        return {
            "strategy": self.strategy,
            "num_satellites": int(self.max_dod.size),
            "num_tasks": len(self.tasks),
            "global_max_dod": self.global_max_dod,
            "average_dod": self.average_dod,
            "deadline_miss_rate": self.miss_rate,
            "completion_time_slots": {"p50": q(50), "p90": q(90), "p99": q(99),
                                      "max": q(100), "unfinished": int(ct.size - finite.size)},
            "psd_percent": dict(self.psd),
            "lifetime_years": {"min": self.min_lifetime, "mean": self.mean_lifetime,
                               "degenerate_satellites": int(self.lifetime_degenerate.sum())},
            "brownouts": self.brownouts,
            "events": dict(sorted(self.events.items())),
        }


def task_records(result: SimResult) -> list[TaskRecord]:
    inst = result.instance
    out = []
    for i, k in enumerate(inst.tasks):
        d = int(result.solution.dst[i])
        if d >= inst.num_sats:
            fin = result.ground_finish.get(i, math.inf)
            out.append(TaskRecord(k.id, k.src, d, k.arrival, None if math.isinf(fin) else fin,
                                  None, fin, k.deadline))
        else:
            t_of = result.t_of[i]
            out.append(TaskRecord(k.id, k.src, d, k.arrival, None if t_of is None else float(t_of),
                                  result.solution.start[i], result.completion(i), k.deadline))
    return out


def decision_shares(result: SimResult) -> dict[str, float]:
    """Percentage of tasks sent to ground, processed wholly in sunlight, or
    processed (at least partly) in shadow.  Unprocessed satellite tasks count
    as shadowed."""
    inst = result.instance
    n = len(inst.tasks)
    if n == 0:
        return {k: 0.0 for k in PSD_KEYS}
    counts = Counter()
    for i, k in enumerate(inst.tasks):
        d = result.solution.dst[i]
        b = result.solution.start[i]
        if d >= inst.num_sats:
            counts["ground"] += 1
        elif b is not None and b + k.t_cp <= inst.horizon and inst.sun[b:b + k.t_cp, d].all():
            counts["sunlit"] += 1
        else:
            counts["shadowed"] += 1
    return {k: 100.0 * counts[k] / n for k in PSD_KEYS}


def compute_metrics(result: SimResult, model: LifetimeModel | None = None) -> MetricsReport:
    inst = result.instance
    dod = result.dod
    if model is None:
        model = LifetimeModel.calibrated(inst.cycle_slots * inst.dt)
    lifetimes = [lifetime_estimate(dod[:, s], model, inst.cycle_slots) for s in range(inst.num_sats)]
    kinds = Counter(e.kind for e in result.events)
    return MetricsReport(
        strategy=result.strategy,
        max_dod=dod.max(axis=0) if dod.size else np.zeros(inst.num_sats),
        avg_dod=dod.mean(axis=0) if dod.size else np.zeros(inst.num_sats),
        lifetime_years=np.array([e.years for e in lifetimes]),
        lifetime_degenerate=np.array([e.degenerate for e in lifetimes]),
        tasks=task_records(result),
        psd=decision_shares(result),
        brownouts=kinds.get("brownout", 0),
        events=dict(kinds),
    )
