"""Satellite power budget, battery recurrence, depth of discharge and lifetime."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

WH = 3600.0  # joules per watt-hour
SECONDS_PER_YEAR = 365.25 * 86400.0


@dataclass(frozen=True)
class PowerParams:
    """Power draws in W, battery capacity in Wh."""

    p_solar: float = 120.0
    p_basic: float = 4.0
    p_isl: float = 10.0
    p_gsl: float = 16.0
    p_cp: float = 60.0
    battery_volume: float = 60.0
    isl_count: int = 4

    def __post_init__(self):
        for name in ("p_solar", "p_basic", "p_isl", "p_gsl", "p_cp"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.battery_volume <= 0:
            raise ValueError("battery_volume must be positive")

    @property
    def capacity_j(self) -> float:
        return self.battery_volume * WH

    def net_power(self, sunlit, n_processing, gsl_on):
        """Generation minus consumption (W); broadcasts over arrays."""
        return (np.asarray(sunlit, dtype=float) * self.p_solar - self.p_basic
                - self.p_cp * np.asarray(n_processing, dtype=float)
                - self.isl_count * self.p_isl
                - np.asarray(gsl_on, dtype=float) * self.p_gsl)


@dataclass(frozen=True)
class StepResult:
    battery: np.ndarray | float
    brownout: np.ndarray | bool


def battery_step(sunlit, n_processing, gsl_on, params: PowerParams, prev_b, dt: float = 1.0
                 ) -> StepResult:
    """One slot of the battery recurrence, in joules.

    Charge is capped at capacity.  A value that would go negative is clamped
    to zero and reported as a brownout; the caller decides what to do with it.
    """
    raw = params.net_power(sunlit, n_processing, gsl_on) * dt + np.asarray(prev_b, dtype=float)
    capped = np.minimum(raw, params.capacity_j)
    brown = capped < 0
    new = np.maximum(capped, 0.0)
    if new.ndim == 0:
        return StepResult(float(new), bool(brown))
    return StepResult(new, brown)


@dataclass
class BatteryTrace:
    """Remaining energy per slot; ``levels[t]`` is the level after slot ``t - 1``,
    so ``levels[0]`` is the full initial charge."""

    capacity_j: float
    levels: np.ndarray  # (T + 1, S) joules
    brownouts: list[tuple[int, int]] = field(default_factory=list)  # (slot, sat)

    @property
    def dod(self) -> np.ndarray:
        return 1.0 - self.levels / self.capacity_j

    def max_dod(self) -> np.ndarray:
        return self.dod.max(axis=0)


def simulate_battery(sunlit, n_processing, gsl_on, params: PowerParams, dt: float = 1.0
                     ) -> BatteryTrace:
    """Run the recurrence over (T, S) indicator arrays from a full battery."""
    sunlit = np.asarray(sunlit)
    n_slots, n_sats = sunlit.shape
    proc = np.broadcast_to(np.asarray(n_processing), sunlit.shape)
    gsl = np.broadcast_to(np.asarray(gsl_on), sunlit.shape)
    levels = np.empty((n_slots + 1, n_sats))
    levels[0] = params.capacity_j
    net = params.net_power(sunlit, proc, gsl) * dt
    cap = params.capacity_j
    brown = []
    for t in range(n_slots):
        raw = np.minimum(net[t] + levels[t], cap)
        if (raw < 0).any():
            brown.extend((t, int(s)) for s in np.flatnonzero(raw < 0))
            raw = np.maximum(raw, 0.0)
        levels[t + 1] = raw
    return BatteryTrace(cap, levels, brown)


def dod(trace: BatteryTrace, s: int, t: int) -> float:
    """Depth of discharge of satellite ``s`` after slot ``t``."""
    return float(1.0 - trace.levels[t + 1, s] / trace.capacity_j)


def per_task_energy(p_cp: float, t_cp: float) -> float:
    """Joules drawn by one task of ``t_cp`` seconds at ``p_cp`` watts."""
    if p_cp <= 0 or t_cp <= 0:
        raise ValueError("power and duration must be positive")
    return p_cp * t_cp


@dataclass(frozen=True)
class LifetimeModel:
    """Cycles to failure ``N(d) = a * d**-b``, one cycle per ``cycle_period_s``.

    ``min_dod`` bounds the curve: per-cycle depths below it count as ``min_dod``
    so that very shallow cycling saturates at ``N(min_dod)`` (the ceiling).
    """

    a: float
    b: float
    cycle_period_s: float
    min_dod: float = 0.05

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")
        if self.cycle_period_s <= 0:
            raise ValueError("cycle_period_s must be positive")

    @classmethod
    def calibrated(cls, cycle_period_s: float, ref_dod: float = 0.4, ref_cycles: float = 20000.0,
                   dod_step: float = 0.2, factor: float = 2.0, min_dod: float = 0.05) -> "LifetimeModel":
        """Fit the power law through ``(ref_dod, ref_cycles)`` and
        ``(ref_dod + dod_step, ref_cycles / factor)``."""
        b = math.log(factor) / math.log((ref_dod + dod_step) / ref_dod)
        a = ref_cycles * ref_dod**b
        return cls(a, b, cycle_period_s, min_dod)

    def cycles(self, d) -> np.ndarray | float:
        d = np.maximum(np.asarray(d, dtype=float), self.min_dod)
        n = self.a * d ** (-self.b)
        return float(n) if n.ndim == 0 else n

    @property
    def ceiling_years(self) -> float:
        return self.cycles(self.min_dod) * self.cycle_period_s / SECONDS_PER_YEAR


@dataclass(frozen=True)
class LifetimeEstimate:
    years: float
    mean_cycle_dod: float
    degenerate: bool = False


def cycle_depths(dod_series, cycle_slots: int) -> np.ndarray:
    """Maximum DoD in each consecutive window of ``cycle_slots`` slots."""
    series = np.asarray(dod_series, dtype=float)
    if series.size == 0:
        raise ValueError("empty DoD series")
    cycle_slots = max(1, int(cycle_slots))
    n = math.ceil(series.size / cycle_slots)
    padded = np.full(n * cycle_slots, -np.inf)
    padded[:series.size] = series
    return padded.reshape(n, cycle_slots).max(axis=1)


def lifetime_estimate(dod_series, model: LifetimeModel, cycle_slots: int) -> LifetimeEstimate:
    """Years until failure if the observed cycling pattern repeats.

    Each orbital period contributes one charge/discharge cycle whose depth is
    the deepest DoD reached inside it.
    """
    depths = cycle_depths(dod_series, cycle_slots)
    if not np.any(depths > 0):
        return LifetimeEstimate(model.ceiling_years, 0.0, degenerate=True)
    mean_d = float(depths.mean())
    years = model.cycles(mean_d) * model.cycle_period_s / SECONDS_PER_YEAR
    return LifetimeEstimate(years, mean_d)
