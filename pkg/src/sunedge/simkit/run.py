"""One scenario end to end: build, simulate, measure, export."""

from __future__ import annotations

from dataclasses import dataclass

from ..energy import LifetimeModel
from .config import ScenarioConfig
from .engine import SimResult, simulate
from .export import export
from .metrics import MetricsReport, compute_metrics
from .scenario import Scenario, build_scenario


@dataclass
class RunOutput:
    scenario: Scenario
    result: SimResult
    report: MetricsReport

    def export(self, path):
        cfg = self.scenario.config
        extra = {"seed": cfg.seed, "horizon_slots": cfg.num_slots, "dt": cfg.dt,
                 "cycle_slots": self.scenario.instance.cycle_slots,
                 "epoch_day_of_year": cfg.constellation.epoch_day_of_year,
                 "power_level": cfg.power_level}
        return export(self.report, self.result.dod, path, extra)


def lifetime_model(config: ScenarioConfig, cycle_slots: int) -> LifetimeModel:
    return LifetimeModel.calibrated(cycle_slots * config.dt, ref_dod=config.lifetime_ref_dod,
                                    ref_cycles=config.lifetime_ref_cycles)


def run_simulation(config: ScenarioConfig, strategy: str | None = None,
                   scenario: Scenario | None = None) -> RunOutput:
    """``scenario`` may be passed to reuse precomputed geometry across strategies."""
    scenario = scenario or build_scenario(config)
    result = simulate(scenario.instance, strategy or config.strategy)
    report = compute_metrics(result, lifetime_model(config, scenario.instance.cycle_slots))
    return RunOutput(scenario, result, report)
