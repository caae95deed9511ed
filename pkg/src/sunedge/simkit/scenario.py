"""From a :class:`ScenarioConfig` to a precomputed :class:`SbeoInstance`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..orbital import Sky, great_circle_deg, isl_edges
from ..sbeo import SbeoInstance
from ..scheduler import orbital_cycle
from .config import ScenarioConfig
from .workload import generate_workload


@dataclass
class Scenario:
    config: ScenarioConfig
    sky: Sky
    instance: SbeoInstance


def station_ranges(sky: Sky) -> np.ndarray:
    """(T, S, G) great-circle angle between subsatellite point and station."""
    if len(sky.stations) == 0:
        return np.zeros((sky.num_slots, sky.num_sats, 0), dtype=np.float32)
    sub = sky.subsatellite()[:, :, None, :]
    gs = sky.stations.latlon[None, None, :, :]
    return great_circle_deg(sub, gs).astype(np.float32)


def build_scenario(config: ScenarioConfig) -> Scenario:
    n_t = config.num_slots
    longest = max(config.constellation.shells, key=lambda sh: sh.altitude_km)
    cycle = orbital_cycle(longest.altitude_km, config.dt)
    sky = Sky.compute(config.constellation, config.stations, n_t, config.dt)
    # the scheduler looks one cycle ahead, also from the last slots of the run
    ahead = Sky.compute(config.constellation, None, n_t + cycle, config.dt).sunlit
    tasks = generate_workload(config, sky)
    instance = SbeoInstance(
        num_sats=sky.num_sats,
        num_stations=len(config.stations),
        dt=config.dt,
        sun=sky.sunlit,
        gs_visible=sky.gs_visible,
        isl=isl_edges(config.constellation),
        orbit_of=config.constellation.elements().orbit,
        tasks=tasks,
        power=config.power,
        cycle_slots=cycle,
        isl_capacity=config.isl_capacity,
        gsl_capacity=config.gsl_capacity,
        gsl_mode=config.gsl_mode,
        fairness=config.fairness,
        gs_range=station_ranges(sky),
        sun_forecast=ahead,
    )
    return Scenario(config, sky, instance)


def build_instance(config: ScenarioConfig) -> SbeoInstance:
    return build_scenario(config).instance
