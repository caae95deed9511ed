"""Seasons shift eclipse lengths; see how the average depth of discharge moves.

Uses a shortened horizon (one orbit) so the four runs finish quickly.
"""

from dataclasses import replace

from sunedge.simkit.cli import SEASONS
from sunedge.simkit.config import desk_scenario
from sunedge.simkit.run import run_simulation

base = desk_scenario(horizon_orbits=1.0)
for season, day in SEASONS.items():
    cfg = base.with_overrides(constellation=replace(base.constellation, epoch_day_of_year=day))
    out = run_simulation(cfg)
    eclipse = 1 - out.scenario.instance.sun.mean()
    print(f"{season:7s} day {day:3d}: eclipse fraction {eclipse:.3f}  "
          f"avg DoD {out.report.average_dod:.5f}  max DoD {out.report.global_max_dod:.4f}")
