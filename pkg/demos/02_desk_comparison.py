"""Desk-scale constellation over two orbits: every strategy side by side.

The default scenario runs ship detection over the Atlantic at 60 W on a
6 x 8 Walker shell.  Takes about half a minute.
"""

from sunedge.baselines import StrategyKind
from sunedge.simkit.config import desk_scenario
from sunedge.simkit.run import run_simulation
from sunedge.simkit.scenario import build_scenario

cfg = desk_scenario()
scenario = build_scenario(cfg)
print(f"{len(scenario.instance.tasks)} tasks over {cfg.num_slots} slots\n")
print(f"{'strategy':20s} {'max DoD':>8s} {'avg DoD':>8s} {'miss':>6s} {'min life':>9s}  sunlit%")
for kind in StrategyKind:
    rep = run_simulation(cfg, kind.value, scenario).report
    print(f"{kind.value:20s} {rep.global_max_dod:8.4f} {rep.average_dod:8.4f} {rep.miss_rate:6.3f} "
          f"{rep.min_lifetime:8.2f}y  {rep.psd['sunlit']:6.1f}")
