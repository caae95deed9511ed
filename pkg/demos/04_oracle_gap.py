"""How far is the online heuristic from the best offline schedule?

Tiny random instances are small enough to solve exactly, so the gap can be
measured rather than guessed.
"""

import numpy as np

from sunedge.sbeo import Infeasible, TooLarge, brute_force_solve, check_feasible, objective
from sunedge.simkit.engine import simulate
from sunedge.simkit.random_instances import random_tiny_instance

rng = np.random.default_rng(0)
gaps = []
while len(gaps) < 40:
    inst = random_tiny_instance(rng)
    sol = simulate(inst, "SunlightAware").solution
    if check_feasible(inst, sol):
        continue
    try:
        best = brute_force_solve(inst)
    except (Infeasible, TooLarge):
        continue
    gaps.append(objective(inst, sol) - objective(inst, best))

gaps = np.array(gaps)
print(f"{gaps.size} instances: optimal on {np.mean(gaps <= 1e-9):.0%}, "
      f"mean gap {gaps.mean():.5f}, worst {gaps.max():.5f}")
