"""Why sunlight matters: one satellite, one task, three start times.

A task processed in sunlight is paid for by the panels; the same task in
eclipse comes out of the battery.  The scheduler's job is to move work to
where (and when) the sun is.
"""

import numpy as np

from sunedge.sbeo import SbeoInstance, SbeoSolution, Task, battery_trace, objective

sun = np.r_[np.ones(30), np.zeros(40), np.ones(30)].astype(bool)[:, None]
inst = SbeoInstance(1, 0, 1.0, sun, np.zeros((100, 1, 0), bool), [], np.zeros(1, int),
                    [Task(0, 0, 1e8, 20, 10, 90)])

for label, start in [("start in sunlight", 20), ("start in eclipse", 35), ("wait for sunrise", 70)]:
    sol = SbeoSolution([0], [start])
    depth = 1 - battery_trace(inst, sol).levels[:, 0].min() / inst.power.capacity_j
    print(f"{label:18s} slot {start:2d}: max DoD {depth:.5f}  objective {objective(inst, sol):.5f}")
