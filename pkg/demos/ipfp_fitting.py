"""Iterative proportional fitting as repeated left composition.

On a perfect sequence the estimate stops moving after the first cycle.  On
three pairwise marginals of a joint that form a loop, fitting needs many
cycles and converges to a table matching all three.
"""

import pathlib

from cpm import ipfp_run, read_model
from cpm.fixtures import gen_perfect_fixture

run = ipfp_run(gen_perfect_fixture(3))
print("perfect: cycles_used =", run.cycles_used, "changes =", [f"{c:.1e}" for c in run.per_cycle_change])

path = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "loop_consistent.cpm"
_, loop = read_model(path)
run = ipfp_run(loop, tol=1e-12)
print(f"loop: converged={run.converged} cycles_used={run.cycles_used}"
      f" marginal mismatch={run.marginal_mismatch:.1e}")
