"""Solving a problem described in a problem file.

The same file also works from the command line:

    dofde solve --config demos/custom_problem.ini --out runs/custom
"""

from pathlib import Path

import numpy as np

from dofde import SolverConfig, solve
from dofde.config import load_problem

problem, options = load_problem(Path(__file__).with_name("custom_problem.ini"))
config = SolverConfig(d=int(options["d"]), n_points=int(options["n"]))
model = solve(problem, config)

t = np.linspace(0, 1, 6)
for ti, u in zip(t, model(t)):
    print(f"t={ti:.1f}  u={u:.10f}  exact={problem.exact(ti):.10f}")
