"""Distributed-order relaxation without a closed-form solution.

Solves  int_0^1 6 theta (1 - theta) D^theta u dtheta + u / 10 = 0,  u(0) = 1
for three basis sizes and prints them side by side, then shows where the
residual is largest.
"""

import dataclasses

import numpy as np

from dofde import builtin, default_config, residual_report, solve

problem = builtin("ex2")
base = default_config("ex2")
ts = np.arange(1, 11) / 10

columns = {}
for d in (10, 15, 20):
    columns[d] = solve(problem, dataclasses.replace(base, d=d, n_points=d))

print("  t      d=10        d=15        d=20")
for i, t in enumerate(ts):
    print(f"{t:4.1f}  " + "  ".join(f"{columns[d](t):.8f}" for d in columns))

model = columns[20]
grid = np.linspace(0, 1, 201)
res, rmax, rms = residual_report(model, problem, grid)
print(f"\ntraining residual max {model.residual_max:.2e}")
print(f"uniform grid: max {rmax:.2e} at t={grid[res.argmax()]:.3f}, rms {rms:.2e}")
print(f"away from t=0 (t >= 0.05): max {res[grid >= 0.05].max():.2e}")
# the true solution is not smooth at t = 0, so a polynomial cannot follow it there
