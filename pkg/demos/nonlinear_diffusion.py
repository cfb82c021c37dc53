"""Nonlinear distributed-order diffusion on the unit square.

The quadratic term is lagged (Picard iteration), so each step is a linear
LSSVR solve. Prints the converged solution on an 11 x 6 grid together
with its distance from t^2.5 x (x - 1).
"""

import numpy as np

from dofde import builtin, default_config, solve

problem = builtin("ex4")
model = solve(problem, default_config("ex4"))
print(f"Picard iterations: {model.picard_iterations}, converged: {model.converged}")

xs = np.arange(11) / 10
ts = np.arange(6) / 5
values = model(xs[:, None], ts[None, :])
exact = ts[None, :] ** 2.5 * xs[:, None] * (xs[:, None] - 1)

print("x \\ t " + "".join(f"{t:>12.1f}" for t in ts))
for x, row in zip(xs, values):
    print(f"{x:5.1f} " + "".join(f"{v:12.8f}" for v in row))
print(f"\nmax |u - exact| on the grid: {np.max(np.abs(values - exact)):.2e}")
