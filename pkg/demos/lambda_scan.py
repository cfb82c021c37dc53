"""Random search over the Gegenbauer parameter lambda.

For a problem whose solution lies in the span of the basis, the choice of
lambda barely matters; the scan makes that visible.
"""

import numpy as np

from dofde import builtin, lambda_random_search, default_config

best, trace = lambda_random_search(builtin("ex1"), default_config("ex1"), (0.1, 3.0), trials=50, seed=0)
res = np.array([tr.residual_max for tr in trace if tr.status == "ok"])
print(f"{len(res)} trials, best lambda {best:.4f}")
print(f"residual_max: min {res.min():.2e}, median {np.median(res):.2e}, max {res.max():.2e}")
for tr in sorted(trace, key=lambda tr: tr.lam)[::10]:
    print(f"  lambda={tr.lam:.3f}  residual_max={tr.residual_max:.2e}")
