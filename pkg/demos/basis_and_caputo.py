"""Shifted Gegenbauer polynomials and their Caputo derivatives.

Expands t**2 in a four-term Legendre basis on [0.2, 1.5], then applies a
fractional derivative of order 0.5 and a distributed-order operator and
compares both with closed forms.
"""

import math

import numpy as np

from dofde import GegenbauerBasis
from dofde.fractional import DistributedTerm, distributed_basis_row

basis = GegenbauerBasis(0.5, 4, domain=(0.2, 1.5))
w = basis.from_monomials([0, 0, 1])  # t**2 in basis coordinates
print("weights of t^2:", np.round(w, 12))

t = np.linspace(0.3, 1.4, 5)
print("max |u - t^2| :", np.max(np.abs(basis.eval(t) @ w - t**2)))

# D^0.5 t^2 = Gamma(3) / Gamma(2.5) t^1.5
half = basis.caputo(t, 0.5) @ w
print("max error of D^0.5:", np.max(np.abs(half - 2 / math.gamma(2.5) * t**1.5)))

# int_0.2^1.5 Gamma(3 - theta) D^theta t^2 dtheta = 2 (t^1.8 - t^0.5) / ln t
term = DistributedTerm(lambda th: math.gamma(3 - th), 0.2, 1.5, quadrature_order=10)
dist = distributed_basis_row(term, basis, t) @ w
exact = 2 * (t**1.8 - t**0.5) / np.log(t)
for ti, a, b in zip(t, dist, exact):
    print(f"t={ti:.3f}  operator={a:.12f}  closed form={b:.12f}")

# collocation points are the roots of the next basis function
print("roots of G_4:", basis.roots(4))
