"""Gegenbauer LSSVR collocation for distributed-order fractional differential equations."""

from .fractional import DistributedTerm, caputo_monomial_coefficient, distributed_basis_row
from .gegenbauer import GegenbauerBasis
from .problem import (
    CaputoTime,
    Distributed,
    EdgeConstraint,
    Identity,
    NonlinearTerm,
    PointConstraint,
    Problem,
    SpatialDerivative,
    builtin,
    exact_solution,
)
from .solver import SolverConfig, TrainedModel, lambda_random_search, default_config, residual_report, solve
from .special import gamma, gauss_legendre_rule

__version__ = "0.1.0"
