"""Heavy-ball momentum and SGD with multistage learning rates on quadratics.

Exact expected-risk recursions, Monte Carlo estimators, numerical checks of
the convergence bounds and a minibatch ridge-regression harness.
"""

from __future__ import annotations

from .dynamics import (RiskTrace, TransferMatrix, exact_risk_trace, spectral_radius, theorem2_bound,
                       transfer_matrix)
from .montecarlo import RunConfig, race, run_sgd, run_shb
from .problem import NoiseModel, QuadraticProblem, counterexample_instance, ridge_to_quadratic
from .schedules import Schedule, constant_schedule, step_decay_schedule, theorem_step_decay

__version__ = "0.1.0"

__all__ = [
    "QuadraticProblem",
    "NoiseModel",
    "counterexample_instance",
    "ridge_to_quadratic",
    "Schedule",
    "constant_schedule",
    "step_decay_schedule",
    "theorem_step_decay",
    "TransferMatrix",
    "transfer_matrix",
    "spectral_radius",
    "RiskTrace",
    "exact_risk_trace",
    "theorem2_bound",
    "RunConfig",
    "run_shb",
    "run_sgd",
    "race",
]
