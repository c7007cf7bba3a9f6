"""Simulated annealing on bounded boxes with finite-time certificates."""

from .convergence import MinorizationBound, certify, minorization_constant, steps_for_tv, tv_bound_after
from .domain import (
    BoundedDomain,
    DeterministicCriterion,
    ExpectedValueCriterion,
    Point,
    estimate_expected_value,
    scale_criterion,
)
from .guarantees import (
    Certificate,
    GuaranteeSpec,
    ProofParams,
    compose_confidence,
    min_delta_J,
    min_J,
    optimal_delta,
    proof_params_from_spec,
    sigma,
    spec_from_proof_params,
)
from .sampler import Proposal, Schedule, default_schedule, run_schedule
from .target import TargetSpec

__version__ = "0.1.0"

__all__ = [
    "BoundedDomain",
    "Certificate",
    "DeterministicCriterion",
    "ExpectedValueCriterion",
    "GuaranteeSpec",
    "MinorizationBound",
    "Point",
    "ProofParams",
    "Proposal",
    "Schedule",
    "TargetSpec",
    "certify",
    "compose_confidence",
    "default_schedule",
    "estimate_expected_value",
    "min_J",
    "min_delta_J",
    "minorization_constant",
    "optimal_delta",
    "proof_params_from_spec",
    "run_schedule",
    "scale_criterion",
    "sigma",
    "spec_from_proof_params",
    "steps_for_tv",
    "tv_bound_after",
]
