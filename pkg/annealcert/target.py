"""Equilibrium distributions π^(J)(dθ) ∝ [U(θ) + δ]^J dθ.

1/J plays the role of the temperature. Everything here works in log space:
(u + δ)^J over- or underflows long before J reaches the values certificates
ask for. The zero-temperature limit J → ∞ is never constructed.
"""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import logsumexp

from .domain import check_unit


class TargetSpec(BaseModel):
    """(J, δ) of one equilibrium distribution. J may be real except for Müller chains."""

    model_config = ConfigDict(frozen=True)

    J: float = Field(ge=1.0, allow_inf_nan=False, description="inverse temperature, >= 1")
    delta: float = Field(gt=0.0, allow_inf_nan=False, description="density offset, > 0")

    @property
    def is_integer(self) -> bool:
        return float(self.J).is_integer()

    def for_mueller(self) -> "TargetSpec":
        """Same target with J rounded up to an integer (Müller chains need J draws)."""
        if self.is_integer:
            return self
        return TargetSpec(J=math.ceil(self.J), delta=self.delta)


def log_unnormalized_density(t: TargetSpec, u_value: float) -> float:
    return t.J * math.log(check_unit(u_value, "criterion") + t.delta)


def acceptance_log_ratio(
    t: TargetSpec,
    u_current: float,
    u_proposed: float,
    log_q_forward: float = 0.0,
    log_q_backward: float = 0.0,
) -> float:
    """Log MH ratio; the move is accepted with probability min(1, exp(ratio)).

    Taken as a difference of log densities, which is what the Müller kernel
    computes from its stored products.
    """
    return (
        log_unnormalized_density(t, u_proposed)
        - log_unnormalized_density(t, u_current)
        + log_q_backward
        - log_q_forward
    )


def log_density_many(t: TargetSpec, u_values: np.ndarray) -> np.ndarray:
    return t.J * np.log(np.asarray(u_values, dtype=float) + t.delta)


def normalized_density(t: TargetSpec, u_values: np.ndarray) -> np.ndarray:
    """Normalized discrete law proportional to (u + δ)^J over grid cells."""
    log_w = log_density_many(t, u_values)
    return np.exp(log_w - logsumexp(log_w))
