"""Certificate calculus for the power-law family π^(J) ∝ (U + δ)^J.

A point drawn from π^(J) is an (ε, α) approximate global optimizer with
probability at least

    σ = 1 / (1 + ρ^J · [(1+δ)/(α(ε+δ)) − 1] · (1+δ)/δ),   ρ = (1+δ)/(ε+1+δ)

and a chain whose law is within TV distance t of π^(J) keeps σ − t of that.
σ is evaluated through its log-odds so that J in the thousands never
underflows ρ^J.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import minimize_scalar
from scipy.special import expit

from .errors import GuaranteeError, UnreachableConfidenceError
from .logs import get_logger
from .target import TargetSpec

logger = get_logger("guarantees")

DELTA_BRACKET = (1e-6, 1e3)
LOG_DELTA_XATOL = 1e-9
GRID_POINTS = 1000
# fix-up iterations around the closed-form J before giving up
_MAX_J_ADJUST = 1000


class GuaranteeSpec(BaseModel):
    """What the user asks for: value imprecision ε, residual domain α, confidence σ."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(ge=0.0, le=1.0, allow_inf_nan=False)
    alpha: float = Field(le=1.0, allow_inf_nan=False)
    sigma_target: float = Field(default=0.95, gt=0.0, lt=1.0, allow_inf_nan=False)

    @field_validator("alpha")
    @classmethod
    def _alpha_positive(cls, value: float) -> float:
        if value <= 0.0:
            raise ValueError(
                f"alpha must lie in (0, 1], got {value}: the confidence bound has no content for an empty residual domain"
            )
        return value

    @property
    def degenerate(self) -> bool:
        """ε = α = 1: every point qualifies and σ ≡ 1."""
        return self.epsilon == 1.0 and self.alpha == 1.0


class ProofParams(BaseModel):
    """(ρ, ᾱ) form of a spec at fixed δ.

    ``rho_complement`` is 1 − ρ computed without cancellation; the inverse map
    reads it instead of ``1 - rho``.
    """

    model_config = ConfigDict(frozen=True)

    rho: float = Field(gt=0.0, le=1.0)
    alpha_bar: float = Field(gt=0.0, le=1.0)
    rho_complement: Optional[float] = Field(default=None, ge=0.0, lt=1.0)

    @model_validator(mode="before")
    @classmethod
    def _fill_complement(cls, data):
        if isinstance(data, dict) and data.get("rho_complement") is None and "rho" in data:
            data = {**data, "rho_complement": 1.0 - float(data["rho"])}
        return data


class Certificate(BaseModel):
    """A finite-time statement: after ``k`` final-stage steps at ``target``
    the chain state is an (ε, α) approximate global optimizer with
    probability at least ``confidence``."""

    model_config = ConfigDict(frozen=True)

    spec: GuaranteeSpec
    target: TargetSpec
    sigma: float = Field(gt=0.0, le=1.0)
    k: int = Field(ge=0)
    tv_bound: float = Field(ge=0.0, le=1.0)
    confidence: float
    tv_target: Optional[float] = None
    uniform_weight: float = 1.0
    log_beta: Optional[float] = None
    mode: str = "fixed-delta"
    budget: Optional[int] = None

    @model_validator(mode="after")
    def _confidence_is_composed(self) -> "Certificate":
        expected = compose_confidence(self.sigma, self.tv_bound)
        if self.confidence != expected:
            raise ValueError(f"confidence {self.confidence} != max(0, sigma - tv_bound) = {expected}")
        return self

    @property
    def reportable(self) -> bool:
        return self.confidence > 0.0

    @property
    def feasible(self) -> bool:
        return self.budget is None or self.k <= self.budget

    @property
    def beta(self) -> Optional[float]:
        return None if self.log_beta is None else math.exp(self.log_beta)

    def to_json_dict(self) -> dict:
        """Serialized form; floats carry 12 significant digits."""
        out = {
            "epsilon": _sig12(self.spec.epsilon),
            "alpha": _sig12(self.spec.alpha),
            "sigma_target": _sig12(self.spec.sigma_target),
            "J": int(self.target.J) if self.target.is_integer else _sig12(self.target.J),
            "delta": _sig12(self.target.delta),
            "sigma": _sig12(self.sigma),
            "k": int(self.k),
            "tv_bound": _sig12(self.tv_bound),
            "confidence": _sig12(self.confidence),
            "tv_target": None if self.tv_target is None else _sig12(self.tv_target),
            "uniform_weight": _sig12(self.uniform_weight),
            "log_beta": None if self.log_beta is None else _sig12(self.log_beta),
            "mode": self.mode,
            "budget": self.budget,
            "feasible": self.feasible,
            "reportable": self.reportable,
        }
        return out


def _sig12(value: float) -> float:
    return float(f"{float(value):.12g}")


# ----------------------------------------------------------------------------
# σ and its log-odds
# ----------------------------------------------------------------------------


def _log_odds(epsilon: float, alpha: float, J: float, delta):
    """log of ρ^J · bracket · (1+δ)/δ; -inf when the bracket vanishes.

    ``delta`` may be a numpy array (the grid fallback evaluates many at once).
    """
    delta = np.asarray(delta, dtype=float)
    weight = alpha * (epsilon + delta)
    bracket_num = (1.0 + delta) - weight
    with np.errstate(divide="ignore", invalid="ignore"):
        log_bracket = np.where(bracket_num > 0.0, np.log(np.maximum(bracket_num, 0.0)) - np.log(weight), -np.inf)
    log_rho = -np.log1p(epsilon / (1.0 + delta))
    out = J * log_rho + log_bracket + np.log1p(1.0 / delta)
    return float(out) if out.ndim == 0 else out


def _sigma_raw(epsilon: float, alpha: float, J: float, delta: float) -> float:
    return float(expit(-_log_odds(epsilon, alpha, J, delta)))


def sigma(spec: GuaranteeSpec, target: TargetSpec) -> float:
    """Probability that a π^(J) draw is an (ε, α) approximate optimizer, lower bound."""
    return _sigma_raw(spec.epsilon, spec.alpha, target.J, target.delta)


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not (delta > 0.0 and math.isfinite(delta)):
        raise GuaranteeError(f"delta must be positive and finite, got {delta}")
    return delta


def _closed_form_J(spec: GuaranteeSpec, delta: float) -> float:
    """Real J solving σ = σ_target (may be below 1)."""
    log_rho = -math.log1p(spec.epsilon / (1.0 + delta))
    offset = _log_odds(spec.epsilon, spec.alpha, 0.0, delta)
    need = math.log1p(-spec.sigma_target) - math.log(spec.sigma_target) - offset
    return need / log_rho


def min_J(spec: GuaranteeSpec, delta: float) -> int:
    """Smallest integer J ≥ 1 with sigma(spec, (J, δ)) ≥ σ_target."""
    delta = _check_delta(delta)
    target = spec.sigma_target

    def reached(J: int) -> bool:
        return _sigma_raw(spec.epsilon, spec.alpha, J, delta) >= target

    if reached(1):
        return 1
    # σ(1) < 1 here, so the bracket is positive
    assert _log_odds(spec.epsilon, spec.alpha, 0.0, delta) > -math.inf
    if spec.epsilon == 0.0:
        raise UnreachableConfidenceError(
            f"sigma does not depend on J when epsilon = 0; sigma = {_sigma_raw(0.0, spec.alpha, 1, delta):.6g} "
            f"< sigma_target = {target} at delta = {delta}"
        )

    J = max(1, math.ceil(_closed_form_J(spec, delta)))
    for _ in range(_MAX_J_ADJUST):
        if J > 1 and reached(J - 1):
            J -= 1
        elif not reached(J):
            J += 1
        else:
            return J
    raise GuaranteeError(f"could not resolve min_J near J = {J} for {spec} at delta = {delta}")


# ----------------------------------------------------------------------------
# searches over δ
# ----------------------------------------------------------------------------


def _search_delta(objective: Callable[[float], float]) -> tuple[float, float]:
    """Minimize ``objective(δ)`` over the fixed bracket, searching in log δ.

    Bounded Brent first; if its answer does not beat both bracket ends the
    log-spaced grid picks a cell and Brent is rerun inside it. Returned δ
    values lie inside the bracket, and an endpoint comes back exactly.
    """
    d_lo, d_hi = DELTA_BRACKET
    lo, hi = math.log(d_lo), math.log(d_hi)

    def to_delta(x: float) -> float:
        return min(d_hi, max(d_lo, math.exp(x)))

    def in_log(x: float) -> float:
        return objective(to_delta(x))

    res = minimize_scalar(in_log, bounds=(lo, hi), method="bounded", options={"xatol": LOG_DELTA_XATOL})
    best_d, best_f = to_delta(float(res.x)), float(res.fun)
    f_lo, f_hi = objective(d_lo), objective(d_hi)

    if best_f > min(f_lo, f_hi):
        logger.debug(f"bounded search lost to an endpoint (f={best_f:.6g}), scanning {GRID_POINTS} points")
        grid = np.geomspace(d_lo, d_hi, GRID_POINTS)
        values = np.array([objective(float(d)) for d in grid])
        i = int(np.argmin(values))
        best_d, best_f = float(grid[i]), float(values[i])
        a, b = math.log(grid[max(i - 1, 0)]), math.log(grid[min(i + 1, GRID_POINTS - 1)])
        if a < b:
            refined = minimize_scalar(in_log, bounds=(a, b), method="bounded", options={"xatol": LOG_DELTA_XATOL})
            if float(refined.fun) < best_f:
                best_d, best_f = to_delta(float(refined.x)), float(refined.fun)

    for d, f in ((d_lo, f_lo), (d_hi, f_hi)):
        if f < best_f:
            best_d, best_f = d, f
    return best_d, best_f


def optimal_delta(spec: GuaranteeSpec, J: float) -> tuple[float, float]:
    """δ* maximizing σ at fixed (ε, α, J), with σ(δ*). Never worse than either bracket end."""
    if not (J >= 1.0 and math.isfinite(J)):
        raise GuaranteeError(f"J must be >= 1, got {J}")
    if spec.degenerate:
        return 1.0, 1.0

    # minimizing the log-odds maximizes σ and stays informative once σ rounds to 1
    delta, _ = _search_delta(lambda d: _log_odds(spec.epsilon, spec.alpha, J, d))
    value = _sigma_raw(spec.epsilon, spec.alpha, J, delta)
    for end in DELTA_BRACKET:
        at_end = _sigma_raw(spec.epsilon, spec.alpha, J, end)
        if at_end > value:
            delta, value = end, at_end
    return delta, value


def min_delta_J(spec: GuaranteeSpec) -> TargetSpec:
    """(J*, δ*) reaching σ_target with the smallest J; equal J goes to the larger σ."""
    if spec.degenerate:
        return TargetSpec(J=1, delta=optimal_delta(spec, 1)[0])

    if spec.epsilon == 0.0:
        delta, best = optimal_delta(spec, 1)
        if best < spec.sigma_target:
            raise UnreachableConfidenceError(
                f"with epsilon = 0 the best sigma over delta is {best:.6g} < sigma_target = {spec.sigma_target}"
            )
        return TargetSpec(J=1, delta=delta)

    delta_j, _ = _search_delta(lambda d: _closed_form_J(spec, d))
    J = min_J(spec, delta_j)

    delta, value = optimal_delta(spec, J)
    if value < spec.sigma_target:
        delta = delta_j
    logger.debug(f"min_delta_J: J={J} delta={delta:.6g} (J search settled at delta={delta_j:.6g})")
    return TargetSpec(J=J, delta=delta)


# ----------------------------------------------------------------------------
# (ρ, ᾱ) parametrization
# ----------------------------------------------------------------------------

_RANGE_SLACK = 1e-12


def proof_params_from_spec(spec: GuaranteeSpec, delta: float) -> ProofParams:
    delta = _check_delta(delta)
    eps = spec.epsilon
    denom = eps + 1.0 + delta
    return ProofParams(
        rho=(1.0 + delta) / denom,
        alpha_bar=spec.alpha * (eps + delta) / (1.0 + delta),
        rho_complement=eps / denom,
    )


def spec_from_proof_params(p: ProofParams, delta: float) -> tuple[float, float]:
    """Inverse of :func:`proof_params_from_spec`: returns (ε̃, α̃)."""
    delta = _check_delta(delta)
    rho_floor = (1.0 + delta) / (2.0 + delta)
    if p.rho < rho_floor * (1.0 - _RANGE_SLACK):
        raise GuaranteeError(f"rho = {p.rho} below (1+delta)/(2+delta) = {rho_floor}")

    epsilon = (1.0 + delta) * p.rho_complement / p.rho
    alpha_cap = (epsilon + delta) / (1.0 + delta)
    if p.alpha_bar > alpha_cap * (1.0 + _RANGE_SLACK):
        raise GuaranteeError(f"alpha_bar = {p.alpha_bar} above (eps+delta)/(1+delta) = {alpha_cap}")
    alpha = (1.0 + delta) / (epsilon + delta) * p.alpha_bar
    return min(epsilon, 1.0), min(alpha, 1.0)


def sigma_from_proof_params(p: ProofParams, J: float, delta: float) -> float:
    """σ written as 1 / (1 + ρ^J · (1 − ᾱ)/ᾱ · (1+δ)/δ)."""
    delta = _check_delta(delta)
    one_minus = 1.0 - p.alpha_bar
    if one_minus <= 0.0:
        return 1.0
    log_odds = J * math.log1p(-p.rho_complement) + math.log(one_minus) - math.log(p.alpha_bar) + math.log1p(1.0 / delta)
    return float(expit(-log_odds))


# ----------------------------------------------------------------------------
# composition and baselines
# ----------------------------------------------------------------------------


def compose_confidence(sigma_value: float, tv_bound: float) -> float:
    """max(0, σ − TV); zero means no certificate."""
    if not (0.0 < sigma_value <= 1.0):
        raise GuaranteeError(f"sigma must lie in (0, 1], got {sigma_value}")
    if not (0.0 <= tv_bound <= 1.0):
        raise GuaranteeError(f"tv_bound must lie in [0, 1], got {tv_bound}")
    return max(0.0, sigma_value - tv_bound)


def random_search_samples(alpha: float, sigma_target: float) -> int:
    """Uniform draws n so the best of them is a (0, α) optimizer with prob ≥ σ."""
    if not (0.0 < alpha <= 1.0):
        raise GuaranteeError(f"alpha must lie in (0, 1], got {alpha}")
    if not (0.0 < sigma_target < 1.0):
        raise GuaranteeError(f"sigma_target must lie in (0, 1), got {sigma_target}")
    if alpha == 1.0:
        return 1
    return max(1, math.ceil(math.log1p(-sigma_target) / math.log1p(-alpha)))
