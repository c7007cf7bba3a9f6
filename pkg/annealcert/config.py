"""Run configuration: JSON file, then environment, then command-line flags.

Flags win. ``ANNEAL_CERT_BUDGET`` overrides the final-stage step budget.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .convergence import DEFAULT_BUDGET
from .errors import ConfigError
from .logs import get_logger

logger = get_logger("config")

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG = REPO_ROOT / "etc" / "anneal.json"
BUDGET_ENV = "ANNEAL_CERT_BUDGET"
METADATA_KEYS = ("$schema", "version", "description")


class AnnealConfig(BaseModel):
    """Everything a certify / run / verify invocation needs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # certificate request
    epsilon: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    alpha: Optional[float] = Field(default=None, le=1.0)
    sigma: float = Field(default=0.95, gt=0.0, lt=1.0)
    tv: float = Field(default=0.05, gt=0.0, lt=1.0)
    delta: Optional[float] = Field(default=None, gt=0.0)
    optimize_delta: bool = False
    min_steps: bool = False
    budget: int = Field(default=DEFAULT_BUDGET, ge=1)

    # chain
    function: Optional[str] = None
    dim: Optional[int] = Field(default=None, ge=1)
    J: Optional[float] = Field(default=None, ge=1.0)
    steps: Optional[int] = Field(default=None, ge=1)
    schedule: Optional[list[tuple[float, int]]] = None
    proposal: str = "uniform"
    seed: int = Field(default=0, ge=0)
    replicas: int = Field(default=1, ge=1)
    decimate: int = Field(default=1, ge=1)
    report_draws: int = Field(default=1000, ge=1)

    # verification
    suite: str = "all"
    samples: int = Field(default=20_000, ge=1)
    mc: int = Field(default=10_000, ge=1000)
    chain_steps: int = Field(default=100_000, ge=1)
    tv_steps: int = Field(default=100_000, ge=0)
    battery: int = Field(default=20, ge=0)

    # output
    out: Optional[str] = None
    log_file: Optional[str] = None
    verbose: bool = False

    @field_validator("alpha")
    @classmethod
    def _alpha_positive(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and value <= 0.0:
            raise ValueError(f"alpha must lie in (0, 1] for the confidence bound to hold, got {value}")
        return value

    @property
    def delta_mode(self) -> str:
        if self.min_steps:
            return "min-steps"
        if self.optimize_delta or self.delta is None:
            return "optimize"
        return "fixed-delta"

    @property
    def wants_certificate(self) -> bool:
        return self.epsilon is not None or self.alpha is not None


def load_config_file(path: Optional[str]) -> dict[str, Any]:
    """Settings from ``path``, or from etc/anneal.json when no path is given."""
    if path is None:
        if not DEFAULT_CONFIG.exists():
            return {}
        config_path = DEFAULT_CONFIG
    else:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigError(f"config file not found: {config_path}")
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{config_path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{config_path} must hold a JSON object")
    for meta in METADATA_KEYS:
        data.pop(meta, None)
    logger.debug(f"loaded {config_path}")
    return data


def env_overrides() -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    raw = os.environ.get(BUDGET_ENV)
    if raw:
        try:
            overrides["budget"] = int(float(raw))
        except (ValueError, OverflowError) as exc:
            raise ConfigError(f"{BUDGET_ENV} must be a finite number, got {raw!r}") from exc
    return overrides


def build_config(flags: dict[str, Any], config_path: Optional[str] = None) -> AnnealConfig:
    """Merge file < environment < flags; flags set to None are absent."""
    merged = load_config_file(config_path)
    merged.update(env_overrides())
    merged.update({k: v for k, v in flags.items() if v is not None})
    try:
        return AnnealConfig(**merged)
    except ValidationError as exc:
        problems = "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors())
        raise ConfigError(f"invalid configuration: {problems}") from exc
