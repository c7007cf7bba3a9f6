"""Total-variation bounds for the final homogeneous stage.

With a uniform independence component of weight w, every MH kernel here
satisfies K(θ, ·) ≥ β π^(J)(·) for all θ, where

    β = w · (δ / (1 + δ))^J

since the importance ratio π^(J)/uniform is at most ((1+δ)/δ)^J on a box.
That gives ‖P_k − π^(J)‖_TV ≤ (1 − β)^k from any start. β underflows double
precision once J reaches the hundreds, so β is carried as log β and the step
count is computed with mpmath.
"""

from __future__ import annotations

import io
import math
from typing import Optional

import numpy as np
from mpmath import mp, mpf
from pydantic import BaseModel, ConfigDict, Field
from rich.console import Console
from rich.table import Table

from .errors import GuaranteeError, InfeasibleCertificateError, UnreachableConfidenceError
from .guarantees import (
    DELTA_BRACKET,
    GRID_POINTS,
    Certificate,
    GuaranteeSpec,
    compose_confidence,
    min_delta_J,
    min_J,
    random_search_samples,
    sigma,
)
from .logs import get_logger
from .target import TargetSpec

logger = get_logger("convergence")

DEFAULT_BUDGET = 10**9
MODES = ("fixed-delta", "optimize", "min-steps")
_DPS = 50


class MinorizationBound(BaseModel):
    """Per-step Doeblin constant β of the final-stage kernel, kept as log β."""

    model_config = ConfigDict(frozen=True)

    log_beta: float = Field(le=0.0, allow_inf_nan=False)
    target: TargetSpec
    uniform_weight: float = Field(gt=0.0, le=1.0)
    proposal: str = "uniform-independence"

    @property
    def beta(self) -> float:
        """β as a double; 0.0 once it underflows."""
        return math.exp(self.log_beta)


def minorization_constant(
    target: TargetSpec, uniform_weight: float, proposal: str = "uniform-independence"
) -> MinorizationBound:
    if uniform_weight == 0.0:
        raise GuaranteeError("no certificate possible for pure random-walk proposal (uniform weight is 0)")
    if not (0.0 < uniform_weight <= 1.0):
        raise GuaranteeError(f"uniform weight must lie in (0, 1], got {uniform_weight}")
    log_beta = math.log(uniform_weight) - target.J * math.log1p(1.0 / target.delta)
    return MinorizationBound(log_beta=log_beta, target=target, uniform_weight=uniform_weight, proposal=proposal)


def _mp_log_rate(log_beta: float):
    """log1p(−β) at working precision (negative)."""
    return mp.log1p(-mp.exp(mpf(log_beta)))


def tv_bound_after(bound: MinorizationBound, k: int) -> float:
    """min(1, (1 − β)^k)."""
    if k < 0:
        raise GuaranteeError(f"k must be >= 0, got {k}")
    if k == 0:
        return 1.0
    with mp.workdps(_DPS + len(str(k))):
        value = mp.exp(mpf(k) * _mp_log_rate(bound.log_beta))
        return min(1.0, float(value))


def steps_for_tv(bound: MinorizationBound, tv_target: float) -> int:
    """Smallest k with (1 − β)^k ≤ tv_target. May be astronomically large; the
    caller decides whether it fits a budget."""
    if not (0.0 < tv_target < 1.0):
        raise GuaranteeError(f"tv_target must lie in (0, 1), got {tv_target}")
    with mp.workdps(_DPS):
        rate = _mp_log_rate(bound.log_beta)
        if rate == 0:
            raise GuaranteeError(f"beta = exp({bound.log_beta}) is below working precision")
        k = max(1, int(mp.ceil(mp.log(mpf(tv_target)) / rate)))
    # redo the boundary at a precision that resolves a change of one step
    with mp.workdps(_DPS + len(str(k))):
        rate = _mp_log_rate(bound.log_beta)
        log_tv = mp.log(mpf(tv_target))
        while k > 1 and (k - 1) * rate <= log_tv:
            k -= 1
        while k * rate > log_tv:
            k += 1
    return k


def _log_rate_float(log_beta: float) -> float:
    """log(−log1p(−β)); k scales like 1/exp(this)."""
    if log_beta < -30.0:
        return log_beta
    return math.log(-math.log1p(-math.exp(log_beta)))


def _min_steps_target(spec: GuaranteeSpec, uniform_weight: float) -> TargetSpec:
    """δ on the log grid (plus the smallest-J choice) whose J = min_J(spec, δ)
    gives the largest β, which is the smallest composed k."""
    candidates: list[TargetSpec] = []
    try:
        candidates.append(min_delta_J(spec))
    except UnreachableConfidenceError:
        pass
    for delta in np.geomspace(DELTA_BRACKET[0], DELTA_BRACKET[1], GRID_POINTS):
        try:
            candidates.append(TargetSpec(J=min_J(spec, float(delta)), delta=float(delta)))
        except UnreachableConfidenceError:
            continue
    if not candidates:
        raise UnreachableConfidenceError(f"sigma_target = {spec.sigma_target} is unreachable for {spec}")

    def score(t: TargetSpec) -> tuple[float, float]:
        log_beta = math.log(uniform_weight) - t.J * math.log1p(1.0 / t.delta)
        return (_log_rate_float(log_beta), sigma(spec, t))

    return max(candidates, key=score)


def certify(
    spec: GuaranteeSpec,
    tv_target: float,
    uniform_weight: float = 1.0,
    mode: str = "optimize",
    delta: Optional[float] = None,
    budget: int = DEFAULT_BUDGET,
) -> Certificate:
    """Compose (J, δ), β, k and σ − TV into one certificate.

    ``mode`` is ``fixed-delta`` (needs ``delta``), ``optimize`` (smallest J)
    or ``min-steps`` (smallest k). k counts final-stage steps only; the bound
    holds from any start of that stage. Raises InfeasibleCertificateError,
    carrying the certificate with its exact k, when k exceeds ``budget``.
    """
    if mode not in MODES:
        raise GuaranteeError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    if mode == "fixed-delta":
        if delta is None:
            raise GuaranteeError("fixed-delta mode needs delta")
        target = TargetSpec(J=min_J(spec, delta), delta=delta)
    elif mode == "optimize":
        target = min_delta_J(spec)
    else:
        target = _min_steps_target(spec, uniform_weight)

    bound = minorization_constant(target, uniform_weight)
    k = steps_for_tv(bound, tv_target)
    tv = tv_bound_after(bound, k)
    sig = sigma(spec, target)
    cert = Certificate(
        spec=spec,
        target=target,
        sigma=sig,
        k=k,
        tv_bound=tv,
        confidence=compose_confidence(sig, tv),
        tv_target=tv_target,
        uniform_weight=uniform_weight,
        log_beta=bound.log_beta,
        mode=mode,
        budget=budget,
    )
    logger.info(
        f"J={target.J:g} delta={target.delta:.6g} sigma={sig:.6g} log10(beta)={bound.log_beta / math.log(10):.4g} k={k}"
    )
    if k > budget:
        raise InfeasibleCertificateError(cert, budget)
    return cert


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def report_table(cert: Certificate) -> Table:
    status = "feasible" if cert.feasible else "INFEASIBLE within budget"
    table = Table(title=f"Certificate ({cert.mode})", show_header=True, header_style="bold")
    table.add_column("quantity", no_wrap=True)
    table.add_column("value", justify="right", no_wrap=True)
    rows = [
        ("epsilon (value imprecision)", _fmt(cert.spec.epsilon)),
        ("alpha (residual domain)", _fmt(cert.spec.alpha)),
        ("sigma target", _fmt(cert.spec.sigma_target)),
        ("J", _fmt(cert.target.J)),
        ("delta", _fmt(cert.target.delta)),
        ("sigma at (J, delta)", _fmt(cert.sigma)),
        ("uniform weight", _fmt(cert.uniform_weight)),
    ]
    if cert.log_beta is not None:
        rows.append(("log10 beta", _fmt(cert.log_beta / math.log(10))))
    rows += [
        ("tv target", "-" if cert.tv_target is None else _fmt(cert.tv_target)),
        ("k (final-stage steps, exact)", str(cert.k)),
        ("tv bound after k", _fmt(cert.tv_bound)),
        ("confidence = sigma - tv", _fmt(cert.confidence)),
        ("budget", "-" if cert.budget is None else str(cert.budget)),
        ("status", status),
        (
            "uniform random search, draws for (0, alpha) at sigma target",
            str(random_search_samples(cert.spec.alpha, cert.spec.sigma_target)),
        ),
    ]
    for name, value in rows:
        table.add_row(name, value)
    return table


def format_report(cert: Certificate) -> str:
    """Plain-text report block: the table plus a one-line statement."""
    buf = io.StringIO()
    console = Console(file=buf, width=160, color_system=None, force_terminal=False, soft_wrap=True)
    console.print(report_table(cert))
    if cert.feasible and cert.reportable:
        console.print(
            f"After {cert.k} final-stage steps at J = {cert.target.J:g}, delta = {cert.target.delta:.6g}, "
            f"the chain state is an ({cert.spec.epsilon:g}, {cert.spec.alpha:g}) approximate global optimizer "
            f"with probability >= {cert.confidence:.6g}."
        )
    elif not cert.feasible:
        console.print(f"infeasible within budget: k = {cert.k} exceeds {cert.budget}; no run is certified.")
    else:
        console.print("confidence is 0: no certificate.")
    return buf.getvalue()
