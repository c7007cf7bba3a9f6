"""Brute-force oracles for the certificate calculus.

Exact sampling from π^(J) by rejection, a Monte Carlo check of the
approximate-optimizer definition, and exact MH transition matrices on 1-D
grids. Grid results treat the value at a cell centre as U on the whole cell;
they are used to check stationarity and bound domination only, never to
issue certificates.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import norm

from .convergence import minorization_constant, tv_bound_after
from .domain import BoundedDomain, Coords, DeterministicCriterion, ExpectedValueCriterion, Point, as_coords
from .errors import AnnealError, GridTooLargeError, SamplingBudgetError
from .guarantees import (
    GuaranteeSpec,
    ProofParams,
    min_J,
    proof_params_from_spec,
    sigma,
    sigma_from_proof_params,
    spec_from_proof_params,
)
from .logs import get_logger, log_progress
from .registry import RegistryEntry, get_function
from .rng import ORACLE_STREAM, chain_rng
from .sampler import Proposal, Schedule, run_schedule
from .target import TargetSpec, log_density_many, normalized_density

logger = get_logger("verify")

MAX_GRID_CELLS = 2000
DEFAULT_MAX_PROPOSALS = 10**8
SUITES = ("bijection", "stationarity", "tv-domination", "sigma-bound", "all")


# ----------------------------------------------------------------------------
# exact sampling
# ----------------------------------------------------------------------------


@dataclass
class RejectionSample:
    points: np.ndarray
    proposals: int
    wanted: int

    @property
    def complete(self) -> bool:
        return len(self.points) >= self.wanted

    @property
    def acceptance_rate(self) -> float:
        return len(self.points) / self.proposals if self.proposals else 0.0

    def as_points(self) -> list[Point]:
        return [Point(row) for row in self.points]


def _acceptance_probs(target: TargetSpec, u: np.ndarray, u_max: float = 1.0) -> np.ndarray:
    if np.any(u > u_max):
        raise AnnealError(f"criterion value {float(np.max(u))} exceeds the envelope bound u_max = {u_max}")
    # ((u + δ) / (u_max + δ))^J <= 1 because u <= u_max
    return np.exp(log_density_many(target, u) - target.J * math.log(u_max + target.delta))


def rejection_sample_target(
    target: TargetSpec,
    domain: BoundedDomain,
    criterion: DeterministicCriterion,
    n: int,
    rng: np.random.Generator,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
    batch: int = 65536,
    u_max: float = 1.0,
) -> RejectionSample:
    """Exact π^(J) draws: uniform proposals accepted with ((U+δ)/(u_max+δ))^J.

    ``u_max`` must bound U from above; the default 1 always does, a tighter
    bound only raises the acceptance rate.

    Stops at ``max_proposals`` and returns what it has; check ``complete``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    pilot = domain.sample_uniform(rng, min(batch, 10_000))
    rate = float(_acceptance_probs(target, criterion.many(pilot), u_max).mean())
    expected = n / rate if rate > 0 else math.inf
    if expected > DEFAULT_MAX_PROPOSALS:
        logger.warning(f"rejection sampling J={target.J:g} delta={target.delta:g}: about {expected:.3g} proposals expected")

    kept: list[np.ndarray] = []
    have = 0
    used = 0
    while have < n and used < max_proposals:
        size = int(min(batch, max_proposals - used))
        pts = domain.sample_uniform(rng, size)
        accept = rng.random(size) < _acceptance_probs(target, criterion.many(pts), u_max)
        used += size
        got = pts[accept]
        kept.append(got)
        have += len(got)
    points = np.concatenate(kept, axis=0)[:n] if kept else np.empty((0, domain.dim))
    result = RejectionSample(points=points, proposals=used, wanted=n)
    if not result.complete:
        logger.warning(f"rejection sampler budget exhausted: {len(points)}/{n} draws after {used} proposals")
    return result


# ----------------------------------------------------------------------------
# approximate-optimizer oracle
# ----------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    BORDERLINE = "borderline"


@dataclass(frozen=True)
class ExceedanceOracle:
    """Sorted criterion values at ``n_mc`` uniform points of the domain.

    The exceedance fraction of any θ is then a binary search. One reference
    sample may serve many points; each verdict keeps its own 3·se band.
    """

    sorted_u: np.ndarray

    @classmethod
    def build(cls, criterion: DeterministicCriterion, domain: BoundedDomain, n_mc: int, rng: np.random.Generator):
        if n_mc < 1000:
            raise ValueError(f"n_mc must be >= 1000, got {n_mc}")
        return cls(np.sort(criterion.many(domain.sample_uniform(rng, n_mc))))

    @property
    def n(self) -> int:
        return int(self.sorted_u.size)

    def fraction(self, u_theta, epsilon: float) -> np.ndarray:
        """Share of reference values strictly above U(θ) + ε."""
        above = self.n - np.searchsorted(self.sorted_u, np.asarray(u_theta) + epsilon, side="right")
        return above / self.n

    def verdicts(self, u_theta, epsilon: float, alpha: float) -> np.ndarray:
        p = np.atleast_1d(self.fraction(u_theta, epsilon))
        se = np.sqrt(p * (1.0 - p) / self.n)
        out = np.full(np.shape(p), Verdict.BORDERLINE.value, dtype=object)
        out[p + 3.0 * se <= alpha] = Verdict.YES.value
        out[p - 3.0 * se > alpha] = Verdict.NO.value
        return out


def is_approx_optimizer(
    theta: Coords,
    epsilon: float,
    alpha: float,
    criterion: DeterministicCriterion,
    domain: BoundedDomain,
    n_mc: int,
    rng: np.random.Generator,
) -> Verdict:
    """Is θ an (ε, α) approximate global optimizer? yes if p̂ + 3·se ≤ α,
    no if p̂ − 3·se > α, borderline otherwise."""
    oracle = ExceedanceOracle.build(criterion, domain, n_mc, rng)
    return Verdict(oracle.verdicts(criterion(as_coords(theta)), epsilon, alpha)[0])


@dataclass
class SigmaCheck:
    sigma: float
    n: int
    yes: int
    no: int
    borderline: int
    proposals: int

    @property
    def fraction(self) -> float:
        return self.yes / self.n

    @property
    def se(self) -> float:
        f = self.fraction
        return math.sqrt(f * (1.0 - f) / self.n)

    @property
    def threshold(self) -> float:
        return self.sigma - 3.0 * self.se

    @property
    def margin(self) -> float:
        return self.fraction - self.threshold

    @property
    def passed(self) -> bool:
        return self.fraction >= self.threshold


def empirical_sigma_check(
    spec: GuaranteeSpec,
    target: TargetSpec,
    criterion: DeterministicCriterion,
    domain: BoundedDomain,
    n_samples: int,
    n_mc: int,
    rng: np.random.Generator,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
    u_max: float = 1.0,
) -> SigmaCheck:
    """Share of exact π^(J) draws judged (ε, α) optimizers against σ − 3·se.

    Borderline verdicts count as failures. Raises SamplingBudgetError when
    the exact sampler cannot deliver ``n_samples``.
    """
    draws = rejection_sample_target(
        target, domain, criterion, n_samples, rng, max_proposals=max_proposals, u_max=u_max
    )
    if not draws.complete:
        raise SamplingBudgetError(len(draws.points), n_samples, draws.proposals)
    oracle = ExceedanceOracle.build(criterion, domain, n_mc, rng)
    verdicts = oracle.verdicts(criterion.many(draws.points), spec.epsilon, spec.alpha)
    check = SigmaCheck(
        sigma=sigma(spec, target),
        n=n_samples,
        yes=int(np.sum(verdicts == Verdict.YES.value)),
        no=int(np.sum(verdicts == Verdict.NO.value)),
        borderline=int(np.sum(verdicts == Verdict.BORDERLINE.value)),
        proposals=draws.proposals,
    )
    logger.info(
        f"sigma check eps={spec.epsilon:g} alpha={spec.alpha:g} J={target.J:g} delta={target.delta:g}: "
        f"fraction {check.fraction:.4f} vs sigma {check.sigma:.4f}, margin {check.margin:.4f}"
    )
    return check


# ----------------------------------------------------------------------------
# discretized chains
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Equal cells on [lower, upper] with the criterion taken at cell centres."""

    lower: float
    upper: float
    u: np.ndarray

    @property
    def cells(self) -> int:
        return int(self.u.size)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.cells + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])


def discretize(criterion: DeterministicCriterion, lower: float, upper: float, cells: int) -> Grid:
    if cells < 2:
        raise ValueError(f"need at least 2 cells, got {cells}")
    probe = Grid(float(lower), float(upper), np.zeros(cells))
    return Grid(float(lower), float(upper), criterion.many(probe.centers[:, None]))


def _check_cells(cells: int) -> None:
    if cells > MAX_GRID_CELLS:
        raise GridTooLargeError(f"{cells} cells requested; exact analysis is limited to {MAX_GRID_CELLS}")


def transition_matrix(target: TargetSpec, grid: Grid, proposal: Proposal) -> np.ndarray:
    """Exact MH matrix on the grid.

    The uniform component proposes each cell with mass 1/m; the walk
    component gets normal-CDF cell masses, and its mass beyond the box
    stays on the diagonal as rejection.
    """
    _check_cells(grid.cells)
    m = grid.cells
    log_pi = log_density_many(target, grid.u)
    accept = np.exp(np.minimum(0.0, log_pi[None, :] - log_pi[:, None]))
    q = np.zeros((m, m))
    if proposal.uniform_weight > 0.0:
        q += proposal.uniform_weight / m
    if proposal.walk_weight > 0.0:
        scale = float(proposal.scale[0])
        cdf = norm.cdf((grid.edges[None, :] - grid.centers[:, None]) / scale)
        q += proposal.walk_weight * np.diff(cdf, axis=1)
    P = q * accept
    np.fill_diagonal(P, 0.0)
    P[np.diag_indices(m)] = 1.0 - P.sum(axis=1)
    return P


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Grassmann–Taksar–Heyman elimination; subtraction-free, so accurate to
    a few ulps for irreducible chains."""
    A = np.array(P, dtype=float, copy=True)
    n = A.shape[0]
    for k in range(n - 1, 0, -1):
        s = A[k, :k].sum()
        if s <= 0.0:
            raise AnnealError(f"chain is reducible: state {k} cannot reach lower states")
        A[:k, k] /= s
        A[:k, :k] += np.outer(A[:k, k], A[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ A[:k, k]
    return pi / pi.sum()


def doeblin_constant(P: np.ndarray, pi: np.ndarray) -> float:
    """Largest β with P(i, ·) ≥ β π(·) for every row i."""
    mask = pi > 0.0
    return float(np.min(P[:, mask] / pi[None, mask]))


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def exact_tv_discretized(
    target: TargetSpec,
    grid: Grid,
    proposal: Proposal,
    k: int,
    initial: Optional[np.ndarray] = None,
    every: int = 1,
) -> list[tuple[int, float]]:
    """TV between the chain's law after each step and the exact stationary
    vector, for steps 0..k. ``initial`` defaults to a point mass on the cell
    of least stationary mass."""
    _check_cells(grid.cells)
    P = transition_matrix(target, grid, proposal)
    pi = stationary_distribution(P)
    if initial is None:
        mu = np.zeros(grid.cells)
        mu[int(np.argmin(pi))] = 1.0
    else:
        mu = np.asarray(initial, dtype=float)
    out = [(0, tv_distance(mu, pi))]
    for step in range(1, k + 1):
        mu = mu @ P
        if step % every == 0 or step == k:
            out.append((step, tv_distance(mu, pi)))
    return out


def mueller_two_cell_stationary(p: Sequence[float], delta: float) -> np.ndarray:
    """Exact θ-marginal of the J = 1 Müller chain on two cells.

    Each cell is proposed with probability 1/2 and g ~ Bernoulli(p_c). The
    chain over (cell, stored g) has four states; its stationary law is
    summed over g.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError(f"need two Bernoulli means strictly inside (0, 1), got {p}")
    P = np.zeros((4, 4))
    for c in range(2):
        for g in range(2):
            s = 2 * c + g
            for c2 in range(2):
                for g2 in range(2):
                    mass = 0.5 * (p[c2] if g2 else 1.0 - p[c2])
                    a = min(1.0, (g2 + delta) / (g + delta))
                    P[s, 2 * c2 + g2] += mass * a
                    P[s, s] += mass * (1.0 - a)
    joint = stationary_distribution(P)
    return joint.reshape(2, 2).sum(axis=1)


def two_sample_tv(
    a: np.ndarray, b: np.ndarray, bins: int, lower: Sequence[float], upper: Sequence[float]
) -> float:
    """Half L1 distance between the histograms of two samples on a common box."""
    a = np.atleast_2d(np.asarray(a, dtype=float).reshape(len(a), -1))
    b = np.atleast_2d(np.asarray(b, dtype=float).reshape(len(b), -1))
    ranges = list(zip(np.atleast_1d(lower), np.atleast_1d(upper)))
    ha, _ = np.histogramdd(a, bins=bins, range=ranges)
    hb, _ = np.histogramdd(b, bins=bins, range=ranges)
    return tv_distance(ha / ha.sum(), hb / hb.sum())


def grid_tv(samples: np.ndarray, grid: Grid, probs: np.ndarray, bins: int) -> float:
    """TV between a 1-D sample histogram and a fine-grid law pooled into the
    same ``bins``; the cell count must be a multiple of ``bins``."""
    if grid.cells % bins:
        raise ValueError(f"{grid.cells} cells do not pool evenly into {bins} bins")
    pooled = np.asarray(probs).reshape(bins, -1).sum(axis=1)
    hist, _ = np.histogram(np.asarray(samples).reshape(-1), bins=bins, range=(grid.lower, grid.upper))
    return tv_distance(hist / hist.sum(), pooled)


# ----------------------------------------------------------------------------
# check suites
# ----------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": _json_float(self.statistic),
            "threshold": _json_float(self.threshold),
            "pass": bool(self.passed),
            "detail": self.detail,
        }


def _json_float(value: float):
    value = float(value)
    return value if math.isfinite(value) else str(value)


@dataclass
class SuiteSettings:
    """Sizes for the check battery; the defaults are the full-scale ones."""

    seed: int = 0
    samples: int = 20_000
    mc: int = 10_000
    chain_steps: int = 100_000
    tv_steps: int = 100_000
    cells: int = 200
    battery: int = 20
    bijection_trials: int = 10_000
    min_j_trials: int = 1000
    workers: Optional[int] = None


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: list[CheckResult]
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "pass": self.passed,
            "elapsed_seconds": round(self.elapsed, 3),
            "checks": [c.to_json_dict() for c in self.checks],
        }


def _guarded(name: str, threshold: float, fn: Callable[[], CheckResult]) -> CheckResult:
    """Run one check; an oracle failure becomes a failed check, not a crash."""
    try:
        return fn()
    except (AnnealError, ValueError) as exc:
        logger.warning(f"{name}: {exc}")
        return CheckResult(name, math.nan, threshold, False, {"error": str(exc)})


def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(a), np.finfo(float).tiny)
    return float(np.max(np.where(a == b, 0.0, np.abs(a - b) / scale)))


def bijection_suite(settings: SuiteSettings) -> list[CheckResult]:
    rng = chain_rng(settings.seed, ORACLE_STREAM)
    n = settings.bijection_trials
    eps = rng.uniform(0.0, 1.0, n)
    alpha = rng.uniform(1e-3, 1.0, n)
    delta = np.exp(rng.uniform(math.log(1e-3), math.log(1e2), n))
    J = rng.uniform(1.0, 1000.0, n)

    eps_back = np.empty(n)
    alpha_back = np.empty(n)
    sig_direct = np.empty(n)
    sig_rho = np.empty(n)
    for i in range(n):
        spec = GuaranteeSpec(epsilon=eps[i], alpha=alpha[i])
        params: ProofParams = proof_params_from_spec(spec, delta[i])
        eps_back[i], alpha_back[i] = spec_from_proof_params(params, delta[i])
        t = TargetSpec(J=J[i], delta=delta[i])
        sig_direct[i] = sigma(spec, t)
        sig_rho[i] = sigma_from_proof_params(params, J[i], delta[i])

    checks = [
        CheckResult("bijection-roundtrip", max(_rel_err(eps, eps_back), _rel_err(alpha, alpha_back)), 1e-12, False),
        CheckResult("sigma-rho-form", _rel_err(sig_direct, sig_rho), 1e-12, False),
    ]
    for c in checks:
        c.passed = c.statistic <= c.threshold
        c.detail = {"trials": n}

    violations = 0
    m = settings.min_j_trials
    for _ in range(m):
        spec = GuaranteeSpec(
            epsilon=rng.uniform(0.01, 1.0), alpha=rng.uniform(0.01, 1.0), sigma_target=rng.uniform(0.5, 0.999)
        )
        d = float(np.exp(rng.uniform(math.log(1e-2), math.log(10.0))))
        J = min_J(spec, d)
        above = sigma(spec, TargetSpec(J=J, delta=d)) >= spec.sigma_target
        below = J == 1 or sigma(spec, TargetSpec(J=J - 1, delta=d)) < spec.sigma_target
        violations += not (above and below)
    checks.append(CheckResult("min-J-exact", violations, 0, violations == 0, {"trials": m}))
    return checks


def _uniform_chain_vs_rejection(settings: SuiteSettings, name: str) -> CheckResult:
    entry = get_function(name)
    target = TargetSpec(J=6, delta=0.5)
    proposal = Proposal.uniform(entry.domain)
    rng = chain_rng(settings.seed, ORACLE_STREAM + 1)
    start = entry.domain.sample_uniform(rng)
    run = run_schedule(
        start, Schedule.of((target.J, settings.chain_steps)), target, proposal, entry.criterion, rng
    )
    chain = np.array([row[2] for row in run.trace[1:]])
    exact = rejection_sample_target(
        target, entry.domain, entry.criterion, settings.chain_steps, rng, u_max=entry.max_value
    )
    tv = two_sample_tv(chain, exact.points, 40, entry.domain.lower, entry.domain.upper)
    return CheckResult(f"mcmc-vs-exact-{name}", tv, 0.03, tv <= 0.03, {"samples": settings.chain_steps})


def stationarity_suite(settings: SuiteSettings) -> list[CheckResult]:
    entry = get_function("bumps1d")
    grid = discretize(entry.criterion, 0.0, 1.0, settings.cells)
    target = TargetSpec(J=6, delta=0.5)
    exact = normalized_density(target, grid.u)
    checks = []
    proposals = {
        "uniform": Proposal.uniform(entry.domain),
        "walk": Proposal.walk(entry.domain, 0.05),
        "mix": Proposal.mixture(entry.domain, 0.5, 0.05),
    }
    for label, proposal in proposals.items():
        pi = stationary_distribution(transition_matrix(target, grid, proposal))
        err = float(np.max(np.abs(pi - exact)))
        checks.append(CheckResult(f"stationary-vector-{label}", err, 1e-10, err <= 1e-10, {"cells": grid.cells}))

    checks.append(_guarded("mcmc-vs-exact-bumps1d", 0.03, lambda: _uniform_chain_vs_rejection(settings, "bumps1d")))
    checks.append(_guarded("mueller-two-cell", 1e-2, lambda: _mueller_two_cell_check(settings)))
    return checks


def _mueller_two_cell_check(settings: SuiteSettings) -> CheckResult:
    p = (0.2, 0.7)
    delta = 0.5
    domain = BoundedDomain([0.0], [1.0])

    def sample_g(coords, rng):
        return 1.0 if rng.random() < p[0 if coords[0] < 0.5 else 1] else 0.0

    criterion = ExpectedValueCriterion(sample_g, name="two-cell bernoulli")
    target = TargetSpec(J=1, delta=delta)
    proposal = Proposal.uniform(domain)
    rng = chain_rng(settings.seed, ORACLE_STREAM + 2)
    run = run_schedule(
        np.array([0.25]), Schedule.of((1, settings.chain_steps)), target, proposal, criterion, rng, keep_trace=True
    )
    in_first = np.mean([row[2][0] < 0.5 for row in run.trace[1:]])
    exact = mueller_two_cell_stationary(p, delta)
    err = abs(float(in_first) - float(exact[0]))
    return CheckResult("mueller-two-cell", err, 1e-2, err <= 1e-2, {"exact": exact.tolist(), "steps": settings.chain_steps})


def tv_domination_suite(settings: SuiteSettings) -> list[CheckResult]:
    entry = get_function("bumps1d")
    grid = discretize(entry.criterion, 0.0, 1.0, settings.cells)
    target = TargetSpec(J=6, delta=0.5)
    proposal = Proposal.uniform(entry.domain)
    bound = minorization_constant(target, proposal.uniform_weight)

    curve = exact_tv_discretized(target, grid, proposal, settings.tv_steps)
    tv = np.array([t for _, t in curve])
    bounds = np.array([tv_bound_after(bound, k) for k, _ in curve])
    excess = float(np.max(tv - bounds))
    rise = float(np.max(np.diff(tv))) if len(tv) > 1 else 0.0

    P = transition_matrix(target, grid, proposal)
    doeblin = doeblin_constant(P, stationary_distribution(P))
    return [
        # exact TV bottoms out at rounding level while the bound keeps shrinking
        CheckResult("tv-below-bound", excess, 1e-12, excess <= 1e-12, {"steps": settings.tv_steps}),
        CheckResult("tv-monotone", rise, 1e-12, rise <= 1e-12),
        CheckResult("beta-below-doeblin", bound.beta, doeblin, bound.beta <= doeblin),
    ]


BATTERY_FUNCTIONS = ("bumps1d", "bumps2d", "rastrigin-scaled-2d")
# worst-case rejection acceptance exp(-8) keeps every battery config cheap
_BATTERY_LOG_COST = 8.0


def _battery_configs(settings: SuiteSettings) -> list[tuple[str, GuaranteeSpec, TargetSpec]]:
    rng = chain_rng(settings.seed, ORACLE_STREAM + 3)
    configs = []
    for _ in range(settings.battery):
        delta = float(rng.uniform(0.3, 2.0))
        j_max = max(1.0, _BATTERY_LOG_COST / math.log1p(1.0 / delta))
        target = TargetSpec(J=float(rng.uniform(1.0, j_max)), delta=delta)
        spec = GuaranteeSpec(epsilon=float(rng.uniform(0.05, 0.5)), alpha=float(rng.uniform(0.05, 0.5)))
        for name in BATTERY_FUNCTIONS:
            configs.append((name, spec, target))
    return configs


def _sigma_check_result(entry: RegistryEntry, spec: GuaranteeSpec, target: TargetSpec, settings: SuiteSettings, stream: int):
    rng = chain_rng(settings.seed, stream)
    check = empirical_sigma_check(
        spec, target, entry.criterion, entry.domain, settings.samples, settings.mc, rng, u_max=entry.max_value
    )
    return CheckResult(
        f"sigma-bound-{entry.name}-eps{spec.epsilon:.3g}-alpha{spec.alpha:.3g}-J{target.J:.3g}-delta{target.delta:.3g}",
        check.fraction,
        check.threshold,
        check.passed,
        {
            "sigma": check.sigma,
            "se": check.se,
            "margin": check.margin,
            "yes": check.yes,
            "no": check.no,
            "borderline": check.borderline,
            "proposals": check.proposals,
        },
    )


def sigma_bound_suite(settings: SuiteSettings) -> list[CheckResult]:
    """The worked bumps1d case, the near-tight step function, then the random battery."""
    fixed = (GuaranteeSpec(epsilon=0.1, alpha=0.1), TargetSpec(J=30, delta=0.5))
    jobs = [(get_function("bumps1d"), *fixed), (get_function("step1d"), *fixed)]
    jobs += [(get_function(name), spec, target) for name, spec, target in _battery_configs(settings)]

    def run(index: int) -> CheckResult:
        entry, spec, target = jobs[index]
        return _guarded(
            f"sigma-bound-{entry.name}",
            math.nan,
            lambda: _sigma_check_result(entry, spec, target, settings, ORACLE_STREAM + 100 + index),
        )

    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        results = list(pool.map(run, range(len(jobs))))
    margins = [r.detail["margin"] for r in results if r.passed]
    if margins:
        logger.info(f"sigma-bound: smallest margin {min(margins):.4f} over {len(margins)} passing checks")
    return results


_SUITE_FUNCS = {
    "bijection": bijection_suite,
    "stationarity": stationarity_suite,
    "tv-domination": tv_domination_suite,
    "sigma-bound": sigma_bound_suite,
}


def run_suite(suite: str, settings: Optional[SuiteSettings] = None) -> VerificationReport:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    settings = settings or SuiteSettings()
    names = list(_SUITE_FUNCS) if suite == "all" else [suite]
    started = time.perf_counter()
    checks: list[CheckResult] = []
    for i, name in enumerate(names):
        log_progress("verify", f"suite {name}", 100.0 * i / len(names))
        checks.extend(_SUITE_FUNCS[name](settings))
    report = VerificationReport(suite, settings.seed, checks, time.perf_counter() - started)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.warning(f"{len(failed)} of {len(checks)} checks failed: {', '.join(failed)}")
    else:
        logger.info(f"all {len(checks)} checks passed in {report.elapsed:.1f}s")
    return report
