"""Metropolis–Hastings chains for π^(J) and staged cooling schedules.

Per-step draw order (fixed, so seeded traces reproduce):

1. proposal: for a mixture, one uniform picks the component; then that
   component's draws (N uniforms for the independence component, N normals
   for the walk);
2. a proposal outside the box ends the step here as a rejection;
3. the criterion evaluation, or J draws of g for the Müller kernel;
4. one acceptance uniform, drawn whatever the log ratio.

Every proposal kind here is symmetric (the mixture of a uniform
independence proposal and a Gaussian walk included), so the proposal
density terms of the MH ratio cancel.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from .domain import BoundedDomain, Coords, DeterministicCriterion, ExpectedValueCriterion, Point, as_coords
from .errors import ConfigError, GuaranteeError
from .logs import get_logger, log_progress
from .rng import chain_rng
from .target import TargetSpec, acceptance_log_ratio

logger = get_logger("sampler")

UNIFORM = "uniform"
WALK = "walk"
MIXTURE = "mix"


@dataclass(frozen=True)
class Proposal:
    """Symmetric proposal on a box.

    ``walk_weight`` is the probability of the Gaussian walk component; the
    uniform independence component gets the rest and is what certificates
    are built on.
    """

    kind: str
    domain: BoundedDomain
    scale: Optional[np.ndarray] = None
    walk_weight: float = 0.0

    def __post_init__(self):
        if self.kind not in (UNIFORM, WALK, MIXTURE):
            raise ConfigError(f"unknown proposal kind {self.kind!r}")
        if self.kind == UNIFORM:
            object.__setattr__(self, "walk_weight", 0.0)
            object.__setattr__(self, "scale", None)
            return
        if self.scale is None:
            raise ConfigError(f"{self.kind} proposal needs a step scale")
        scale = np.broadcast_to(np.asarray(self.scale, dtype=float), (self.domain.dim,)).copy()
        if not np.all(np.isfinite(scale) & (scale > 0.0)):
            raise ConfigError(f"walk scale must be positive and finite, got {scale}")
        scale.setflags(write=False)
        object.__setattr__(self, "scale", scale)
        if self.kind == WALK:
            object.__setattr__(self, "walk_weight", 1.0)
        elif not (0.0 <= self.walk_weight < 1.0):
            raise ConfigError(f"mixture walk weight must lie in [0, 1), got {self.walk_weight}")

    @classmethod
    def uniform(cls, domain: BoundedDomain) -> "Proposal":
        return cls(UNIFORM, domain)

    @classmethod
    def walk(cls, domain: BoundedDomain, scale) -> "Proposal":
        return cls(WALK, domain, scale=scale)

    @classmethod
    def mixture(cls, domain: BoundedDomain, walk_weight: float, scale) -> "Proposal":
        return cls(MIXTURE, domain, scale=scale, walk_weight=walk_weight)

    @classmethod
    def parse(cls, text: str, domain: BoundedDomain) -> "Proposal":
        """``uniform`` | ``walk:<scale>`` | ``mix:<w>,<scale>``; scales are
        fractions of each axis width."""
        kind, _, args = text.strip().partition(":")
        try:
            if kind == UNIFORM and not args:
                return cls.uniform(domain)
            if kind == WALK:
                return cls.walk(domain, float(args) * domain.widths)
            if kind == MIXTURE:
                w, s = args.split(",")
                return cls.mixture(domain, float(w), float(s) * domain.widths)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"cannot parse proposal {text!r}: {exc}") from exc
        raise ConfigError(f"proposal must be uniform, walk:<scale> or mix:<w>,<scale>, got {text!r}")

    @property
    def uniform_weight(self) -> float:
        return 1.0 - self.walk_weight

    def describe(self) -> str:
        if self.kind == UNIFORM:
            return "uniform-independence"
        scale = np.array2string(self.scale, precision=6)
        if self.kind == WALK:
            return f"gaussian-walk(scale={scale})"
        return f"mixture(walk_weight={self.walk_weight}, scale={scale})"

    def propose(self, coords: np.ndarray, rng: np.random.Generator) -> Optional[np.ndarray]:
        """A proposed point, or None when it falls outside the box."""
        use_walk = self.kind == WALK
        if self.kind == MIXTURE:
            use_walk = rng.random() < self.walk_weight
        if not use_walk:
            return self.domain.sample_uniform(rng)
        proposed = coords + self.scale * rng.standard_normal(self.domain.dim)
        if not self.domain.contains(proposed):
            return None
        return proposed


@dataclass(frozen=True)
class Stage:
    J: float
    steps: int

    def __post_init__(self):
        if not (self.J >= 1.0 and math.isfinite(self.J)):
            raise ConfigError(f"stage J must be >= 1, got {self.J}")
        if self.steps < 0:
            raise ConfigError(f"stage steps must be >= 0, got {self.steps}")


@dataclass(frozen=True)
class Schedule:
    """Finite ladder of homogeneous stages; J never decreases."""

    stages: tuple[Stage, ...]

    def __post_init__(self):
        stages = tuple(s if isinstance(s, Stage) else Stage(*s) for s in self.stages)
        if not stages:
            raise ConfigError("a schedule needs at least one stage")
        for a, b in zip(stages, stages[1:]):
            if b.J < a.J:
                raise ConfigError(f"stage J must be non-decreasing, got {a.J} then {b.J}")
        object.__setattr__(self, "stages", stages)

    @classmethod
    def of(cls, *pairs: Sequence[float]) -> "Schedule":
        return cls(tuple(Stage(float(J), int(k)) for J, k in pairs))

    @property
    def final(self) -> Stage:
        return self.stages[-1]

    @property
    def total_steps(self) -> int:
        return sum(s.steps for s in self.stages)

    def as_pairs(self) -> list[tuple[float, int]]:
        return [(s.J, s.steps) for s in self.stages]


def default_schedule(J_final: float, k_final: int) -> Schedule:
    """J ∈ {1, 2, 4, ...} below J_final with k_final // 10 steps each (at least
    one), then (J_final, k_final). Warm-up stages are outside any certificate."""
    if not J_final >= 1.0:
        raise ConfigError(f"J_final must be >= 1, got {J_final}")
    if k_final < 1:
        raise ConfigError(f"k_final must be >= 1, got {k_final}")
    warm = max(1, k_final // 10)
    stages = []
    J = 1
    while J < J_final:
        stages.append(Stage(float(J), warm))
        J *= 2
    stages.append(Stage(float(J_final), int(k_final)))
    return Schedule(tuple(stages))


@dataclass(frozen=True)
class ChainState:
    """Current point plus what the kernel cached about it.

    Deterministic chains cache ``u_cached`` = U(theta). Müller chains cache
    ``log_product_cached`` = Σ log(g_i + δ) over the J draws made when theta
    was accepted (or at the last stage boundary) and keep the draws' mean in
    ``draw_mean`` for reporting. ``rng_state`` is filled in on the final
    state of a run.
    """

    theta: Point
    u_cached: Optional[float] = None
    log_product_cached: Optional[float] = None
    draw_mean: Optional[float] = None
    step_index: int = 0
    accepted: int = 0
    rng_state: Optional[dict] = None

    @property
    def value(self) -> float:
        return self.u_cached if self.u_cached is not None else self.draw_mean

    @property
    def is_mueller(self) -> bool:
        return self.log_product_cached is not None


Criterion = Union[DeterministicCriterion, ExpectedValueCriterion]


def _accept(log_ratio: float, rng: np.random.Generator) -> bool:
    u = rng.random()
    return log_ratio >= 0.0 or u < math.exp(log_ratio)


def _integer_J(target: TargetSpec) -> int:
    if not target.is_integer:
        raise GuaranteeError(f"the Müller kernel needs an integer J, got {target.J}; use TargetSpec.for_mueller()")
    return int(target.J)


def _draw_log_product(
    criterion: ExpectedValueCriterion, coords: np.ndarray, J: int, delta: float, rng: np.random.Generator
) -> tuple[float, float]:
    draws = [criterion.draw(coords, rng) for _ in range(J)]
    # fsum of J equal terms rounds exactly like J * log(g + δ)
    log_prod = math.fsum(math.log(g + delta) for g in draws)
    mean = draws[0] if min(draws) == max(draws) else math.fsum(draws) / J
    return log_prod, mean


def init_state(theta: Coords, target: TargetSpec, criterion: Criterion, rng: np.random.Generator) -> ChainState:
    point = theta if isinstance(theta, Point) else Point(theta)
    if isinstance(criterion, ExpectedValueCriterion):
        log_prod, mean = _draw_log_product(criterion, point.coords, _integer_J(target), target.delta, rng)
        return ChainState(point, log_product_cached=log_prod, draw_mean=mean)
    return ChainState(point, u_cached=criterion(point))


def mh_step_deterministic(
    state: ChainState,
    target: TargetSpec,
    proposal: Proposal,
    criterion: DeterministicCriterion,
    rng: np.random.Generator,
) -> ChainState:
    step = state.step_index + 1
    proposed = proposal.propose(state.theta.coords, rng)
    if proposed is None:
        return replace(state, step_index=step)
    u_new = criterion(proposed)
    if _accept(acceptance_log_ratio(target, state.u_cached, u_new), rng):
        return ChainState(Point(proposed), u_cached=u_new, step_index=step, accepted=state.accepted + 1)
    return replace(state, step_index=step)


def mh_step_mueller(
    state: ChainState,
    target: TargetSpec,
    proposal: Proposal,
    criterion: ExpectedValueCriterion,
    rng: np.random.Generator,
) -> ChainState:
    """Stored-product kernel: the current point's product is never redrawn on
    rejection."""
    J = _integer_J(target)
    step = state.step_index + 1
    proposed = proposal.propose(state.theta.coords, rng)
    if proposed is None:
        return replace(state, step_index=step)
    log_prod, mean = _draw_log_product(criterion, proposed, J, target.delta, rng)
    if _accept(log_prod - state.log_product_cached, rng):
        return ChainState(
            Point(proposed),
            log_product_cached=log_prod,
            draw_mean=mean,
            step_index=step,
            accepted=state.accepted + 1,
        )
    return replace(state, step_index=step)


class TraceWriter:
    """CSV sink ``step,J,x0..x{N-1},value``, flushed after every row."""

    def __init__(self, path: Union[str, Path], dim: int):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(["step", "J", *[f"x{i}" for i in range(dim)], "value"])
        self._fh.flush()

    def write(self, step: int, J: float, coords: np.ndarray, value: float) -> None:
        self._writer.writerow([step, repr(float(J)), *[repr(float(c)) for c in coords], repr(float(value))])
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


@dataclass
class RunResult:
    final_state: ChainState
    trace: list[tuple[int, float, np.ndarray, float]] = field(default_factory=list)
    best_point: Optional[Point] = None
    best_value: float = -math.inf
    total_steps: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.final_state.accepted / self.total_steps if self.total_steps else 0.0


def run_schedule(
    initial: Coords,
    schedule: Schedule,
    target_final: TargetSpec,
    proposal: Proposal,
    criterion: Criterion,
    rng: np.random.Generator,
    *,
    decimate: int = 1,
    sink: Optional[TraceWriter] = None,
    keep_trace: bool = True,
) -> RunResult:
    """Run every stage's homogeneous kernel in order.

    Zero-length stages are skipped outright. A Müller chain redraws J_stage
    values at the current point at each stage boundary. The trace holds
    step 0 and every ``decimate``-th step after it.
    """
    if schedule.final.J != target_final.J:
        raise ConfigError(f"schedule ends at J = {schedule.final.J} but the target has J = {target_final.J}")
    if decimate < 1:
        raise ConfigError(f"decimate must be >= 1, got {decimate}")
    mueller = isinstance(criterion, ExpectedValueCriterion)
    step_fn = mh_step_mueller if mueller else mh_step_deterministic
    start = initial if isinstance(initial, Point) else Point(initial, proposal.domain)
    if not proposal.domain.contains(start.coords):
        raise ConfigError(f"initial point {start.tolist()} lies outside the domain")

    result = RunResult(final_state=None)  # type: ignore[arg-type]
    state: Optional[ChainState] = None

    def record(s: ChainState, J: float) -> None:
        if s.value > result.best_value:
            result.best_value = s.value
            result.best_point = s.theta
        if s.step_index % decimate:
            return
        if keep_trace:
            result.trace.append((s.step_index, J, s.theta.coords, s.value))
        if sink is not None:
            sink.write(s.step_index, J, s.theta.coords, s.value)

    active = [s for s in schedule.stages if s.steps > 0]
    for n, stage in enumerate(active, start=1):
        t = TargetSpec(J=stage.J, delta=target_final.delta)
        if state is None:
            state = init_state(start, t, criterion, rng)
            record(state, t.J)
        elif mueller:
            log_prod, mean = _draw_log_product(criterion, state.theta.coords, _integer_J(t), t.delta, rng)
            state = replace(state, log_product_cached=log_prod, draw_mean=mean)
        log_progress("anneal", f"stage {n}/{len(active)}: J={stage.J:g}, {stage.steps} steps", 100.0 * (n - 1) / len(active))
        for _ in range(stage.steps):
            state = step_fn(state, t, proposal, criterion, rng)
            record(state, t.J)

    if state is None:
        state = init_state(start, target_final, criterion, rng)
        record(state, target_final.J)

    result.final_state = replace(state, rng_state=rng.bit_generator.state)
    result.total_steps = state.step_index
    logger.debug(
        f"run finished: {result.total_steps} steps, acceptance {result.acceptance_rate:.3f}, best {result.best_value:.6g}"
    )
    return result


def run_replicas(
    n: int,
    seed: int,
    schedule: Schedule,
    target_final: TargetSpec,
    proposal: Proposal,
    criterion: Criterion,
    *,
    initial: Optional[Coords] = None,
    max_workers: Optional[int] = None,
    decimate: int = 1,
    keep_trace: bool = False,
) -> list[RunResult]:
    """Independent chains on replica streams 0..n-1, one thread each.

    Without ``initial`` each replica starts from a uniform draw of its own
    stream. Results come back in replica order.
    """
    if n < 1:
        raise ConfigError(f"need at least one replica, got {n}")

    def one(index: int) -> RunResult:
        rng = chain_rng(seed, index)
        start = initial if initial is not None else proposal.domain.sample_uniform(rng)
        return run_schedule(
            start, schedule, target_final, proposal, criterion, rng, decimate=decimate, keep_trace=keep_trace
        )

    workers = max_workers or min(n, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, range(n)))
    logger.info(f"{n} replicas done; best value {max(r.best_value for r in results):.6g}")
    return results


def best_replica(results: Sequence[RunResult]) -> int:
    return int(np.argmax([r.best_value for r in results]))
