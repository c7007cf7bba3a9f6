"""Optimization domain and criterion types.

Criteria are plain callables over numpy coordinate arrays. ``Point`` is the
validated carrier used by chain states and results; anything that accepts a
point also accepts a raw coordinate array.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import Any, Callable, Optional, Union

import numpy as np

from .errors import CriterionRangeError, DomainError


def check_unit(value: float, where: str) -> float:
    # written so that NaN fails too
    if not (0.0 <= value <= 1.0):
        raise CriterionRangeError(value, where)
    return value


def check_unit_array(values: np.ndarray, where: str) -> np.ndarray:
    bad = ~((values >= 0.0) & (values <= 1.0))
    if bad.any():
        raise CriterionRangeError(float(values[np.argmax(bad)]), where)
    return values


@dataclass(frozen=True)
class BoundedDomain:
    """Axis-aligned box ``[lower, upper]`` in R^N with strictly positive volume."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lower.ndim != 1 or lower.shape != upper.shape or lower.size < 1:
            raise DomainError(
                f"lower and upper must be 1-D vectors of equal length >= 1, got {lower.shape} and {upper.shape}"
            )
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise DomainError("domain bounds must be finite (unbounded domains are not supported)")
        if np.any(lower >= upper):
            raise DomainError(f"need lower[i] < upper[i] for every axis, got lower={lower}, upper={upper}")
        volume = float(np.prod(upper - lower))
        if not (np.isfinite(volume) and volume > 0.0):
            raise DomainError(f"domain volume must be finite and positive, got {volume}")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, low: float, high: float, dim: int) -> "BoundedDomain":
        return cls(np.full(dim, low, dtype=float), np.full(dim, high, dtype=float))

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, coords: np.ndarray) -> bool:
        coords = np.asarray(coords, dtype=float)
        return bool(
            coords.shape == self.lower.shape and np.all(coords >= self.lower) and np.all(coords <= self.upper)
        )

    def point(self, coords: Any) -> "Point":
        return Point(coords, self)

    def sample_uniform(self, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
        """One point of shape (N,) or, with ``n``, a batch of shape (n, N)."""
        if n is None:
            return rng.uniform(self.lower, self.upper)
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))

    def mc_volume(self, rng: np.random.Generator, n: int, outer: "BoundedDomain") -> tuple[float, float]:
        """Hit-rate estimate of this box's volume from uniform draws in ``outer``.

        Returns (estimate, standard error). Used as a sanity oracle only.
        """
        if outer.dim != self.dim:
            raise DomainError("outer box has a different dimension")
        pts = outer.sample_uniform(rng, n)
        inside = np.all((pts >= self.lower) & (pts <= self.upper), axis=1)
        p_hat = float(inside.mean())
        se = float(np.sqrt(p_hat * (1.0 - p_hat) / n))
        return p_hat * outer.volume(), se * outer.volume()


@dataclass(frozen=True, eq=False)
class Point:
    coords: np.ndarray
    domain: InitVar[Optional[BoundedDomain]] = None

    def __post_init__(self, domain: Optional[BoundedDomain]):
        coords = np.atleast_1d(np.array(self.coords, dtype=float))
        if coords.ndim != 1:
            raise DomainError(f"a point needs a 1-D coordinate vector, got shape {coords.shape}")
        if domain is not None and not domain.contains(coords):
            raise DomainError(f"point {coords.tolist()} lies outside the domain")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return int(self.coords.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Point):
            return NotImplemented
        return bool(np.array_equal(self.coords, other.coords))

    def tolist(self) -> list[float]:
        return [float(c) for c in self.coords]


Coords = Union[Point, np.ndarray]


def as_coords(theta: Coords) -> np.ndarray:
    return theta.coords if isinstance(theta, Point) else np.asarray(theta, dtype=float)


@dataclass(frozen=True)
class DeterministicCriterion:
    """U: domain -> [0, 1].

    ``fn`` receives a coordinate vector of shape (N,), or a batch of shape
    (m, N) when ``vectorized`` is set. It must be pure: concurrent chains call
    it without locking.
    """

    fn: Callable[[np.ndarray], Any]
    vectorized: bool = False
    name: str = "criterion"

    def __call__(self, theta: Coords) -> float:
        coords = as_coords(theta)
        if self.vectorized:
            value = float(np.asarray(self.fn(coords[None, :]), dtype=float).reshape(-1)[0])
        else:
            value = float(self.fn(coords))
        return check_unit(value, self.name)

    def many(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if self.vectorized:
            values = np.asarray(self.fn(thetas), dtype=float).reshape(-1)
        else:
            values = np.fromiter((float(self.fn(row)) for row in thetas), dtype=float, count=len(thetas))
        return check_unit_array(values, self.name)


@dataclass(frozen=True)
class ExpectedValueCriterion:
    """U(θ) = E[g(x, θ)], x ~ p_x(·; θ), available only through single draws.

    ``sample_g(coords, rng)`` returns one draw of g in [0, 1]; all randomness
    must come from ``rng``.
    """

    sample_g: Callable[[np.ndarray, np.random.Generator], float]
    name: str = "expected-value criterion"

    def draw(self, theta: Coords, rng: np.random.Generator) -> float:
        return check_unit(float(self.sample_g(as_coords(theta), rng)), f"{self.name} draw")

    def draws(self, theta: Coords, n: int, rng: np.random.Generator) -> np.ndarray:
        coords = as_coords(theta)
        return np.array([self.draw(coords, rng) for _ in range(n)], dtype=float)


Criterion = Union[DeterministicCriterion, ExpectedValueCriterion]


def scale_criterion(
    raw: Callable[[np.ndarray], Any],
    known_lower: float,
    known_upper: float,
    *,
    vectorized: bool = False,
    name: str = "scaled criterion",
) -> DeterministicCriterion:
    """Affine map of a bounded criterion onto [0, 1]; maximizers are preserved.

    The caller asserts ``known_lower <= raw(θ) <= known_upper`` everywhere; a
    violation surfaces as ``CriterionRangeError`` at evaluation time.
    """
    lo = float(known_lower)
    hi = float(known_upper)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise DomainError("criterion bounds must be finite")
    if lo >= hi:
        raise DomainError(f"known_lower must be < known_upper, got [{lo}, {hi}]")
    span = hi - lo

    def scaled(x):
        return (np.asarray(raw(x), dtype=float) - lo) / span

    return DeterministicCriterion(scaled, vectorized=vectorized, name=name)


def deterministic_as_expected(criterion: DeterministicCriterion) -> ExpectedValueCriterion:
    """Zero-variance expected-value view of a deterministic criterion.

    Draws consume no randomness, so a Müller chain over it follows the
    deterministic chain draw for draw.
    """

    def sample_g(coords, _rng):
        return criterion(coords)

    return ExpectedValueCriterion(sample_g, name=f"{criterion.name} (exact draws)")


def estimate_expected_value(
    c: ExpectedValueCriterion, theta: Coords, n: int, rng: np.random.Generator
) -> float:
    """Monte Carlo mean of ``n`` draws of g at ``theta``. Reporting only."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(np.mean(c.draws(theta, n, rng)))
