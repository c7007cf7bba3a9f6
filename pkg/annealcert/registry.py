"""Named test functions with closed forms and known maximizers.

All entries take values in [0, 1] by construction. Names:

* ``bumps1d``   max of three Gaussian bumps on [0, 1]; max 0.95 at θ = 0.62.
* ``bumps2d``   max of four Gaussian bumps on [0, 1]^2; max 0.95 at (0.7, 0.3).
* ``step1d``    two-level step on [0, 1]: 0.1 + 0.1 + 1e-3 on [0, 0.1001), 0.1
                elsewhere. Built to make the confidence bound nearly tight
                for (ε, α) = (0.1, 0.1).
* ``rastrigin-scaled-<N>d``  1 − R(θ)/(46.2144·N) on [−5.12, 5.12]^N, where
                R is Rastrigin; max 1 at the origin.
* ``ackley-scaled-<N>d``     1 − A(θ)/(20 + e) on [−5, 5]^N, where A is
                Ackley; max 1 at the origin.

Any name takes a ``-noisy`` suffix: the expected-value version whose draws
are Bernoulli(U(θ)) on {0, 1}.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .domain import (
    BoundedDomain,
    DeterministicCriterion,
    ExpectedValueCriterion,
    scale_criterion,
)


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    domain: BoundedDomain
    criterion: DeterministicCriterion
    maximizers: tuple[tuple[float, ...], ...]
    max_value: float
    closed_form: str
    noisy: Optional[ExpectedValueCriterion] = field(default=None)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def is_noisy(self) -> bool:
        return self.noisy is not None


def _bumps(centers: np.ndarray, widths: np.ndarray, heights: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    def fn(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        return (heights[None, :] * np.exp(-d2 / (2.0 * widths[None, :] ** 2))).max(axis=1)

    return fn


def bumps1d() -> RegistryEntry:
    centers = np.array([[0.15], [0.62], [0.85]])
    widths = np.array([0.06, 0.025, 0.04])
    heights = np.array([0.55, 0.95, 0.7])
    return RegistryEntry(
        name="bumps1d",
        domain=BoundedDomain([0.0], [1.0]),
        criterion=DeterministicCriterion(_bumps(centers, widths, heights), vectorized=True, name="bumps1d"),
        maximizers=((0.62,),),
        max_value=0.95,
        closed_form="max_k h_k exp(-(θ-c_k)^2 / (2 s_k^2)), c=(0.15,0.62,0.85), s=(0.06,0.025,0.04), h=(0.55,0.95,0.7)",
    )


def bumps2d() -> RegistryEntry:
    centers = np.array([[0.7, 0.3], [0.2, 0.2], [0.3, 0.8], [0.8, 0.8]])
    widths = np.array([0.05, 0.1, 0.08, 0.06])
    heights = np.array([0.95, 0.6, 0.8, 0.7])
    return RegistryEntry(
        name="bumps2d",
        domain=BoundedDomain([0.0, 0.0], [1.0, 1.0]),
        criterion=DeterministicCriterion(_bumps(centers, widths, heights), vectorized=True, name="bumps2d"),
        maximizers=((0.7, 0.3),),
        max_value=0.95,
        closed_form="max_k h_k exp(-|θ-c_k|^2 / (2 s_k^2)) over four bumps, top h=0.95 at (0.7, 0.3)",
    )


def step_criterion(epsilon: float = 0.1, alpha: float = 0.1, low: float = 0.1) -> DeterministicCriterion:
    """Two-level step: the high plateau covers just over an α fraction of [0, 1]
    and sits just over ε above the low plateau."""
    width = min(1.0, alpha * 1.001)
    high = min(1.0, low + epsilon + 1e-3)

    def fn(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return np.where(x[:, 0] < width, high, low)

    return DeterministicCriterion(fn, vectorized=True, name=f"step(eps={epsilon}, alpha={alpha})")


def step1d() -> RegistryEntry:
    criterion = step_criterion()
    return RegistryEntry(
        name="step1d",
        domain=BoundedDomain([0.0], [1.0]),
        criterion=criterion,
        maximizers=((0.05,),),
        max_value=criterion(np.array([0.05])),
        closed_form="0.201 on [0, 0.1001), 0.1 elsewhere (maximizer set is the whole plateau)",
    )


RASTRIGIN_AXIS_BOUND = 26.2144 + 20.0  # 5.12^2 + max of 10 - 10 cos(.)


def rastrigin_scaled(dim: int) -> RegistryEntry:
    def rastrigin(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return 10.0 * dim + (x**2 - 10.0 * np.cos(2.0 * np.pi * x)).sum(axis=1)

    name = f"rastrigin-scaled-{dim}d"
    return RegistryEntry(
        name=name,
        domain=BoundedDomain.cube(-5.12, 5.12, dim),
        criterion=scale_criterion(
            lambda x: -rastrigin(x), -RASTRIGIN_AXIS_BOUND * dim, 0.0, vectorized=True, name=name
        ),
        maximizers=(tuple([0.0] * dim),),
        max_value=1.0,
        closed_form=f"1 - R(θ)/({RASTRIGIN_AXIS_BOUND}·N), R(θ) = 10N + Σ(θ_i^2 - 10 cos 2πθ_i)",
    )


ACKLEY_BOUND = 20.0 + math.e


def ackley_scaled(dim: int) -> RegistryEntry:
    def ackley(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return (
            -20.0 * np.exp(-0.2 * np.sqrt(np.mean(x**2, axis=1)))
            - np.exp(np.mean(np.cos(2.0 * np.pi * x), axis=1))
            + 20.0
            + np.e
        )

    name = f"ackley-scaled-{dim}d"
    return RegistryEntry(
        name=name,
        domain=BoundedDomain.cube(-5.0, 5.0, dim),
        # A(0) evaluates to a few ulps off zero, so clip that side only
        criterion=scale_criterion(
            lambda x: -np.maximum(ackley(x), 0.0), -ACKLEY_BOUND, 0.0, vectorized=True, name=name
        ),
        maximizers=(tuple([0.0] * dim),),
        max_value=1.0,
        closed_form="1 - A(θ)/(20+e), A = -20 exp(-0.2 sqrt(mean θ^2)) - exp(mean cos 2πθ) + 20 + e",
    )


def bernoulli_noise(criterion: DeterministicCriterion) -> ExpectedValueCriterion:
    """Draws 1 with probability U(θ), else 0; the expectation is U(θ)."""

    def sample_g(coords, rng):
        return 1.0 if rng.random() < criterion(coords) else 0.0

    return ExpectedValueCriterion(sample_g, name=f"{criterion.name}-noisy")


_FIXED = {"bumps1d": bumps1d, "bumps2d": bumps2d, "step1d": step1d}
_FAMILIES = {"rastrigin-scaled": rastrigin_scaled, "ackley-scaled": ackley_scaled}
_FAMILY_RE = re.compile(r"^(?P<family>[a-z-]+?)(?:-(?P<dim>\d+)d)?$")


def available() -> list[str]:
    names = sorted(_FIXED)
    names += [f"{fam}-<N>d" for fam in sorted(_FAMILIES)]
    return names


def get_function(name: str, dim: Optional[int] = None) -> RegistryEntry:
    """Look up a registry entry; ``dim`` fills in the dimension of a family name."""
    noisy = name.endswith("-noisy")
    base = name[: -len("-noisy")] if noisy else name

    if base in _FIXED:
        entry = _FIXED[base]()
        if dim is not None and dim != entry.dim:
            raise KeyError(f"{base} is fixed at dimension {entry.dim}, got --dim {dim}")
    else:
        match = _FAMILY_RE.match(base)
        family = match.group("family") if match else None
        if family not in _FAMILIES:
            raise KeyError(f"unknown function {name!r}; available: {', '.join(available())}")
        suffix_dim = int(match.group("dim")) if match.group("dim") else None
        if suffix_dim is not None and dim is not None and suffix_dim != dim:
            raise KeyError(f"{name} names dimension {suffix_dim} but --dim is {dim}")
        resolved = suffix_dim or dim
        if resolved is None or resolved < 1:
            raise KeyError(f"{family} needs a dimension: use {family}-<N>d or --dim")
        entry = _FAMILIES[family](resolved)

    if noisy:
        entry = RegistryEntry(
            name=f"{entry.name}-noisy",
            domain=entry.domain,
            criterion=entry.criterion,
            maximizers=entry.maximizers,
            max_value=entry.max_value,
            closed_form=f"Bernoulli draws with mean {entry.closed_form}",
            noisy=bernoulli_noise(entry.criterion),
        )
    return entry
