import math

import numpy as np
import pytest
from pydantic import ValidationError

from annealcert.errors import CriterionRangeError
from annealcert.target import (
    TargetSpec,
    acceptance_log_ratio,
    log_density_many,
    log_unnormalized_density,
    normalized_density,
)


@pytest.mark.parametrize(
    "J, delta, u, expected",
    [(1, 1.0, 0.0, 0.0), (3, 0.5, 0.5, 0.0), (20, 0.5, 1.0, 20 * math.log(1.5))],
)
def test_log_density_examples(J, delta, u, expected):
    assert log_unnormalized_density(TargetSpec(J=J, delta=delta), u) == pytest.approx(expected, abs=1e-12)


def test_log_density_worked_value():
    assert log_unnormalized_density(TargetSpec(J=20, delta=0.5), 1.0) == pytest.approx(8.1093, abs=1e-4)


def test_acceptance_ratio_example():
    r = acceptance_log_ratio(TargetSpec(J=3, delta=0.5), 0.2, 0.1)
    assert r == pytest.approx(3.0 * math.log(0.6 / 0.7), rel=1e-12)
    assert math.exp(r) == pytest.approx(0.6297, abs=1e-4)


def test_equal_values_always_accept():
    assert acceptance_log_ratio(TargetSpec(J=50, delta=0.1), 0.37, 0.37) == 0.0


def test_ratio_antisymmetric():
    t = TargetSpec(J=7.5, delta=0.3)
    assert acceptance_log_ratio(t, 0.2, 0.9) == -acceptance_log_ratio(t, 0.9, 0.2)


def test_gap_grows_with_J():
    gaps = [
        log_unnormalized_density(TargetSpec(J=J, delta=0.5), 0.8) - log_unnormalized_density(TargetSpec(J=J, delta=0.5), 0.3)
        for J in (1, 2, 5, 10, 100)
    ]
    assert all(g > 0 for g in gaps)
    assert all(b > a for a, b in zip(gaps, gaps[1:]))


@pytest.mark.parametrize("J, delta", [(0.0, 1.0), (0.5, 1.0), (2.0, 0.0), (2.0, -1.0), (float("inf"), 1.0)])
def test_invalid_targets(J, delta):
    with pytest.raises(ValidationError):
        TargetSpec(J=J, delta=delta)


def test_out_of_range_value():
    with pytest.raises(CriterionRangeError):
        log_unnormalized_density(TargetSpec(J=2, delta=0.5), 1.2)


def test_for_mueller_rounds_up():
    assert TargetSpec(J=6.2, delta=0.5).for_mueller().J == 7
    t = TargetSpec(J=6, delta=0.5)
    assert t.for_mueller() is t


def test_normalized_density_large_J():
    u = np.linspace(0.0, 1.0, 101)
    p = normalized_density(TargetSpec(J=5000, delta=0.5), u)
    assert np.all(np.isfinite(p))
    assert p.sum() == pytest.approx(1.0)
    assert np.argmax(p) == 100
    assert np.allclose(log_density_many(TargetSpec(J=2, delta=0.5), u[:3]), 2 * np.log(u[:3] + 0.5))
