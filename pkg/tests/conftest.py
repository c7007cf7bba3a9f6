import numpy as np
import pytest

from annealcert.registry import get_function
from annealcert.rng import chain_rng


@pytest.fixture
def rng() -> np.random.Generator:
    return chain_rng(1234)


@pytest.fixture
def bumps1d():
    return get_function("bumps1d")


@pytest.fixture(autouse=True)
def _no_budget_override(monkeypatch):
    monkeypatch.delenv("ANNEAL_CERT_BUDGET", raising=False)
    monkeypatch.delenv("ANNEAL_DEBUG", raising=False)
