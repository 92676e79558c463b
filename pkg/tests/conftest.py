"""
Shared fixtures for the Laplace toolkit test suite.
"""

import numpy as np
import pytest
from loguru import logger

from mdlt.core.registry import pair_registry
from mdlt.models.transform import FunctionRef


@pytest.fixture(autouse=True)
def quiet_logging():
    """Keep loguru output to warnings while tests run."""
    logger.remove()
    logger.add(lambda message: None, level="WARNING")
    yield
    logger.remove()


@pytest.fixture
def pair():
    """Build a registry transform pair: pair("exp_decay", dims=2, rates=[1, 1])."""
    def build(name: str, dims: int = 2, **params):
        return pair_registry.build(FunctionRef(name=name, dims=dims, params=params))
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
