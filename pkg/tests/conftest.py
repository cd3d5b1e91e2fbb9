"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from lpcns import GridSpec


@pytest.fixture
def grid3():
    """Small 3-D grid, cheap enough for per-test transforms."""
    return GridSpec(3, 16, 2.0 * np.pi)


@pytest.fixture
def grid3_32():
    return GridSpec(3, 32, 2.0 * np.pi)


@pytest.fixture
def grid1():
    return GridSpec(1, 64, 2.0 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
