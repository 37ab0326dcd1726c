import numpy as np
import pytest

from v2xalloc.config import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_cfg():
    """Scenario trimmed for fast unit tests (fewer samples / test draws)."""
    return ScenarioConfig(sample_count=400, test_count=500, drops=3)
