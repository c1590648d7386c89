import os
import sys
from pathlib import Path

# Settings read the environment at import time, so this runs before lobnet loads
os.environ.setdefault("LOBNET_TESTING", "true")
os.environ.setdefault("LOBNET_ENVIRONMENT", "test")
os.environ.setdefault("LOBNET_LOG_LEVEL", "WARNING")
os.environ.setdefault("LOBNET_TRACING_ENABLED", "false")

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import numpy as np
import pytest

from lobnet.common.models.schemas import FitConfig
from lobnet.common.utils import logger as lobnet_logger
from lobnet.common.utils.rng import STREAM_TEST, derive_rng
from tests.test_utils import NetworkHelper, TestHelper


# ============================================
# Test Configuration
# ============================================

@pytest.fixture(autouse=True)
def quiet_cli_logging(monkeypatch):
    """Keep the CLI from attaching handlers to streams CliRunner closes afterwards"""
    monkeypatch.setattr(lobnet_logger, "_logger_initialized", True)


@pytest.fixture
def rng():
    """A seeded generator for building test samples"""
    return derive_rng(12345, STREAM_TEST)


@pytest.fixture
def fast_fit_config():
    """Smallest bootstrap the fit configuration accepts"""
    return FitConfig(bootstrap_replicas=100, max_candidates=50, rng_seed=7)


# ============================================
# Order Flow Fixtures
# ============================================

@pytest.fixture
def helper():
    return TestHelper


@pytest.fixture
def networks():
    return NetworkHelper


@pytest.fixture
def star_day():
    return TestHelper.star_day()


@pytest.fixture
def synthetic_days():
    """Twenty small synthetic days with distinct seeds"""
    return [TestHelper.synthetic_day(seed) for seed in range(20)]


@pytest.fixture
def powerlaw_sizes(rng):
    """Discrete power-law sample, alpha 2.5 above 1, scaled to lots of 100"""
    from lobnet.common.models.schemas import Discreteness
    from lobnet.plfit.sampling import rand_powerlaw

    return (rand_powerlaw(2.5, 1, 3000, Discreteness.DISCRETE, rng) * 100).astype(np.int64)
