"""
Pytest configuration and shared fixtures for relaycap tests.
"""
import pytest
import os
import sys
from typing import Dict, List

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cache import cache
from channel import sample_block
from models import ChannelBatch, SystemConfig


# ============================================
# Operating Point Fixtures
# ============================================

@pytest.fixture
def mrc_config() -> SystemConfig:
    """
    Four relay antennas, two interferers at 0 dB and 3 dB, 10 dB hops.
    """
    return SystemConfig(n=4, m=2, rho1=10.0, rho2=10.0, rho_i=(1.0, 2.0))


@pytest.fixture
def equal_config() -> SystemConfig:
    """
    Four relay antennas, two equal-power interferers at 0 dB, 10 dB hops.
    """
    return SystemConfig(n=4, m=2, rho1=10.0, rho2=10.0, rho_i=(1.0, 1.0))


@pytest.fixture
def small_config() -> SystemConfig:
    """
    Two relay antennas and one interferer, all at 0 dB.
    """
    return SystemConfig(n=2, m=1, rho1=1.0, rho2=1.0, rho_i=(1.0,))


@pytest.fixture
def bound_grid() -> List[SystemConfig]:
    """
    Operating points for the bound sandwich: N in {2, 4}, M in {1, 2},
    rho_I in {0, 10} dB and rho1 = rho2 in {0, 10, 20, 30} dB.
    """
    points = []
    for n in (2, 4):
        for m in (1, 2):
            for rho_i in (1.0, 10.0):
                for rho in (1.0, 10.0, 100.0, 1000.0):
                    points.append(SystemConfig(n=n, m=m, rho1=rho, rho2=rho, rho_i=(rho_i,) * m))
    return points


# ============================================
# Channel Fixtures
# ============================================

@pytest.fixture
def channel_batch(equal_config) -> ChannelBatch:
    """
    First counter block of seed 42 for the equal-power configuration.
    """
    return sample_block(equal_config, 42, 0)


@pytest.fixture
def rng() -> np.random.Generator:
    """
    Independent generator for test-only random inputs.
    """
    return np.random.default_rng(20240601)


# ============================================
# Cache Fixtures
# ============================================

@pytest.fixture
def clean_cache():
    """
    Empty the evaluation cache before and after a test.
    Use this fixture when a test counts hits and misses.
    """
    cache.clear()
    yield cache
    cache.clear()


# ============================================
# Command Line Fixtures
# ============================================

@pytest.fixture
def config_file(tmp_path) -> str:
    """
    A key = value file describing a small ZF evaluation.
    """
    path = tmp_path / "relay.conf"
    path.write_text(
        "# small ZF point\n"
        "scheme = zf\n"
        "n = 4\n"
        "m = 2\n"
        "rho1-db = 10\n"
        "rhoi_db = 0\n"
        "method = analytic\n"
        "samples = 2000\n"
    )
    return str(path)


@pytest.fixture
def cli_defaults() -> Dict[str, str]:
    """
    Flags shared by most command line tests.
    """
    return {"--samples": "2000", "--seed": "7"}
