"""
Unit tests for channel sampling and interference profiles.
"""
import pytest
import sys
import os

import numpy as np
from scipy import special

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from channel import build_profile, sample_block, sample_channels, sample_range
from config import settings
from mc import EmpiricalCdf
from models import SystemConfig


# ============================================
# Sampling Tests
# ============================================

@pytest.mark.unit
class TestSampling:
    """Tests for the counter-based channel streams."""

    def test_block_shapes(self, equal_config):
        """Test the batch layout of one counter block."""
        batch = sample_block(equal_config, 42, 0)
        assert batch.size == settings.MC_BLOCK_SIZE
        assert batch.h1.shape == (settings.MC_BLOCK_SIZE, 4)
        assert batch.h_i.shape == (settings.MC_BLOCK_SIZE, 4, 2)

    def test_block_is_reproducible(self, equal_config):
        """Test that the same (seed, block) gives bit-identical draws."""
        first = sample_block(equal_config, 42, 3)
        second = sample_block(equal_config, 42, 3)
        assert np.array_equal(first.h1, second.h1)
        assert np.array_equal(first.h_i, second.h_i)

    def test_blocks_and_seeds_differ(self, equal_config):
        """Test that other blocks and other seeds give other draws."""
        base = sample_block(equal_config, 42, 0)
        assert not np.array_equal(base.h1, sample_block(equal_config, 42, 1).h1)
        assert not np.array_equal(base.h1, sample_block(equal_config, 43, 0).h1)

    def test_single_realization_matches_block(self, equal_config):
        """Test that sample_channels regenerates a row of its block."""
        size = settings.MC_BLOCK_SIZE
        index = size + 17
        real = sample_channels(equal_config, 42, index)
        block = sample_block(equal_config, 42, 1)
        assert np.array_equal(real.h1, block.h1[17])
        assert np.array_equal(real.h2, block.h2[17])
        assert np.array_equal(real.h_i, block.h_i[17])

    def test_range_across_block_boundary(self, equal_config):
        """Test that a range spanning two blocks is the concatenation of both."""
        size = settings.MC_BLOCK_SIZE
        batch = sample_range(equal_config, 7, size - 5, size + 5)
        first = sample_block(equal_config, 7, 0)
        second = sample_block(equal_config, 7, 1)
        expected = np.concatenate([first.h1[-5:], second.h1[:5]])
        assert batch.size == 10
        assert np.array_equal(batch.h1, expected)

    def test_unit_variance_entries(self, equal_config):
        """Test that the entries are CN(0, 1)."""
        batch = sample_block(equal_config, 11, 0)
        power = np.abs(batch.h1) ** 2
        assert power.mean() == pytest.approx(1.0, abs=0.05)
        assert abs(batch.h_i.mean()) < 0.05

    def test_no_interferers(self):
        """Test an empty interferer axis when M = 0."""
        config = SystemConfig(n=3, m=0, rho1=1.0, rho2=1.0)
        batch = sample_block(config, 1, 0)
        assert batch.h_i.shape == (settings.MC_BLOCK_SIZE, 3, 0)

    def test_first_hop_gain_is_gamma_distributed(self):
        """Test ||h1||^2 against the Gamma(3, 1) c.d.f. with 1e5 draws."""
        config = SystemConfig(n=3, m=0, rho1=1.0, rho2=1.0)
        batch = sample_range(config, 2024, 0, 100_000)
        gain = np.sum(np.abs(batch.h1) ** 2, axis=1)
        distance = EmpiricalCdf(gain).ks_distance(lambda x: special.gammainc(3, x), max_points=100_000)
        assert distance < 0.01

    def test_mean_gain_equals_antenna_count(self, equal_config):
        """Test E[||h1||^2] = N = 4."""
        batch = sample_range(equal_config, 99, 0, 100_000)
        gain = np.sum(np.abs(batch.h1) ** 2, axis=1)
        assert gain.mean() == pytest.approx(4.0, abs=0.05)


# ============================================
# Interference Profile Tests
# ============================================

@pytest.mark.unit
class TestInterferenceProfile:
    """Tests for the partial-fraction coefficients of the interference MGF."""

    def test_empty_profile(self):
        """Test that no interferers gives an empty profile."""
        profile = build_profile(())
        assert profile.rank == 0
        assert list(profile.terms()) == []

    def test_equal_powers(self):
        """Test that equal powers collapse to a single (1 + rho s)^-M term."""
        profile = build_profile((2.0, 2.0, 2.0))
        assert profile.distinct == (2.0,)
        assert profile.multiplicities == (3,)
        assert profile.chi[0] == pytest.approx((0.0, 0.0, 1.0), abs=1e-12)

    def test_two_distinct_powers(self):
        """Test the textbook split of (1 + 2s)^-1 (1 + s)^-1."""
        profile = build_profile((1.0, 2.0))
        assert profile.distinct == (2.0, 1.0)
        assert profile.chi[0][0] == pytest.approx(2.0, rel=1e-12)
        assert profile.chi[1][0] == pytest.approx(-1.0, rel=1e-12)

    @pytest.mark.parametrize("rho_i", [
        (1.0, 2.0),
        (1.0, 1.0, 5.0),
        (0.1, 2.0, 2.0, 30.0),
        (8.0 * 3.0 / 10.0, 3.0 / 10.0, 3.0 / 10.0),
    ])
    @pytest.mark.parametrize("s", [0.0, 0.1, 1.0, 10.0])
    def test_reconstruction(self, rho_i, s):
        """Test that the partial fractions rebuild the product form."""
        profile = build_profile(rho_i)
        assert profile.reconstruct(s) == pytest.approx(profile.product(s), rel=1e-10)

    def test_coefficients_sum_to_one(self):
        """Test that the coefficients add up to the MGF at s = 0."""
        profile = build_profile((0.5, 3.0, 3.0, 7.0))
        assert sum(sum(row) for row in profile.chi) == pytest.approx(1.0, rel=1e-12)
