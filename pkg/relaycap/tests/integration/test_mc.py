"""
Integration tests for the Monte Carlo estimator.
Simulated capacities and moments are checked against the closed forms,
and the qualitative behavior across schemes is checked with common
random numbers.
"""
import pytest
import sys
import os
import math

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from analytic import (
    ceiling_capacity,
    cdf_gamma1_mmse,
    cdf_gamma1_mrc,
    cdf_gamma2,
    evaluate,
    first_hop_log_moment,
    general_moment_gamma1,
    largeN_capacity,
    zf_capacity_exact,
)
from channel import sample_range
from cli import unequal_split
from errors import ConfigurationError
from mc import (
    EmpiricalCdf,
    empirical_cdf,
    estimate_capacity,
    estimate_log_moment,
    estimate_moment,
)
from models import HopQuantity, Method, Scheme, SystemConfig
from precoding import end_to_end_sinr
from utils import db_to_linear

SEED = 42


def mc(scheme, config, samples=100_000, seed=SEED):
    return estimate_capacity(scheme, config, samples=samples, seed=seed)


# ============================================
# Estimator Tests
# ============================================

@pytest.mark.integration
class TestEstimator:
    """Tests for the blocked Monte Carlo mean."""

    def test_thread_count_does_not_change_result(self, equal_config):
        """Test bit-identical estimates for 1, 2 and 8 threads."""
        results = [
            estimate_capacity(Scheme.MMSE, equal_config, samples=10_000, seed=SEED, threads=threads)
            for threads in (1, 2, 8)
        ]
        assert len({r.value for r in results}) == 1
        assert len({r.stderr for r in results}) == 1

    def test_matches_direct_sample_mean(self, equal_config):
        """Test the merged block statistics against a one-shot computation over a partial last block."""
        samples = 5000
        estimate = estimate_capacity(Scheme.MRC, equal_config, samples=samples, seed=7)
        batch = sample_range(equal_config, 7, 0, samples)
        values = np.log1p(end_to_end_sinr(Scheme.MRC, batch, equal_config)["gamma_end"]) / (2.0 * math.log(2.0))
        assert estimate.samples == samples
        assert estimate.value == pytest.approx(values.mean(), rel=1e-12)
        assert estimate.stderr == pytest.approx(values.std(ddof=1) / math.sqrt(samples), rel=1e-9)
        assert estimate.method == Method.MC
        assert estimate.seed == 7

    def test_too_few_samples(self, equal_config):
        """Test that tiny sample counts are refused."""
        with pytest.raises(ConfigurationError):
            estimate_capacity(Scheme.MRC, equal_config, samples=999)

    def test_zf_dimension_check(self):
        """Test that ZF with N <= M is refused before sampling."""
        config = SystemConfig(n=2, m=3, rho1=1.0, rho2=1.0, rho_i=(1.0,) * 3)
        with pytest.raises(ConfigurationError):
            estimate_capacity(Scheme.ZF, config, samples=2000)

    def test_vanishing_first_hop(self, equal_config):
        """Test that the capacity goes to zero with the first-hop SNR."""
        estimate = estimate_capacity(Scheme.MRC, equal_config.with_snr(rho1=1e-12), samples=2000)
        assert estimate.value < 1e-10

    def test_monotone_in_snr(self, equal_config):
        """Test that capacity grows with rho1 under common random numbers."""
        values = [
            estimate_capacity(Scheme.ZF, equal_config.with_snr(rho1=rho1), samples=20_000, seed=SEED).value
            for rho1 in (1.0, 10.0, 100.0, 1000.0)
        ]
        assert values == sorted(values)

    def test_unequal_powers_accepted_for_mmse(self, mrc_config):
        """Test that simulation does not need equal interferer powers."""
        assert estimate_capacity(Scheme.MMSE, mrc_config, samples=2000).value > 0.0

    def test_empirical_cdf_steps(self):
        """Test the right-continuous step c.d.f."""
        cdf = EmpiricalCdf(np.array([3.0, 1.0, 2.0]))
        assert cdf(2.0) == pytest.approx(2.0 / 3.0)
        assert cdf(0.5) == 0.0
        assert cdf(3.0) == 1.0


# ============================================
# Agreement With Closed Forms
# ============================================

@pytest.mark.integration
@pytest.mark.slow
class TestAgreement:
    """Tests for simulation against the closed forms."""

    def test_zf_exact_within_three_sigma(self):
        """Test the exact ZF capacity at N = 2, M = 1."""
        config = SystemConfig(n=2, m=1, rho1=10.0, rho2=10.0, rho_i=(1.0,))
        estimate = mc(Scheme.ZF, config)
        exact = zf_capacity_exact(config).value
        assert abs(estimate.value - exact) < 3.0 * estimate.stderr

    def test_large_n_interference_free(self):
        """Test the large-N expression against the interference-free simulation."""
        config = SystemConfig(n=4, m=0, rho1=10.0, rho2=3.0)
        estimate = mc(Scheme.IDEAL, config)
        assert abs(estimate.value - largeN_capacity(config).value) < 3.0 * estimate.stderr

    def test_bound_sandwich(self, bound_grid):
        """Test lower <= simulation <= upper on the whole grid, up to 3 sigma."""
        for config in bound_grid:
            for scheme in (Scheme.MRC, Scheme.MMSE):
                estimate = mc(scheme, config)
                upper, lower = evaluate(scheme, "analytic", config)
                slack = 3.0 * estimate.stderr
                assert lower.value - slack <= estimate.value <= upper.value + slack, (scheme, config)

    @pytest.mark.parametrize("scheme", [Scheme.MRC, Scheme.MMSE])
    def test_log_moment(self, equal_config, scheme):
        """Test the analytic E[ln gamma1] against a million samples."""
        estimate = estimate_log_moment(scheme, equal_config, HopQuantity.GAMMA1, samples=1_000_000)
        analytic_value = first_hop_log_moment(scheme, equal_config)[0]
        assert abs(estimate.value - analytic_value) < 0.01

    @pytest.mark.parametrize("scheme", [Scheme.MRC, Scheme.MMSE])
    def test_mean(self, equal_config, scheme):
        """Test the analytic E[gamma1] to half a percent."""
        estimate = estimate_moment(scheme, equal_config, HopQuantity.GAMMA1, samples=1_000_000)
        analytic_value = general_moment_gamma1(scheme, 1.0, equal_config)
        assert estimate.value == pytest.approx(analytic_value, rel=0.005)

    def test_second_hop_mean(self, equal_config):
        """Test E[gamma2] = N rho2 = 40."""
        estimate = estimate_moment(Scheme.MRC, equal_config, HopQuantity.GAMMA2, samples=200_000)
        assert abs(estimate.value - 40.0) < 4.0 * estimate.stderr

    @pytest.mark.parametrize("scheme, cdf", [
        (Scheme.MRC, cdf_gamma1_mrc),
        (Scheme.MMSE, cdf_gamma1_mmse),
    ])
    def test_first_hop_distribution(self, equal_config, scheme, cdf):
        """Test the analytic c.d.f.s with a Kolmogorov-Smirnov distance at 1e5 samples."""
        sample = empirical_cdf(scheme, equal_config, HopQuantity.GAMMA1, samples=100_000)
        assert sample.ks_distance(lambda x: cdf(x, equal_config), max_points=500) < 0.01

    def test_unequal_mrc_distribution(self, mrc_config):
        """Test the partial-fraction c.d.f. for unequal powers."""
        sample = empirical_cdf(Scheme.MRC, mrc_config, HopQuantity.GAMMA1, samples=100_000)
        assert sample.ks_distance(lambda x: cdf_gamma1_mrc(x, mrc_config), max_points=500) < 0.01

    def test_second_hop_distribution(self, equal_config):
        """Test the second-hop Gamma c.d.f."""
        sample = empirical_cdf(Scheme.ZF, equal_config, HopQuantity.GAMMA2, samples=100_000)
        assert sample.ks_distance(lambda x: cdf_gamma2(x, equal_config)) < 0.01


# ============================================
# Scheme Comparison Tests
# ============================================

@pytest.mark.integration
@pytest.mark.slow
class TestSchemeBehavior:
    """Tests for the qualitative comparisons between schemes."""

    def test_ordering_under_strong_interference(self):
        """Test MMSE >= ZF >= MRC at 10 dB INR across the SNR sweep."""
        for rho_db in range(0, 31, 5):
            rho = db_to_linear(rho_db)
            config = SystemConfig(n=4, m=2, rho1=rho, rho2=rho, rho_i=(10.0, 10.0))
            mmse, zf, mrc = (mc(s, config, samples=50_000) for s in (Scheme.MMSE, Scheme.ZF, Scheme.MRC))
            assert mmse.value >= zf.value
            assert zf.value >= mrc.value - 3.0 * (zf.stderr + mrc.stderr)

    def test_mrc_penalty_grows_with_interference(self):
        """Test that the MMSE advantage over MRC is larger at 10 dB INR than at 0 dB."""
        def gap(rho_i):
            config = SystemConfig(n=4, m=2, rho1=10.0, rho2=10.0, rho_i=(rho_i, rho_i))
            return mc(Scheme.MMSE, config, samples=50_000).value - mc(Scheme.MRC, config, samples=50_000).value

        assert gap(10.0) > gap(1.0)

    def test_large_antenna_regime(self):
        """Test ZF and MMSE approaching the large-N curve while MRC stays apart."""
        def gaps(n):
            config = SystemConfig(n=n, m=5, rho1=10.0, rho2=10.0, rho_i=(1.0,) * 5)
            reference = largeN_capacity(config).value
            return {s: reference - mc(s, config, samples=20_000).value for s in (Scheme.ZF, Scheme.MMSE, Scheme.MRC)}

        near, far = gaps(10), gaps(20)
        assert far[Scheme.ZF] < 0.15
        assert far[Scheme.MMSE] < 0.15
        assert far[Scheme.ZF] < near[Scheme.ZF]
        assert far[Scheme.MRC] > 0.1

        config = SystemConfig(n=20, m=5, rho1=10.0, rho2=10.0, rho_i=(1.0,) * 5)
        assert abs(mc(Scheme.MMSE, config, samples=20_000).value - mc(Scheme.ZF, config, samples=20_000).value) < 0.02

    def test_second_hop_ceiling(self):
        """Test the saturation at the second-hop capacity as rho1 grows."""
        def at(rho1_db, scheme):
            config = SystemConfig(n=4, m=2, rho1=db_to_linear(rho1_db), rho2=10.0, rho_i=(1.0, 1.0))
            return mc(scheme, config, samples=50_000).value

        assert at(40.0, Scheme.MRC) - at(35.0, Scheme.MRC) < 0.02
        values = [at(40.0, scheme) for scheme in (Scheme.MRC, Scheme.ZF, Scheme.MMSE)]
        assert max(values) - min(values) < 0.1
        ceiling = ceiling_capacity(SystemConfig(n=4, m=2, rho1=1.0, rho2=10.0, rho_i=(1.0, 1.0)))
        assert all(value <= ceiling + 0.03 for value in values)

    @pytest.mark.parametrize("n", [3, 4])
    def test_equal_split_is_worst(self, n):
        """Test that an 8:1:1 split of the total INR does not lose to an equal split."""
        total = 3.0
        equal = SystemConfig(n=n, m=3, rho1=10.0, rho2=10.0, rho_i=(total / 3.0,) * 3)
        skewed = SystemConfig(n=n, m=3, rho1=10.0, rho2=10.0, rho_i=tuple(db_to_linear(v) for v in unequal_split(total, (8, 1, 1))))
        for scheme in (Scheme.MRC, Scheme.MMSE):
            a, b = mc(scheme, skewed), mc(scheme, equal)
            assert a.value >= b.value - 3.0 * (a.stderr + b.stderr)
