"""
Integration tests for the closed-form capacity expressions.
Closed forms are checked against quadrature over the hop c.d.f.s and
against elementary special cases.
"""
import pytest
import sys
import os
import math

import numpy as np
from scipy import special

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from analytic import (
    bound_by_quadrature,
    capacity_from_cdf,
    cdf_gamma1_mmse,
    cdf_gamma1_zf,
    cdf_gamma1_mrc,
    cdf_gamma2,
    ceiling_capacity,
    evaluate,
    first_hop_capacity,
    first_hop_cdf,
    first_hop_log_moment,
    gamma_hop_capacity,
    gamma_hop_log_moment,
    gamma_hop_mean,
    gamma_hop_moment,
    general_moment_gamma1,
    largeN_capacity,
    log_moment_from_cdf,
    mmse_capacity_lower,
    mmse_capacity_upper,
    moment_from_cdf,
    mrc_capacity_lower,
    mrc_capacity_upper,
    zf_capacity_exact,
    zf_capacity_mgf,
)
import analytic
from channel import build_profile
from errors import ConfigurationError, QuadratureError, UnequalPowerError
from models import Method, Scheme, SystemConfig

BITS = 1.0 / (2.0 * math.log(2.0))


def interference_log_oracle(config: SystemConfig) -> float:
    """E[ln gamma1] for MRC from ln rho1 + psi(N) - E[ln(1 + u)], u the MRC interference term"""
    profile = build_profile(config.rho_i)
    leak = 0.0
    for _, j, rho, chi in profile.terms():
        leak += chi * gamma_hop_capacity(j, rho) / BITS
    return math.log(config.rho1) + special.digamma(config.n) - leak


# ============================================
# Quadrature Oracle Tests
# ============================================

@pytest.mark.integration
class TestQuadratureOracles:
    """Tests for capacity, moments and log-moments from a c.d.f."""

    def test_unit_exponential_capacity(self):
        """Test Gamma(1, 1): C = e E1(1) / (2 ln 2), about 0.4302."""
        cdf = lambda x: 1.0 - math.exp(-x) if x > 0 else 0.0
        expected = math.e * float(special.exp1(1.0)) * BITS
        assert capacity_from_cdf(cdf) == pytest.approx(expected, rel=1e-8)
        assert expected == pytest.approx(0.43017, abs=1e-4)

    def test_moments_of_exponential(self):
        """Test E[X] = 1, E[X^2] = 2 and E[ln X] = -euler_gamma."""
        cdf = lambda x: 1.0 - math.exp(-x) if x > 0 else 0.0
        assert moment_from_cdf(cdf) == pytest.approx(1.0, rel=1e-8)
        assert moment_from_cdf(cdf, 2.0) == pytest.approx(2.0, rel=1e-8)
        assert log_moment_from_cdf(cdf) == pytest.approx(-np.euler_gamma, rel=1e-8)

    def test_moment_order_must_be_positive(self):
        """Test that non-positive orders are refused."""
        with pytest.raises(ConfigurationError):
            moment_from_cdf(lambda x: 1.0, 0.0)


# ============================================
# Gamma Hop Tests
# ============================================

@pytest.mark.integration
class TestGammaHop:
    """Tests for interference-free hops."""

    @pytest.mark.parametrize("dof", [1, 2, 4, 8])
    @pytest.mark.parametrize("rho", [0.01, 0.3, 1.0, 10.0, 1000.0])
    def test_capacity_matches_quadrature(self, dof, rho):
        """Test the Tricomi sum against quadrature on both sides of the recursion switch."""
        cdf = lambda x: special.gammainc(dof, max(x, 0.0) / rho)
        expected = capacity_from_cdf(cdf, dof * rho)
        assert gamma_hop_capacity(dof, rho) == pytest.approx(expected, rel=1e-6)

    def test_second_hop_moments(self, equal_config):
        """Test E[ln gamma2] = psi(4) + ln 10 = 3.5587 and E[gamma2] = 40."""
        assert gamma_hop_log_moment(equal_config.n, equal_config.rho2) == pytest.approx(3.5587, abs=1e-4)
        assert gamma_hop_mean(equal_config.n, equal_config.rho2) == 40.0
        cdf = lambda x: cdf_gamma2(x, equal_config)
        assert log_moment_from_cdf(cdf, 40.0) == pytest.approx(3.5587, abs=1e-4)

    def test_ceiling(self, equal_config):
        """Test that the ceiling is the second-hop capacity."""
        assert ceiling_capacity(equal_config) == gamma_hop_capacity(4, 10.0)

    def test_zero_dof(self):
        """Test that a hop needs a degree of freedom."""
        with pytest.raises(ConfigurationError):
            gamma_hop_capacity(0, 1.0)

    @pytest.mark.parametrize("order", [0.5, 1.0, 2.0])
    def test_general_moments(self, order):
        """Test Gamma(N + n) / Gamma(N) rho^n against quadrature of the c.d.f."""
        cdf = lambda x: special.gammainc(3, max(x, 0.0) / 5.0)
        assert gamma_hop_moment(3, 5.0, order) == pytest.approx(moment_from_cdf(cdf, order, 15.0), rel=1e-7)
        assert gamma_hop_moment(4, 10.0, 2.0) == pytest.approx(2000.0, rel=1e-12)

    def test_zf_first_hop_cdf(self, equal_config):
        """Test that the ZF first hop is Gamma(N - M, rho1)."""
        assert cdf_gamma1_zf(10.0, equal_config) == pytest.approx(special.gammainc(2, 1.0), rel=1e-12)
        with pytest.raises(ConfigurationError):
            cdf_gamma1_zf(1.0, SystemConfig(n=2, m=2, rho1=1.0, rho2=1.0, rho_i=(1.0, 1.0)))


# ============================================
# MRC Tests
# ============================================

@pytest.mark.integration
class TestMrc:
    """Tests for the MRC first hop and bounds."""

    def test_cdf_at_zero_and_infinity(self, mrc_config):
        """Test the c.d.f. limits."""
        assert cdf_gamma1_mrc(0.0, mrc_config) == 0.0
        assert cdf_gamma1_mrc(1e6, mrc_config) == pytest.approx(1.0, abs=1e-9)

    def test_cdf_monotone(self, mrc_config):
        """Test that the c.d.f. is non-decreasing."""
        values = cdf_gamma1_mrc(np.linspace(0.0, 200.0, 400), mrc_config)
        assert np.all(np.diff(values) >= -1e-12)

    def test_single_antenna_single_interferer(self):
        """Test F = 1 - e^-y / (1 + rho_I y) for N = M = 1."""
        config = SystemConfig(n=1, m=1, rho1=4.0, rho2=1.0, rho_i=(2.0,))
        for x in (0.5, 3.0, 20.0):
            y = x / 4.0
            assert cdf_gamma1_mrc(x, config) == pytest.approx(1.0 - math.exp(-y) / (1.0 + 2.0 * y), rel=1e-12)

    @pytest.mark.parametrize("config", [
        SystemConfig(n=4, m=2, rho1=10.0, rho2=10.0, rho_i=(1.0, 2.0)),
        SystemConfig(n=2, m=1, rho1=1.0, rho2=1.0, rho_i=(1.0,)),
        SystemConfig(n=3, m=3, rho1=100.0, rho2=10.0, rho_i=(2.4, 0.3, 0.3)),
    ])
    def test_first_hop_capacity_matches_quadrature(self, config):
        """Test the G sum for C_gamma1 against quadrature of the c.d.f."""
        value, error = first_hop_capacity(Scheme.MRC, config)
        expected = capacity_from_cdf(first_hop_cdf(Scheme.MRC, config), config.n * config.rho1)
        assert value == pytest.approx(expected, rel=1e-6)
        assert error < 1e-6

    @pytest.mark.parametrize("config", [
        SystemConfig(n=4, m=2, rho1=10.0, rho2=10.0, rho_i=(1.0, 2.0)),
        SystemConfig(n=2, m=2, rho1=1.0, rho2=1.0, rho_i=(10.0, 10.0)),
        SystemConfig(n=1, m=1, rho1=3.0, rho2=1.0, rho_i=(0.5,)),
    ])
    def test_log_moment_matches_oracle(self, config):
        """Test E[ln gamma1] against the interference-term oracle and quadrature."""
        value, _ = first_hop_log_moment(Scheme.MRC, config)
        assert value == pytest.approx(interference_log_oracle(config), rel=1e-6, abs=1e-8)
        expected = log_moment_from_cdf(first_hop_cdf(Scheme.MRC, config), config.n * config.rho1)
        assert value == pytest.approx(expected, rel=1e-6, abs=1e-8)

    @pytest.mark.parametrize("order", [0.5, 1.0, 2.0])
    def test_moments_match_quadrature(self, mrc_config, order):
        """Test E[gamma1^n] for real orders."""
        expected = moment_from_cdf(first_hop_cdf(Scheme.MRC, mrc_config), order, 40.0)
        assert general_moment_gamma1(Scheme.MRC, order, mrc_config) == pytest.approx(expected, rel=1e-6)

    def test_single_antenna_mean(self):
        """Test E[gamma1] = rho1 U(1, 1, 1/rho_I) / rho_I for N = M = 1."""
        config = SystemConfig(n=1, m=1, rho1=2.0, rho2=1.0, rho_i=(1.0,))
        expected = 2.0 * math.e * float(special.exp1(1.0))
        assert general_moment_gamma1(Scheme.MRC, 1.0, config) == pytest.approx(expected, rel=1e-8)

    def test_bounds_match_quadrature(self, mrc_config):
        """Test both bounds against their quadrature reconstructions."""
        upper = mrc_capacity_upper(mrc_config)
        lower = mrc_capacity_lower(mrc_config)
        assert upper.value == pytest.approx(bound_by_quadrature(Scheme.MRC, "upper", mrc_config).value, rel=1e-6)
        assert lower.value == pytest.approx(bound_by_quadrature(Scheme.MRC, "lower", mrc_config).value, rel=1e-6)
        assert upper.value > lower.value

    def test_provenance(self, mrc_config):
        """Test that every term of the bound is recorded."""
        result = mrc_capacity_upper(mrc_config)
        assert result.method == Method.ANALYTIC_UPPER
        for name in ("C_gamma1", "C_gamma2", "E[ln gamma1]", "E[ln gamma2]", "C_gammaT bound"):
            result.term(name)
        assert result.value == pytest.approx(result.c_gamma1 + result.c_gamma2 - result.c_cross, abs=1e-12)
        assert result.term("E[ln gamma2]").value == pytest.approx(3.5587, abs=1e-4)


# ============================================
# MMSE Tests
# ============================================

@pytest.mark.integration
class TestMmse:
    """Tests for the MMSE first hop and bounds."""

    def test_unequal_powers_refused(self, mrc_config):
        """Test that analytic MMSE needs equal interferer powers."""
        with pytest.raises(UnequalPowerError):
            mmse_capacity_upper(mrc_config)
        with pytest.raises(UnequalPowerError):
            cdf_gamma1_mmse(1.0, mrc_config)

    def test_single_antenna_matches_mrc(self):
        """Test that N = 1 MMSE and MRC coincide."""
        config = SystemConfig(n=1, m=1, rho1=5.0, rho2=5.0, rho_i=(2.0,))
        for x in (0.2, 1.0, 8.0):
            assert cdf_gamma1_mmse(x, config) == pytest.approx(cdf_gamma1_mrc(x, config), rel=1e-10)
        mmse = first_hop_capacity(Scheme.MMSE, config)[0]
        mrc = first_hop_capacity(Scheme.MRC, config)[0]
        assert mmse == pytest.approx(mrc, rel=1e-6)
        assert first_hop_log_moment(Scheme.MMSE, config)[0] == pytest.approx(
            first_hop_log_moment(Scheme.MRC, config)[0], rel=1e-6
        )

    def test_cdf_limits(self, equal_config):
        """Test the c.d.f. at zero and far in the tail."""
        assert cdf_gamma1_mmse(0.0, equal_config) == 0.0
        assert cdf_gamma1_mmse(1e5, equal_config) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.slow
    @pytest.mark.parametrize("config", [
        SystemConfig(n=4, m=2, rho1=10.0, rho2=10.0, rho_i=(1.0, 1.0)),
        SystemConfig(n=2, m=3, rho1=3.0, rho2=1.0, rho_i=(10.0,) * 3),
    ])
    def test_first_hop_terms_match_quadrature(self, config):
        """Test C_gamma1, E[ln gamma1] and E[gamma1] against quadrature of the c.d.f."""
        cdf = first_hop_cdf(Scheme.MMSE, config)
        scale = config.n * config.rho1
        assert first_hop_capacity(Scheme.MMSE, config)[0] == pytest.approx(capacity_from_cdf(cdf, scale), rel=1e-6)
        assert first_hop_log_moment(Scheme.MMSE, config)[0] == pytest.approx(
            log_moment_from_cdf(cdf, scale), rel=1e-6, abs=1e-8
        )
        assert general_moment_gamma1(Scheme.MMSE, 1.0, config) == pytest.approx(
            moment_from_cdf(cdf, 1.0, scale), rel=1e-6
        )

    def test_mmse_beats_mrc_in_mean(self, equal_config):
        """Test that the SINR-optimal combiner has the larger mean SINR."""
        assert general_moment_gamma1(Scheme.MMSE, 1.0, equal_config) > general_moment_gamma1(Scheme.MRC, 1.0, equal_config)

    def test_bounds_order(self, equal_config):
        """Test that the upper bound exceeds the lower bound."""
        assert mmse_capacity_upper(equal_config).value > mmse_capacity_lower(equal_config).value


# ============================================
# ZF and Interference-Free Tests
# ============================================

@pytest.mark.integration
class TestExactCapacity:
    """Tests for ZF and the large-N limit."""

    @pytest.mark.parametrize("n, m, rho1, rho2", [(4, 2, 10.0, 10.0), (2, 1, 1.0, 1.0), (6, 4, 100.0, 3.0)])
    def test_zf_matches_mgf(self, n, m, rho1, rho2):
        """Test the G double sum against the MGF quadrature."""
        config = SystemConfig(n=n, m=m, rho1=rho1, rho2=rho2, rho_i=(1.0,) * m)
        exact = zf_capacity_exact(config)
        assert exact.method == Method.ANALYTIC_EXACT
        assert exact.value == pytest.approx(zf_capacity_mgf(config).value, rel=1e-7)

    def test_zf_without_interferers_is_large_n(self):
        """Test that ZF with M = 0 equals the large-N expression."""
        config = SystemConfig(n=3, m=0, rho1=10.0, rho2=10.0)
        assert zf_capacity_exact(config).value == largeN_capacity(config).value

    def test_large_n_ignores_interference(self, equal_config):
        """Test that the large-N reference uses N degrees of freedom."""
        result = largeN_capacity(equal_config)
        assert result.scheme == Scheme.IDEAL
        assert result.method == Method.ANALYTIC_LARGEN
        assert result.c_gamma1 == gamma_hop_capacity(4, 10.0)

    def test_zf_needs_more_antennas(self):
        """Test that ZF with N <= M is refused."""
        config = SystemConfig(n=2, m=3, rho1=1.0, rho2=1.0, rho_i=(1.0,) * 3)
        with pytest.raises(ConfigurationError):
            zf_capacity_exact(config)

    def test_antenna_interferer_trade(self):
        """Test that two extra antennas almost recover two extra interferers."""
        def zf(n, m):
            return zf_capacity_exact(SystemConfig(n=n, m=m, rho1=10.0, rho2=10.0, rho_i=(1.0,) * m)).value

        same_margin = abs(zf(4, 2) - zf(6, 4))
        one_interferer = abs(zf(4, 1) - zf(4, 2))
        assert same_margin < 0.12
        assert same_margin < one_interferer


# ============================================
# Dispatch and Robustness Tests
# ============================================

@pytest.mark.integration
class TestEvaluate:
    """Tests for method dispatch and degenerate operating points."""

    def test_analytic_choices(self, equal_config):
        """Test what each method stands for."""
        assert [r.method for r in evaluate(Scheme.ZF, "analytic", equal_config)] == [Method.ANALYTIC_EXACT]
        assert [r.method for r in evaluate(Scheme.MRC, "analytic", equal_config)] == [
            Method.ANALYTIC_UPPER,
            Method.ANALYTIC_LOWER,
        ]
        assert [r.method for r in evaluate(Scheme.ZF, "upper", equal_config)] == [Method.ANALYTIC_UPPER]
        assert [r.method for r in evaluate(Scheme.MRC, "largen", equal_config)] == [Method.ANALYTIC_LARGEN]
        assert [r.method for r in evaluate(Scheme.ZF, "quadrature", equal_config)] == [Method.QUADRATURE]

    def test_unknown_method(self, equal_config):
        """Test that Monte Carlo is not an analytic method."""
        with pytest.raises(ConfigurationError):
            evaluate(Scheme.ZF, "mc", equal_config)

    def test_zf_bounds_sandwich_exact(self, equal_config):
        """Test the Jensen bounds around the exact ZF value."""
        exact = zf_capacity_exact(equal_config).value
        assert evaluate(Scheme.ZF, "lower", equal_config)[0].value <= exact
        assert evaluate(Scheme.ZF, "upper", equal_config)[0].value >= exact

    @pytest.mark.slow
    @pytest.mark.parametrize("rho", [1e-2, 1e4])
    @pytest.mark.parametrize("n, m", [(2, 1), (4, 1), (4, 2)])
    def test_extreme_snr_grid(self, n, m, rho):
        """Test that every theorem value is finite and positive at extreme SNRs."""
        config = SystemConfig(n=n, m=m, rho1=rho, rho2=rho, rho_i=(1.0,) * m)
        results = []
        for scheme in (Scheme.MRC, Scheme.MMSE):
            results += evaluate(scheme, "analytic", config)
        if n > m:
            results += evaluate(Scheme.ZF, "analytic", config)
        results += evaluate(Scheme.IDEAL, "analytic", config)
        for result in results:
            assert math.isfinite(result.value)
            assert result.value > 0.0, result.method

    def test_failures_name_the_term(self, monkeypatch):
        """Test that a numeric failure carries the label of the failing term."""
        config = SystemConfig(n=2, m=1, rho1=1.0, rho2=1.0, rho_i=(1.0,))

        def broken(dof, rho):
            raise QuadratureError("did not converge")

        monkeypatch.setattr(analytic, "gamma_hop_capacity", broken)
        with pytest.raises(QuadratureError) as info:
            mrc_capacity_upper(config)
        assert "C_gamma2" in info.value.term
        assert "did not converge" in str(info.value)
