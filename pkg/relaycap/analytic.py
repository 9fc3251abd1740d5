# analytic.py
"""
Closed-form ergodic capacity of the dual-hop AF relay and its oracles.

Capacity decomposes as C = C_gamma1 + C_gamma2 - C_gammaT with
C_gammaT = 1/2 E[log2(1 + gamma1 + gamma2)]. The per-hop terms have closed
forms (Gamma-distributed hops, partial-fraction sums for MRC, a Gauss
hypergeometric correction for MMSE); the cross term is exact for ZF and the
interference-free relay and is bounded by Jensen's inequality otherwise:
    upper: C_gammaT >= 1/2 log2(1 + exp E[ln gamma1] + exp E[ln gamma2])
    lower: C_gammaT <= 1/2 log2(1 + E[gamma1] + E[gamma2])

Every closed form has a quadrature counterpart built from the hop c.d.f.s,
and the two-variable Meijer G convention is checked against the underlying
integrals before first use.
"""
import logging
import math
import threading
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from cache import memoized
from channel import build_profile
from config import settings
from errors import (
    CalibrationError,
    ConfigurationError,
    NumericInconsistencyError,
    QuadratureError,
    RelayCapacityError,
)
from models import (
    CheckRecord,
    MeijerGSpec,
    Method,
    Scheme,
    SystemConfig,
    TermRecord,
    TheoremResult,
)
from precoding import check_scheme
from specfun import (
    digamma,
    gauss_2f1,
    integrate_checked,
    meijer_g,
    meijer_g2_family,
    tricomi_u,
    tricomi_u_da,
    upper_incomplete_gamma,
)

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)
_BITS = 1.0 / (2.0 * _LN2)

# beyond this 1/rho the Tricomi form replaces rho^-k e^{1/rho} Gamma(-k, 1/rho)
_SCALED_GAMMA_LIMIT = 4.0

Estimate = Tuple[float, float]
Cdf = Callable[[float], float]

_profile = memoized("interference_profile")(build_profile)


class _Ledger:
    """Per-term provenance of one theorem evaluation."""

    def __init__(self, label: str):
        self.label = label
        self.records: List[TermRecord] = []

    def term(self, name: str, compute: Callable[[], object]) -> Estimate:
        try:
            result = compute()
        except RelayCapacityError as exc:
            raise exc.with_term(f"{self.label}: {name}")
        value, error = result if isinstance(result, tuple) else (float(result), 0.0)
        self.records.append(TermRecord(name=name, value=value, error=error))
        return value, error

    def record(self, name: str, value: float, error: float = 0.0) -> None:
        self.records.append(TermRecord(name=name, value=value, error=error))

    def result(self, c_gamma1: float, c_gamma2: float, c_cross: float, error: float,
               method: Method, scheme: Scheme) -> TheoremResult:
        value = c_gamma1 + c_gamma2 - c_cross
        logger.info(f"{self.label}: {value:.8f} (error {error:.2g})")
        return TheoremResult(
            value=value,
            c_gamma1=c_gamma1,
            c_gamma2=c_gamma2,
            c_cross=c_cross,
            error=error,
            method=method,
            scheme=scheme,
            provenance=self.records,
        )


# ============================================
# Quadrature over c.d.f.s
# ============================================

def _breakpoints(scale: float) -> List[float]:
    return [scale * factor for factor in (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2)]


def _integrate_pieces(func: Callable[[float], float], lower: float, upper: float,
                      points: Sequence[float], label: str) -> float:
    inner = sorted(p for p in set(points) if lower < p < upper)
    edges = [lower] + inner + [upper]
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        try:
            value, _ = integrate_checked(func, lo, hi)
        except QuadratureError as exc:
            raise exc.with_term(label)
        pieces.append(value)
    return math.fsum(pieces)


def capacity_from_cdf(cdf: Cdf, tail_bound: Optional[float] = None) -> float:
    """
    C = 1/(2 ln 2) * integral_0^inf (1 - F(x)) / (1 + x) dx.

    tail_bound is a point past which 1 - F is in its tail (a multiple of
    the mean SNR is a good choice); it places the quadrature breakpoints.
    """
    points = _breakpoints(tail_bound or 1.0) + [1.0]
    total = _integrate_pieces(lambda x: (1.0 - cdf(x)) / (1.0 + x), 0.0, np.inf, points, "capacity_from_cdf")
    return _BITS * total


def moment_from_cdf(cdf: Cdf, n: float = 1.0, tail_bound: Optional[float] = None) -> float:
    """E[X^n] = n * integral_0^inf x^(n-1) (1 - F(x)) dx"""
    if not n > 0:
        raise ConfigurationError(f"moment order must be positive, got {n}")
    points = _breakpoints(tail_bound or 1.0)
    total = _integrate_pieces(lambda x: x ** (n - 1.0) * (1.0 - cdf(x)), 0.0, np.inf, points, "moment_from_cdf")
    return n * total


def log_moment_from_cdf(cdf: Cdf, tail_bound: Optional[float] = None) -> float:
    """E[ln X] = integral_1^inf (1 - F)/x dx - integral_0^1 F/x dx"""
    points = _breakpoints(tail_bound or 1.0)
    above = _integrate_pieces(lambda x: (1.0 - cdf(x)) / x, 1.0, np.inf, points, "log_moment_from_cdf")
    below = _integrate_pieces(lambda x: cdf(x) / x, 0.0, 1.0, points, "log_moment_from_cdf")
    return above - below


# ============================================
# Hop c.d.f.s
# ============================================

def _points(x) -> Tuple[np.ndarray, bool]:
    return np.atleast_1d(np.asarray(x, dtype=float)), np.ndim(x) == 0


def _finish(values: np.ndarray, points: np.ndarray, scalar: bool, label: str):
    values = np.where(points > 0.0, values, 0.0)
    tolerance = settings.CDF_CLAMP_TOLERANCE
    low, high = float(np.min(values)), float(np.max(values))
    if low < -tolerance or high > 1.0 + tolerance or not np.all(np.isfinite(values)):
        raise NumericInconsistencyError(f"{label} left [0, 1]: range [{low:.3g}, {high:.3g}]")
    if low < 0.0 or high > 1.0:
        logger.warning(f"{label} clamped into [0, 1] (range [{low:.3g}, {high:.3g}])")
        values = np.clip(values, 0.0, 1.0)
    return float(values[0]) if scalar else values


def cdf_gamma_hop(x, dof: int, rho: float):
    """c.d.f. of rho * Gamma(dof, 1), the SNR of an interference-free hop"""
    points, scalar = _points(x)
    values = special.gammainc(dof, np.maximum(points, 0.0) / rho)
    return _finish(values, points, scalar, "Gamma hop c.d.f.")


def cdf_gamma2(x, config: SystemConfig):
    return cdf_gamma_hop(x, config.n, config.rho2)


def cdf_gamma1_zf(x, config: SystemConfig):
    check_scheme(Scheme.ZF, config)
    return cdf_gamma_hop(x, config.n - config.m, config.rho1)


def cdf_gamma1_mrc(x, config: SystemConfig):
    """
    c.d.f. of the MRC first-hop SINR for any interferer power profile:
        1 - e^{-x/rho1} sum_k x^k/(rho1^k k!) sum_l C(k,l) sum_ij chi_ij
            Gamma(j+l)/Gamma(j) rho_i^l (rho1/(rho1 + rho_i x))^(j+l)
    """
    if config.m == 0:
        return cdf_gamma_hop(x, config.n, config.rho1)

    points, scalar = _points(x)
    positive = np.maximum(points, 0.0)
    rho1 = config.rho1
    profile = _profile(config.rho_i)
    y = positive / rho1

    total = np.zeros_like(positive)
    for k in range(config.n):
        inner = np.zeros_like(positive)
        for l in range(k + 1):
            for _, j, rho, chi in profile.terms():
                log_ratio = special.gammaln(j + l) - special.gammaln(j)
                coefficient = math.comb(k, l) * chi * math.exp(log_ratio) * rho ** l
                inner += coefficient * (rho1 / (rho1 + rho * positive)) ** (j + l)
        total += y ** k / math.factorial(k) * inner

    return _finish(1.0 - np.exp(-y) * total, points, scalar, "MRC first-hop c.d.f.")


def _mmse_indices(config: SystemConfig) -> range:
    return range(max(0, config.n - config.m) + 1, config.n + 1)


def cdf_gamma1_mmse(x, config: SystemConfig):
    """
    c.d.f. of the MMSE first-hop SINR with equal interferer powers rho_I:
        1 - Q(N, y) + Gamma(M+1) e^{-y} y^N sum_{m=m1}^{N} rho_I^(N-m+1)
            2F1(M+1, N-m+1; N-m+2; -rho_I y) / (Gamma(m) Gamma(N-m+2) Gamma(m-N+M))
    with y = x / rho1, Q the regularized upper incomplete gamma function and
    m1 = max(0, N-M) + 1.
    """
    check_scheme(Scheme.MMSE, config, analytic=True)
    if config.m == 0:
        return cdf_gamma_hop(x, config.n, config.rho1)

    points, scalar = _points(x)
    y = np.maximum(points, 0.0) / config.rho1
    n, m, rho = config.n, config.m, config.common_rho_i

    correction = np.zeros_like(y)
    for index in _mmse_indices(config):
        log_coefficient = (
            special.gammaln(m + 1.0)
            - special.gammaln(index)
            - special.gammaln(n - index + 2.0)
            - special.gammaln(index - n + m)
            + (n - index + 1.0) * math.log(rho)
        )
        series = np.array([gauss_2f1(m + 1.0, n - index + 1.0, n - index + 2.0, -rho * v) for v in y])
        correction += math.exp(log_coefficient) * series

    values = special.gammainc(n, y) + np.exp(-y) * y ** n * correction
    return _finish(values, points, scalar, "MMSE first-hop c.d.f.")


def first_hop_cdf(scheme: Scheme, config: SystemConfig) -> Cdf:
    """c.d.f. of gamma1 for the scheme, as a function of x"""
    scheme = Scheme(scheme)
    check_scheme(scheme, config, analytic=True)
    if scheme == Scheme.MRC:
        return lambda x: cdf_gamma1_mrc(x, config)
    if scheme == Scheme.MMSE:
        return lambda x: cdf_gamma1_mmse(x, config)
    if scheme == Scheme.ZF:
        return lambda x: cdf_gamma1_zf(x, config)
    return lambda x: cdf_gamma_hop(x, config.n, config.rho1)


# ============================================
# Gamma-distributed hops
# ============================================

def _scaled_tail(k: int, rho: float) -> float:
    """rho^-k e^{1/rho} Gamma(-k, 1/rho), which equals U(1, 1-k, 1/rho)"""
    z = 1.0 / rho
    if z > _SCALED_GAMMA_LIMIT:
        return tricomi_u(1.0, 1.0 - k, z)
    return rho ** (-k) * upper_incomplete_gamma(-float(k), z, scaled=True)


@memoized("gamma_hop_capacity")
def gamma_hop_capacity(dof: int, rho: float) -> float:
    """1/2 E[log2(1 + rho G)] for G ~ Gamma(dof, 1)"""
    if dof < 1:
        raise ConfigurationError(f"a Gamma hop needs at least one degree of freedom, got {dof}")
    return _BITS * math.fsum(_scaled_tail(k, rho) for k in range(dof))


def gamma_hop_log_moment(dof: int, rho: float) -> float:
    return digamma(float(dof)) + math.log(rho)


def gamma_hop_mean(dof: int, rho: float) -> float:
    return dof * rho


def gamma_hop_moment(dof: int, rho: float, n: float) -> float:
    return math.exp(special.gammaln(dof + n) - special.gammaln(dof) + n * math.log(rho))


# ============================================
# MRC first hop
# ============================================

def mrc_first_hop_g_term(k: int, order: int, rho1: float, rho_i: float) -> Estimate:
    """
    rho1^(k+1)/Gamma(order) * G(rho1, rho_i), the closed form of
    integral_0^inf e^{-x/rho1} x^k (1+x)^-1 (rho1/(rho1 + rho_i x))^order dx.
    """
    family = meijer_g2_family(k + 1.0, [((0.0,), (0.0,))], [((1.0 - order,), (0.0,))], rho1, rho_i)
    scale = math.exp((k + 1.0) * math.log(rho1) - special.gammaln(order))
    return scale * float(family.values[0, 0]), scale * float(family.errors[0, 0])


def mrc_first_hop_integral(k: int, order: int, rho1: float, rho_i: float) -> float:
    """Quadrature of the MRC first-hop integral, the oracle for mrc_first_hop_g_term"""
    def integrand(x):
        return math.exp(-x / rho1) * x ** k / (1.0 + x) * (rho1 / (rho1 + rho_i * x)) ** order

    points = [1.0, rho1, rho1 / rho_i, rho1 * (k + 1.0)]
    return _integrate_pieces(integrand, 0.0, np.inf, points, "MRC first-hop integral")


@memoized("mrc_first_hop_capacity")
def _mrc_first_hop_capacity(config: SystemConfig) -> Estimate:
    ensure_calibrated()
    profile = _profile(config.rho_i)
    rho1 = config.rho1
    terms, errors = [], []

    for k in range(config.n):
        for rho, tau, row in zip(profile.distinct, profile.multiplicities, profile.chi):
            # one contour for every order j + l = 1 .. tau + k
            y_groups = [((1.0 - order,), (0.0,)) for order in range(1, tau + k + 1)]
            family = meijer_g2_family(k + 1.0, [((0.0,), (0.0,))], y_groups, rho1, rho)
            for l in range(k + 1):
                for j, chi in enumerate(row, start=1):
                    if chi == 0.0:
                        continue
                    coefficient = math.comb(k, l) * chi * rho ** l / (math.factorial(k) * math.gamma(j))
                    terms.append(coefficient * family.values[0, j + l - 1])
                    errors.append(abs(coefficient) * family.errors[0, j + l - 1])

    scale = rho1 * _BITS
    return scale * math.fsum(terms), scale * math.fsum(errors)


@memoized("mrc_log_moment")
def _mrc_log_moment(config: SystemConfig) -> float:
    """
    E[ln gamma1] for MRC. The k = 0 slice carries the a-derivative of U at
    a = 0 (U(0, b, z) = 1 for every b, so the b-derivative vanishes); for
    k >= 1 the inner sums are plain U values.
    """
    profile = _profile(config.rho_i)
    rho1 = config.rho1
    psi1 = digamma(1.0)

    terms = []
    for _, j, rho, chi in profile.terms():
        z, b = 1.0 / rho, 1.0 - j
        head = math.log(rho1 / rho) + psi1
        terms.append(chi * (head + tricomi_u_da(0.0, b, z)))

    for k in range(1, config.n):
        for l in range(k + 1):
            for _, j, rho, chi in profile.terms():
                ratio = math.exp(special.gammaln(j + l) - special.gammaln(j))
                u = tricomi_u(float(k), float(k - j - l + 1), 1.0 / rho)
                terms.append(math.comb(k, l) * chi * ratio * rho ** (l - k) * u / k)

    return math.fsum(terms)


@memoized("mrc_moment")
def _mrc_moment(config: SystemConfig, n: float) -> float:
    """E[gamma1^n] = n int x^(n-1) (1 - F) dx, summed term by term"""
    profile = _profile(config.rho_i)
    rho1 = config.rho1
    terms = []
    for k in range(config.n):
        for l in range(k + 1):
            for _, j, rho, chi in profile.terms():
                log_ratio = (
                    special.gammaln(k + n) - special.gammaln(k + 1.0)
                    + special.gammaln(j + l) - special.gammaln(j)
                )
                u = tricomi_u(k + n, k + n - j - l + 1.0, 1.0 / rho)
                terms.append(math.comb(k, l) * chi * math.exp(log_ratio) * rho ** (l - k - n) * u)
    return n * rho1 ** n * math.fsum(terms)


# ============================================
# MMSE first hop
# ============================================

def _mmse_log_weight(config: SystemConfig, index: int) -> float:
    """log of rho_I^(N-m+2) / (Gamma(m) Gamma(N-m+1) Gamma(m-N+M))"""
    n, m = config.n, config.m
    return (
        (n - index + 2.0) * math.log(config.common_rho_i)
        - special.gammaln(index)
        - special.gammaln(n - index + 1.0)
        - special.gammaln(index - n + m)
    )


def _mmse_y_group(config: SystemConfig, index: int):
    n, m = config.n, config.m
    return ((-m - 1.0, index - n - 1.0), (-1.0, index - n - 2.0))


def mmse_first_hop_g_term(index: int, config: SystemConfig) -> Estimate:
    """Closed form of the MMSE first-hop integral for sum index m = index"""
    n, m, rho = config.n, config.m, config.common_rho_i
    family = meijer_g2_family(n + 2.0, [((0.0,), (0.0,))], [_mmse_y_group(config, index)], config.rho1, rho)
    log_scale = (
        special.gammaln(n - index + 2.0)
        - special.gammaln(m + 1.0)
        - special.gammaln(n - index + 1.0)
        + math.log(rho)
        + (n + 1.0) * math.log(config.rho1)
    )
    scale = math.exp(log_scale)
    return scale * float(family.values[0, 0]), scale * float(family.errors[0, 0])


def mmse_first_hop_integral(index: int, config: SystemConfig) -> float:
    """
    Quadrature of integral_0^inf e^{-x/rho1} x^N / (1+x)
    * 2F1(M+1, N-m+1; N-m+2; -rho_I x / rho1) dx with m = index.
    """
    n, m, rho, rho1 = config.n, config.m, config.common_rho_i, config.rho1

    def integrand(x):
        series = gauss_2f1(m + 1.0, n - index + 1.0, n - index + 2.0, -rho * x / rho1)
        return math.exp(-x / rho1) * x ** n / (1.0 + x) * series

    points = [1.0, rho1, rho1 / rho, rho1 * (n + 1.0)]
    return _integrate_pieces(integrand, 0.0, np.inf, points, "MMSE first-hop integral")


@memoized("mmse_first_hop_capacity")
def _mmse_first_hop_capacity(config: SystemConfig) -> Estimate:
    ensure_calibrated()
    indices = list(_mmse_indices(config))
    family = meijer_g2_family(
        config.n + 2.0,
        [((0.0,), (0.0,))],
        [_mmse_y_group(config, index) for index in indices],
        config.rho1,
        config.common_rho_i,
    )
    weights = np.array([math.exp(_mmse_log_weight(config, index)) for index in indices])
    correction = math.fsum(weights * family.values[0])
    error = math.fsum(weights * family.errors[0])

    scale = config.rho1 * _BITS
    value = gamma_hop_capacity(config.n, config.rho1) - scale * correction
    return value, scale * error


def _mmse_g_correction(config: SystemConfig, leading: float) -> Estimate:
    """sum_m weight_m * G^{1,3}_{3,2}(rho_I | leading, -M-1, m-N-1; -1, m-N-2)"""
    n, m = config.n, config.m
    terms, errors = [], []
    for index in _mmse_indices(config):
        spec = MeijerGSpec.build(
            [leading, -m - 1.0, index - n - 1.0],
            [-1.0, index - n - 2.0],
            m=1,
            n=3,
            argument=config.common_rho_i,
        )
        estimate = meijer_g(spec)
        weight = math.exp(_mmse_log_weight(config, index))
        terms.append(weight * estimate.value)
        errors.append(weight * estimate.error)
    return math.fsum(terms), math.fsum(errors)


@memoized("mmse_log_moment")
def _mmse_log_moment(config: SystemConfig) -> Estimate:
    correction, error = _mmse_g_correction(config, -float(config.n))
    return gamma_hop_log_moment(config.n, config.rho1) - correction, error


@memoized("mmse_moment")
def _mmse_moment(config: SystemConfig, n: float) -> Estimate:
    head = math.fsum(math.exp(special.gammaln(q + n) - special.gammaln(q + 1.0)) for q in range(config.n))
    correction, error = _mmse_g_correction(config, -config.n - n)
    scale = n * config.rho1 ** n
    return scale * (head - correction), scale * error


# ============================================
# First-hop building blocks by scheme
# ============================================

def _first_hop_dof(scheme: Scheme, config: SystemConfig) -> int:
    return config.n - config.m if scheme == Scheme.ZF else config.n


def _interference_free(scheme: Scheme, config: SystemConfig) -> bool:
    return scheme in (Scheme.ZF, Scheme.IDEAL) or config.m == 0


def first_hop_capacity(scheme: Scheme, config: SystemConfig) -> Estimate:
    """C_gamma1 and its contour error estimate"""
    scheme = Scheme(scheme)
    check_scheme(scheme, config, analytic=True)
    if _interference_free(scheme, config):
        return gamma_hop_capacity(_first_hop_dof(scheme, config), config.rho1), 0.0
    if scheme == Scheme.MRC:
        return _mrc_first_hop_capacity(config)
    return _mmse_first_hop_capacity(config)


def first_hop_log_moment(scheme: Scheme, config: SystemConfig) -> Estimate:
    """E[ln gamma1] and its error estimate"""
    scheme = Scheme(scheme)
    check_scheme(scheme, config, analytic=True)
    if _interference_free(scheme, config):
        return gamma_hop_log_moment(_first_hop_dof(scheme, config), config.rho1), 0.0
    if scheme == Scheme.MRC:
        return _mrc_log_moment(config), 0.0
    return _mmse_log_moment(config)


def _first_hop_moment(scheme: Scheme, n: float, config: SystemConfig) -> Estimate:
    if not n > 0:
        raise ConfigurationError(f"moment order must be positive, got {n}")
    scheme = Scheme(scheme)
    check_scheme(scheme, config, analytic=True)
    if _interference_free(scheme, config):
        return gamma_hop_moment(_first_hop_dof(scheme, config), config.rho1, n), 0.0
    if scheme == Scheme.MRC:
        return _mrc_moment(config, float(n)), 0.0
    return _mmse_moment(config, float(n))


def general_moment_gamma1(scheme: Scheme, n: float, config: SystemConfig) -> float:
    """E[gamma1^n] for any positive real n"""
    return _first_hop_moment(scheme, n, config)[0]


# ============================================
# Theorem evaluations
# ============================================

def _jensen_bound(scheme: Scheme, bound: str, config: SystemConfig) -> TheoremResult:
    scheme = Scheme(scheme)
    check_scheme(scheme, config, analytic=True)
    ledger = _Ledger(f"{scheme.value} {bound} bound N={config.n} M={config.m}")

    c1, e1 = ledger.term("C_gamma1", lambda: first_hop_capacity(scheme, config))
    c2, _ = ledger.term("C_gamma2", lambda: gamma_hop_capacity(config.n, config.rho2))

    if bound == "upper":
        a1, ea1 = ledger.term("E[ln gamma1]", lambda: first_hop_log_moment(scheme, config))
        a2, _ = ledger.term("E[ln gamma2]", lambda: gamma_hop_log_moment(config.n, config.rho2))
        inside = 1.0 + math.exp(a1) + math.exp(a2)
        cross = _BITS * math.log(inside)
        cross_error = _BITS * math.exp(a1) / inside * ea1
        method = Method.ANALYTIC_UPPER
    elif bound == "lower":
        a1, ea1 = ledger.term("E[gamma1]", lambda: _first_hop_moment(scheme, 1.0, config))
        a2, _ = ledger.term("E[gamma2]", lambda: gamma_hop_mean(config.n, config.rho2))
        cross = _BITS * math.log1p(a1 + a2)
        cross_error = _BITS * ea1 / (1.0 + a1 + a2)
        method = Method.ANALYTIC_LOWER
    else:
        raise ConfigurationError(f"bound must be 'upper' or 'lower', got {bound!r}")

    ledger.record("C_gammaT bound", cross, cross_error)
    return ledger.result(c1, c2, cross, e1 + cross_error, method, scheme)


def mrc_capacity_upper(config: SystemConfig) -> TheoremResult:
    """MRC/MRT upper bound (Jensen on the log-moments)"""
    return _jensen_bound(Scheme.MRC, "upper", config)


def mrc_capacity_lower(config: SystemConfig) -> TheoremResult:
    """MRC/MRT lower bound (Jensen on the means)"""
    return _jensen_bound(Scheme.MRC, "lower", config)


def mmse_capacity_upper(config: SystemConfig) -> TheoremResult:
    return _jensen_bound(Scheme.MMSE, "upper", config)


def mmse_capacity_lower(config: SystemConfig) -> TheoremResult:
    return _jensen_bound(Scheme.MMSE, "lower", config)


def zf_cross_g_term(k: int, j: int, rho1: float, rho2: float) -> Estimate:
    """G(rho1, rho2) / (k! j!), the closed form of zf_cross_integral"""
    family = meijer_g2_family(2.0, [((-float(k),), (0.0,))], [((-float(j),), (0.0,))], rho1, rho2)
    norm = math.factorial(k) * math.factorial(j)
    return float(family.values[0, 0]) / norm, float(family.errors[0, 0]) / norm


def zf_cross_integral(k: int, j: int, rho1: float, rho2: float) -> float:
    """Quadrature of integral_0^inf s e^{-s} (1 + rho1 s)^-(k+1) (1 + rho2 s)^-(j+1) ds"""
    def integrand(s):
        return s * math.exp(-s) * (1.0 + rho1 * s) ** (-(k + 1)) * (1.0 + rho2 * s) ** (-(j + 1))

    return _integrate_pieces(integrand, 0.0, np.inf, [1.0, 1.0 / rho1, 1.0 / rho2], "ZF cross integral")


def _dual_gamma_capacity(n1: int, n2: int, config: SystemConfig, scheme: Scheme, method: Method) -> TheoremResult:
    """
    Exact capacity when gamma1 ~ rho1 Gamma(n1) and gamma2 ~ rho2 Gamma(n2)
    are independent:
        C = rho1 rho2 / (2 ln 2) * sum_{k<n1} sum_{j<n2} G_kj / (k! j!)
    where G_kj is the two-variable G whose integral form is
    k! j! * integral s e^{-s} (1 + rho1 s)^-(k+1) (1 + rho2 s)^-(j+1) ds.
    """
    ensure_calibrated()
    rho1, rho2 = config.rho1, config.rho2
    ledger = _Ledger(f"{scheme.value} {method.value} N1={n1} N2={n2}")

    c1, _ = ledger.term("C_gamma1", lambda: gamma_hop_capacity(n1, rho1))
    c2, _ = ledger.term("C_gamma2", lambda: gamma_hop_capacity(n2, rho2))

    def joint():
        family = meijer_g2_family(
            2.0,
            [((-float(k),), (0.0,)) for k in range(n1)],
            [((-float(j),), (0.0,)) for j in range(n2)],
            rho1,
            rho2,
        )
        norms = np.outer(
            [math.factorial(k) for k in range(n1)],
            [math.factorial(j) for j in range(n2)],
        ).astype(float)
        scale = rho1 * rho2 * _BITS
        value = scale * math.fsum((family.values / norms).ravel())
        error = scale * math.fsum((family.errors / norms).ravel())
        return value, error

    capacity, error = ledger.term("G double sum", joint)
    cross = c1 + c2 - capacity
    ledger.record("C_gammaT", cross, error)
    return ledger.result(c1, c2, cross, error, method, scheme)


def zf_capacity_exact(config: SystemConfig) -> TheoremResult:
    """Exact ZF/MRT capacity; the first hop is Gamma(N - M, rho1)"""
    check_scheme(Scheme.ZF, config, analytic=True)
    return _dual_gamma_capacity(config.n - config.m, config.n, config, Scheme.ZF, Method.ANALYTIC_EXACT)


def largeN_capacity(config: SystemConfig) -> TheoremResult:
    """Interference-free dual-hop capacity with Gamma(N) hops, the large-N limit of ZF and MMSE"""
    return _dual_gamma_capacity(config.n, config.n, config, Scheme.IDEAL, Method.ANALYTIC_LARGEN)


def zf_capacity_mgf(config: SystemConfig, scheme: Scheme = Scheme.ZF) -> TheoremResult:
    """
    Exact ZF (or interference-free) capacity by quadrature of the MGF form
        C = 1/(2 ln 2) * integral_0^inf e^{-s}/s (1 - M1(s)) (1 - M2(s)) ds
    with Mi(s) = (1 + rho_i s)^-Ni.
    """
    scheme = Scheme(scheme)
    check_scheme(scheme, config, analytic=True)
    n1, n2 = _first_hop_dof(scheme, config), config.n
    rho1, rho2 = config.rho1, config.rho2
    ledger = _Ledger(f"{scheme.value} MGF quadrature N1={n1} N2={n2}")

    def integrand(s):
        if s == 0.0:
            return 0.0
        first = -math.expm1(-n1 * math.log1p(rho1 * s))
        second = -math.expm1(-n2 * math.log1p(rho2 * s))
        return math.exp(-s) / s * first * second

    c1, _ = ledger.term("C_gamma1", lambda: gamma_hop_capacity(n1, rho1))
    c2, _ = ledger.term("C_gamma2", lambda: gamma_hop_capacity(n2, rho2))
    capacity, _ = ledger.term(
        "MGF integral",
        lambda: _BITS * _integrate_pieces(integrand, 0.0, np.inf, [1.0, 1.0 / rho1, 1.0 / rho2], "MGF integral"),
    )
    cross = c1 + c2 - capacity
    ledger.record("C_gammaT", cross)
    return ledger.result(c1, c2, cross, 0.0, Method.QUADRATURE, scheme)


def bound_by_quadrature(scheme: Scheme, bound: str, config: SystemConfig) -> TheoremResult:
    """
    The Jensen bounds rebuilt from hop c.d.f.s by quadrature alone:
    capacity_from_cdf for C_gamma1 and C_gamma2, log_moment_from_cdf (upper)
    or moment_from_cdf (lower) for the cross term.
    """
    scheme = Scheme(scheme)
    check_scheme(scheme, config, analytic=True)
    cdf1 = first_hop_cdf(scheme, config)
    dof1 = _first_hop_dof(scheme, config)

    def cdf2(x):
        return cdf_gamma2(x, config)

    scale1, scale2 = dof1 * config.rho1, config.n * config.rho2
    ledger = _Ledger(f"{scheme.value} {bound} bound by quadrature N={config.n} M={config.m}")

    c1, _ = ledger.term("C_gamma1", lambda: capacity_from_cdf(cdf1, scale1))
    c2, _ = ledger.term("C_gamma2", lambda: capacity_from_cdf(cdf2, scale2))

    if bound == "upper":
        a1, _ = ledger.term("E[ln gamma1]", lambda: log_moment_from_cdf(cdf1, scale1))
        a2, _ = ledger.term("E[ln gamma2]", lambda: log_moment_from_cdf(cdf2, scale2))
        cross = _BITS * math.log(1.0 + math.exp(a1) + math.exp(a2))
        method = Method.QUADRATURE_UPPER
    elif bound == "lower":
        a1, _ = ledger.term("E[gamma1]", lambda: moment_from_cdf(cdf1, 1.0, scale1))
        a2, _ = ledger.term("E[gamma2]", lambda: moment_from_cdf(cdf2, 1.0, scale2))
        cross = _BITS * math.log1p(a1 + a2)
        method = Method.QUADRATURE_LOWER
    else:
        raise ConfigurationError(f"bound must be 'upper' or 'lower', got {bound!r}")

    ledger.record("C_gammaT bound", cross)
    return ledger.result(c1, c2, cross, 0.0, method, scheme)


def ceiling_capacity(config: SystemConfig) -> float:
    """Limit of the capacity as rho1 grows without bound: the second hop alone"""
    return gamma_hop_capacity(config.n, config.rho2)


# ============================================
# Calibration of the two-variable G convention
# ============================================

_ZF_RHOS = ((1.0, 1.0), (2.0, 2.0), (10.0, 0.5))
_MRC_CASES = ((1.0, 1.0), (10.0, 2.0), (0.5, 3.0), (100.0, 1.0))
_MMSE_CASES = ((2, 1, 1.0, 1.0), (4, 2, 10.0, 1.0), (3, 3, 2.0, 10.0), (4, 2, 1.0, 0.1))

_calibration_lock = threading.Lock()
_calibrated = False


def _calibration_record(name: str, computed: float, expected: float) -> CheckRecord:
    tolerance = settings.CALIBRATION_TOLERANCE
    rel_error = abs(computed - expected) / max(abs(expected), 1e-300)
    return CheckRecord(
        name=name,
        computed=computed,
        expected=expected,
        rel_error=rel_error,
        tolerance=tolerance,
        passed=rel_error <= tolerance,
    )


def calibrate_bivariate(full: bool = True) -> List[CheckRecord]:
    """
    Compare the two-variable G closed forms with direct quadrature.

    The full suite covers 27 ZF cross-term cases (k, j in 0..2 over three
    SNR pairs), 16 MRC first-hop cases and 4 MMSE first-hop cases; the
    quick suite used before first evaluation runs one case of each kind.
    """
    records = []

    zf_cases = [(k, j, r1, r2) for r1, r2 in _ZF_RHOS for k in range(3) for j in range(3)]
    mrc_cases = [(k, order, r1, ri) for r1, ri in _MRC_CASES for k in range(2) for order in (1, 2)]
    mmse_cases = list(_MMSE_CASES)
    if not full:
        zf_cases, mrc_cases, mmse_cases = [(0, 1, 2.0, 2.0)], [(1, 2, 10.0, 2.0)], [(4, 2, 10.0, 1.0)]

    for k, j, r1, r2 in zf_cases:
        records.append(_calibration_record(
            f"ZF cross k={k} j={j} rho=({r1:g},{r2:g})",
            zf_cross_g_term(k, j, r1, r2)[0],
            zf_cross_integral(k, j, r1, r2),
        ))

    for k, order, r1, ri in mrc_cases:
        records.append(_calibration_record(
            f"MRC first hop k={k} order={order} rho=({r1:g},{ri:g})",
            mrc_first_hop_g_term(k, order, r1, ri)[0],
            mrc_first_hop_integral(k, order, r1, ri),
        ))

    for n, m, r1, ri in mmse_cases:
        config = SystemConfig(n=n, m=m, rho1=r1, rho2=1.0, rho_i=(ri,) * m)
        for index in _mmse_indices(config):
            records.append(_calibration_record(
                f"MMSE first hop N={n} M={m} m={index} rho=({r1:g},{ri:g})",
                mmse_first_hop_g_term(index, config)[0],
                mmse_first_hop_integral(index, config),
            ))

    return records


def ensure_calibrated() -> None:
    """Run the quick calibration once per process; raise CalibrationError on mismatch"""
    global _calibrated
    with _calibration_lock:
        if _calibrated:
            return
        records = calibrate_bivariate(full=False)
        failed = [record for record in records if not record.passed]
        if failed:
            worst = max(failed, key=lambda record: record.rel_error)
            raise CalibrationError(
                f"{len(failed)} calibration case(s) failed, worst {worst.name}: rel. error {worst.rel_error:.3g}"
            )
        _calibrated = True
        logger.info(f"Two-variable G calibration passed ({len(records)} cases)")


# ============================================
# Dispatch
# ============================================

def evaluate(scheme: Scheme, method: str, config: SystemConfig) -> List[TheoremResult]:
    """
    All analytic results a method choice stands for.

    "analytic" is the exact value where one exists (ZF, interference-free)
    and the pair of bounds otherwise; "quadrature" is the MGF integral for
    exact schemes and both quadrature bounds otherwise.
    """
    scheme = Scheme(scheme)
    exact = scheme in (Scheme.ZF, Scheme.IDEAL)

    if method == "analytic":
        if scheme == Scheme.ZF:
            return [zf_capacity_exact(config)]
        if scheme == Scheme.IDEAL:
            return [largeN_capacity(config)]
        return [_jensen_bound(scheme, "upper", config), _jensen_bound(scheme, "lower", config)]
    if method in ("upper", "lower"):
        return [_jensen_bound(scheme, method, config)]
    if method == "largen":
        return [largeN_capacity(config)]
    if method == "quadrature":
        if exact:
            return [zf_capacity_mgf(config, scheme)]
        return [bound_by_quadrature(scheme, "upper", config), bound_by_quadrature(scheme, "lower", config)]
    raise ConfigurationError(f"no analytic evaluation for method {method!r}")
