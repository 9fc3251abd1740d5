# mc.py
"""
Monte Carlo ergodic capacity.

The sample range [0, samples) is cut into counter blocks; each block is
reduced to (count, mean, M2) independently and the block summaries are
merged in block order with Chan's pairwise update. The result is therefore
bit-identical for any number of worker threads.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from channel import sample_block
from config import settings
from errors import ConfigurationError
from models import CapacityEstimate, HopQuantity, Method, MomentEstimate, Scheme, SystemConfig
from precoding import check_scheme, end_to_end_sinr

logger = logging.getLogger(__name__)

Statistic = Callable[[Dict[str, np.ndarray]], np.ndarray]
Summary = Tuple[int, float, float]

_LN2 = math.log(2.0)


def _capacity_statistic(sinr: Dict[str, np.ndarray]) -> np.ndarray:
    return np.log1p(sinr["gamma_end"]) / (2.0 * _LN2)


def _check_request(scheme: Scheme, config: SystemConfig, samples: int) -> None:
    if samples < settings.MC_MIN_SAMPLES:
        raise ConfigurationError(f"at least {settings.MC_MIN_SAMPLES} samples are required, got {samples}")
    check_scheme(scheme, config)


def _block_summary(
    statistic: Statistic, scheme: Scheme, config: SystemConfig, seed: int, block: int, count: int
) -> Summary:
    batch = sample_block(config, seed, block)
    if count < batch.size:
        batch = batch.head(count)
    values = statistic(end_to_end_sinr(scheme, batch, config))
    mean = float(np.mean(values))
    return count, mean, float(np.sum((values - mean) ** 2))


def _merge(summaries: List[Summary]) -> Summary:
    total, mean, m2 = summaries[0]
    for count, block_mean, block_m2 in summaries[1:]:
        combined = total + count
        delta = block_mean - mean
        mean += delta * count / combined
        m2 += block_m2 + delta * delta * total * count / combined
        total = combined
    return total, mean, m2


def _block_counts(samples: int) -> List[int]:
    size = settings.MC_BLOCK_SIZE
    full, rest = divmod(samples, size)
    return [size] * full + ([rest] if rest else [])


def sample_mean(
    statistic: Statistic,
    scheme: Scheme,
    config: SystemConfig,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> MomentEstimate:
    """
    Mean and standard error of statistic(sinr) over the sample index range.

    `statistic` maps the dict of gamma1/gamma2/gamma_end arrays of one block
    to one value per realization.
    """
    scheme = Scheme(scheme)
    samples = settings.MC_SAMPLES if samples is None else samples
    seed = settings.MC_SEED if seed is None else seed
    threads = settings.MC_THREADS if threads is None else threads
    _check_request(scheme, config, samples)

    counts = _block_counts(samples)
    work = [(statistic, scheme, config, seed, block, count) for block, count in enumerate(counts)]

    if threads <= 1 or len(work) == 1:
        summaries = [_block_summary(*item) for item in work]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            summaries = list(pool.map(lambda item: _block_summary(*item), work))

    total, mean, m2 = _merge(summaries)
    stderr = math.sqrt(m2 / (total - 1)) / math.sqrt(total)
    return MomentEstimate(value=mean, stderr=stderr, samples=total)


def estimate_capacity(
    scheme: Scheme,
    config: SystemConfig,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> CapacityEstimate:
    """Ergodic capacity 1/2 E[log2(1 + gamma_end)] in bits/s/Hz"""
    seed = settings.MC_SEED if seed is None else seed
    estimate = sample_mean(_capacity_statistic, scheme, config, samples, seed, threads)
    logger.info(
        f"MC {Scheme(scheme).value} N={config.n} M={config.m} rho1={config.rho1:g}: "
        f"{estimate.value:.6f} +/- {estimate.stderr:.2g} ({estimate.samples} samples, seed {seed})"
    )
    return CapacityEstimate(
        value=max(estimate.value, 0.0),
        stderr=estimate.stderr,
        samples=estimate.samples,
        method=Method.MC,
        seed=seed,
    )


def estimate_moment(
    scheme: Scheme,
    config: SystemConfig,
    which: HopQuantity,
    order: float = 1.0,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> MomentEstimate:
    """Sample mean of gamma**order for one hop quantity"""
    key = HopQuantity(which).value
    return sample_mean(lambda sinr: sinr[key] ** order, scheme, config, samples, seed, threads)


def estimate_log_moment(
    scheme: Scheme,
    config: SystemConfig,
    which: HopQuantity,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> MomentEstimate:
    """Sample mean of ln(gamma) for one hop quantity"""
    key = HopQuantity(which).value
    return sample_mean(lambda sinr: np.log(sinr[key]), scheme, config, samples, seed, threads)


class EmpiricalCdf:
    """Step c.d.f. of a sorted sample."""

    def __init__(self, values: np.ndarray):
        self.values = np.sort(np.asarray(values, dtype=float))

    @property
    def size(self) -> int:
        return self.values.size

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.size

    def ks_distance(self, cdf: Callable[[np.ndarray], np.ndarray], max_points: int = 2000) -> float:
        """
        Kolmogorov-Smirnov distance to a vectorized c.d.f.

        The supremum is taken over at most `max_points` order statistics,
        evenly spaced in rank.
        """
        n = self.size
        ranks = np.unique(np.linspace(0, n - 1, min(n, max_points)).astype(int))
        reference = np.asarray(cdf(self.values[ranks]), dtype=float)
        above = (ranks + 1) / n - reference
        below = reference - ranks / n
        return float(max(above.max(), below.max()))


def empirical_cdf(
    scheme: Scheme,
    config: SystemConfig,
    which: HopQuantity,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> EmpiricalCdf:
    scheme = Scheme(scheme)
    samples = settings.MC_SAMPLES if samples is None else samples
    seed = settings.MC_SEED if seed is None else seed
    _check_request(scheme, config, samples)

    key = HopQuantity(which).value
    parts = []
    for block, count in enumerate(_block_counts(samples)):
        batch = sample_block(config, seed, block)
        if count < batch.size:
            batch = batch.head(count)
        parts.append(end_to_end_sinr(scheme, batch, config)[key])
    return EmpiricalCdf(np.concatenate(parts))
