# channel.py
"""
Channel realizations and interference power profiles.

Draws are counter based: sample `index` lives in block index // MC_BLOCK_SIZE,
and every block has its own Philox stream keyed by the seed with the block
number as counter. Any realization can be regenerated from (seed, index)
alone, so the sample range can be split across threads in any way.
"""
import logging
import math
from typing import List, Sequence

import numpy as np
from numpy.polynomial import polynomial as poly

from config import settings
from models import ChannelBatch, ChannelRealization, InterferenceProfile, SystemConfig

logger = logging.getLogger(__name__)

_SEED_MASK = (1 << 64) - 1


def _block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _SEED_MASK, counter=block << 128))


def sample_block(config: SystemConfig, seed: int, block: int) -> ChannelBatch:
    """
    All MC_BLOCK_SIZE realizations of one counter block.

    Column 0 of the draw is h1, column 1 is h2, columns 2.. are the
    interferer channels; real and imaginary parts are N(0, 1/2).
    """
    size = settings.MC_BLOCK_SIZE
    rng = _block_generator(seed, block)
    draws = rng.standard_normal((size, config.n, config.m + 2, 2))
    z = (draws[..., 0] + 1j * draws[..., 1]) * math.sqrt(0.5)
    return ChannelBatch(h1=z[:, :, 0], h2=z[:, :, 1], h_i=z[:, :, 2:])


def sample_range(config: SystemConfig, seed: int, start: int, stop: int) -> ChannelBatch:
    """Realizations for sample indices [start, stop)"""
    size = settings.MC_BLOCK_SIZE
    parts = []
    for block in range(start // size, (stop - 1) // size + 1):
        batch = sample_block(config, seed, block)
        lo = max(start - block * size, 0)
        hi = min(stop - block * size, size)
        parts.append((batch.h1[lo:hi], batch.h2[lo:hi], batch.h_i[lo:hi]))
    return ChannelBatch(
        h1=np.concatenate([p[0] for p in parts]),
        h2=np.concatenate([p[1] for p in parts]),
        h_i=np.concatenate([p[2] for p in parts]),
    )


def sample_channels(config: SystemConfig, seed: int, index: int) -> ChannelRealization:
    """The realization with the given sample index; bit-identical on every call"""
    block, offset = divmod(index, settings.MC_BLOCK_SIZE)
    return sample_block(config, seed, block).realization(offset)


def build_profile(rho_i: Sequence[float]) -> InterferenceProfile:
    """
    Group interferer INRs and solve for the characteristic coefficients.

    chi[i][j-1] are the coefficients of
        prod_l (1 + rho_l s)^(-tau_l) = sum_{i,j} chi_ij (1 + rho_i s)^(-j).
    Multiplying through by the product turns this into a polynomial identity
    of degree M - 1, which is solved as an M x M linear system. s is scaled
    by the largest INR to keep the system well conditioned.
    """
    rho_i = tuple(float(v) for v in rho_i)
    if not rho_i:
        return InterferenceProfile()

    distinct = sorted(set(rho_i), reverse=True)
    multiplicities = [rho_i.count(value) for value in distinct]
    ratios = [value / distinct[0] for value in distinct]
    total = len(rho_i)

    columns: List[np.ndarray] = []
    for i, (ratio, tau) in enumerate(zip(ratios, multiplicities)):
        others = np.array([1.0])
        for l, (other, count) in enumerate(zip(ratios, multiplicities)):
            if l != i:
                others = poly.polymul(others, poly.polypow([1.0, other], count))
        for j in range(1, tau + 1):
            column = poly.polymul(others, poly.polypow([1.0, ratio], tau - j))
            padded = np.zeros(total)
            padded[:len(column)] = column
            columns.append(padded)

    rhs = np.zeros(total)
    rhs[0] = 1.0
    solution = np.linalg.solve(np.column_stack(columns), rhs)

    chi = []
    position = 0
    for tau in multiplicities:
        chi.append(tuple(float(v) for v in solution[position:position + tau]))
        position += tau

    logger.debug(f"Interference profile {distinct} x {multiplicities}: chi = {chi}")
    return InterferenceProfile(
        rho_i=rho_i,
        distinct=tuple(distinct),
        multiplicities=tuple(multiplicities),
        chi=tuple(chi),
    )
