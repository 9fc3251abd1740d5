# precoding.py
"""
Relay combiners, MRT steering and end-to-end SINR.

Batched functions take a ChannelBatch (leading sample axis) and return numpy
arrays; the per-realization operations wrap a batch of one. With the relay
matrix W = omega * (h2 / ||h2||) * w1, every scheme reduces to
    gamma_end = gamma1 * gamma2 / (gamma1 + gamma2 + 1),
where gamma2 = rho2 ||h2||^2 and gamma1 depends on the combiner.
"""
import logging
import math
from typing import Dict

import numpy as np
from scipy import linalg

from config import settings
from errors import ConfigurationError, NumericalError, RankDeficiencyError, UnequalPowerError
from models import (
    ChannelBatch,
    ChannelRealization,
    RelayWeights,
    Scheme,
    SinrBreakdown,
    SystemConfig,
)

logger = logging.getLogger(__name__)


# ============================================
# Preconditions
# ============================================

def check_scheme(scheme: Scheme, config: SystemConfig, analytic: bool = False) -> None:
    """Raise ConfigurationError if the scheme cannot run at this operating point"""
    scheme = Scheme(scheme)
    if scheme == Scheme.ZF and config.n <= config.m:
        raise ConfigurationError(f"ZF needs N > M, got N={config.n}, M={config.m}")
    if scheme == Scheme.MMSE and analytic and not config.equal_interference:
        raise UnequalPowerError("analytic MMSE expressions need equal interferer powers")


def _check_dimensions(batch: ChannelBatch, config: SystemConfig) -> None:
    if batch.h1.shape[1] != config.n or batch.h_i.shape[2] != config.m:
        raise ConfigurationError(
            f"channel dimensions ({batch.h1.shape[1]}, {batch.h_i.shape[2]}) do not match N={config.n}, M={config.m}"
        )


def _check_rank(h_i: np.ndarray) -> None:
    try:
        singular = np.linalg.svd(h_i, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(f"interference SVD did not converge: {exc}") from exc
    ratio = (singular[..., -1] / singular[..., 0]) ** 2
    worst = float(np.min(ratio))
    if not worst >= settings.RCOND_THRESHOLD:
        raise RankDeficiencyError(f"interference Gram matrix is numerically singular (rcond {worst:.3g})")


# ============================================
# Batched SINR
# ============================================

def _energy(v: np.ndarray) -> np.ndarray:
    return np.sum(v.real ** 2 + v.imag ** 2, axis=-1)


def _zf_residual(batch: ChannelBatch) -> np.ndarray:
    """P h1 with P the projector onto the orthogonal complement of span(H_I)"""
    if batch.h_i.shape[2] == 0:
        return batch.h1
    _check_rank(batch.h_i)
    try:
        q, _ = np.linalg.qr(batch.h_i)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(f"interference QR failed: {exc}") from exc
    coefficients = np.einsum("bnm,bn->bm", q.conj(), batch.h1)
    return batch.h1 - np.einsum("bnm,bm->bn", q, coefficients)


def _interference_covariance(batch: ChannelBatch, config: SystemConfig) -> np.ndarray:
    """R = sum_i rho_Ii h_Ii h_Ii^H + I"""
    powers = np.asarray(config.rho_i, dtype=float)
    scaled = batch.h_i * np.sqrt(powers)[None, None, :]
    covariance = scaled @ np.conj(np.swapaxes(scaled, -1, -2))
    return covariance + np.eye(config.n)[None, :, :]


def first_hop_sinr(scheme: Scheme, batch: ChannelBatch, config: SystemConfig) -> np.ndarray:
    """gamma1 for every realization in the batch"""
    scheme = Scheme(scheme)
    _check_dimensions(batch, config)

    if scheme == Scheme.IDEAL or config.m == 0:
        return config.rho1 * _energy(batch.h1)

    if scheme == Scheme.MRC:
        gain = _energy(batch.h1)
        projections = np.einsum("bn,bnm->bm", batch.h1.conj(), batch.h_i)
        u1 = (np.abs(projections) ** 2) @ np.asarray(config.rho_i) / gain
        return gain * config.rho1 / (u1 + 1.0)

    if scheme == Scheme.ZF:
        check_scheme(scheme, config)
        return config.rho1 * _energy(_zf_residual(batch))

    if scheme == Scheme.MMSE:
        try:
            factor = np.linalg.cholesky(_interference_covariance(batch, config))
            whitened = np.linalg.solve(factor, batch.h1[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise RankDeficiencyError(f"MMSE covariance factorization failed: {exc}") from exc
        return config.rho1 * _energy(whitened)

    raise ConfigurationError(f"unknown scheme {scheme}")


def second_hop_snr(batch: ChannelBatch, config: SystemConfig) -> np.ndarray:
    return config.rho2 * _energy(batch.h2)


def combine(gamma1: np.ndarray, gamma2: np.ndarray) -> np.ndarray:
    """End-to-end SINR of a variable-gain AF relay"""
    return gamma1 * gamma2 / (gamma1 + gamma2 + 1.0)


def end_to_end_sinr(scheme: Scheme, batch: ChannelBatch, config: SystemConfig) -> Dict[str, np.ndarray]:
    gamma1 = first_hop_sinr(scheme, batch, config)
    gamma2 = second_hop_snr(batch, config)
    return {"gamma1": gamma1, "gamma2": gamma2, "gamma_end": combine(gamma1, gamma2)}


# ============================================
# Per-realization SINR
# ============================================

def _breakdown(scheme: Scheme, real: ChannelRealization, config: SystemConfig) -> SinrBreakdown:
    sinr = end_to_end_sinr(scheme, ChannelBatch.from_realization(real), config)
    return SinrBreakdown(
        gamma1=float(sinr["gamma1"][0]),
        gamma2=float(sinr["gamma2"][0]),
        gamma_end=float(sinr["gamma_end"][0]),
        scheme=scheme,
    )


def mrc_sinr(real: ChannelRealization, config: SystemConfig) -> SinrBreakdown:
    return _breakdown(Scheme.MRC, real, config)


def zf_sinr(real: ChannelRealization, config: SystemConfig) -> SinrBreakdown:
    return _breakdown(Scheme.ZF, real, config)


def mmse_sinr(real: ChannelRealization, config: SystemConfig) -> SinrBreakdown:
    """MMSE combining; unequal interferer powers are accepted here"""
    return _breakdown(Scheme.MMSE, real, config)


# ============================================
# Relay weights
# ============================================

def _combiner(scheme: Scheme, real: ChannelRealization, config: SystemConfig) -> np.ndarray:
    h1 = real.h1

    if scheme == Scheme.MRC:
        return h1.conj() / np.linalg.norm(h1)

    if scheme == Scheme.ZF:
        check_scheme(scheme, config)
        residual = _zf_residual(ChannelBatch.from_realization(real))[0]
        norm = np.linalg.norm(residual)
        if norm == 0.0:
            raise NumericalError("desired channel lies in the interference subspace, ZF combiner undefined")
        return residual.conj() / norm

    if scheme == Scheme.MMSE:
        # w1 = h1^H (h1 h1^H + H_I Lambda H_I^H + I / rho_ref)^-1 with Lambda = D / rho_ref
        reference = max(config.rho_i) if config.m else 1.0
        powers = np.asarray(config.rho_i, dtype=float) / reference
        scaled = real.h_i * np.sqrt(powers)[None, :]
        matrix = np.outer(h1, h1.conj()) + scaled @ scaled.conj().T + np.eye(config.n) / reference
        try:
            solved = linalg.cho_solve(linalg.cho_factor(matrix, lower=True), h1)
        except linalg.LinAlgError as exc:
            raise RankDeficiencyError(f"MMSE combiner solve failed: {exc}") from exc
        return solved.conj()

    raise ConfigurationError(f"no relay combiner for scheme {scheme}")


def build_weights(scheme: Scheme, real: ChannelRealization, config: SystemConfig) -> RelayWeights:
    """
    Combiner w1, MRT steering h2/||h2|| and the power factor omega^2.

    omega^2 = rho2 / (|w1 h1|^2 rho1 + sum_i |w1 h_Ii|^2 rho_Ii + ||w1||^2)
    keeps the relay transmit power at rho2 for the given channels.
    """
    scheme = Scheme(scheme)
    w1 = _combiner(scheme, real, config)
    signal = abs(w1 @ real.h1) ** 2 * config.rho1
    leakage = float(np.sum(np.abs(w1 @ real.h_i) ** 2 * np.asarray(config.rho_i))) if config.m else 0.0
    noise = float(np.vdot(w1, w1).real)
    omega2 = config.rho2 / (signal + leakage + noise)
    return RelayWeights(
        w1=w1,
        omega2=omega2,
        steering=real.h2 / np.linalg.norm(real.h2),
        scheme=scheme,
    )


def generic_sinr(weights: RelayWeights, real: ChannelRealization, config: SystemConfig) -> float:
    """
    End-to-end SINR straight from the received-signal model:
        |h2^H W h1|^2 rho1 / (sum_i |h2^H W h_Ii|^2 rho_Ii + ||h2^H W||^2 + 1)
    """
    row = real.h2.conj() @ weights.relay_matrix()
    signal = abs(row @ real.h1) ** 2 * config.rho1
    leakage = float(np.sum(np.abs(row @ real.h_i) ** 2 * np.asarray(config.rho_i))) if config.m else 0.0
    noise = float(np.vdot(row, row).real)
    return float(signal / (leakage + noise + 1.0))
