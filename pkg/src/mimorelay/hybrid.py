"""Hybrid analog/digital zero-forcing weights at the relay.

The analog stage is phase-only (entries of modulus 1/sqrt(N)) and matched to
the phases of the channel estimate; the digital stage inverts the resulting
2K x 2K baseband channel. The downlink reuses the uplink weights transposed,
with a pair-swap permutation so stream k is delivered to its partner k'.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameterError, SingularChannelError

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class HybridWeights:
    F_r: np.ndarray  # 2K x N analog combiner
    W_r: np.ndarray  # 2K x 2K digital combiner
    F_t: np.ndarray  # N x 2K analog precoder
    W_t: np.ndarray  # 2K x 2K digital precoder
    mu: float
    P: np.ndarray

    @property
    def receive(self) -> np.ndarray:
        """Overall uplink receive matrix ``W_r F_r`` (2K x N)."""
        return self.W_r @ self.F_r

    @property
    def transmit(self) -> np.ndarray:
        """Overall downlink precoder ``F_t W_t`` before scaling by mu (N x 2K)."""
        return self.F_t @ self.W_t


@dataclass(frozen=True)
class FullDigitalWeights:
    """Full-RF-chain ZF benchmark exposing the same receive/transmit surface."""

    receive: np.ndarray
    transmit: np.ndarray
    mu: float
    P: np.ndarray


def pair_permutation(K: int) -> np.ndarray:
    """Block-diagonal matrix of K 2x2 swap blocks; maps user 2i <-> 2i+1."""
    P = np.zeros((2 * K, 2 * K))
    idx = np.arange(2 * K)
    P[idx, idx ^ 1] = 1.0
    return P


def partner(k):
    """Index of the user paired with ``k`` (0-based: 0<->1, 2<->3, ...)."""
    return k ^ 1


def analog_combiner(G_hat: np.ndarray) -> np.ndarray:
    """Phase-only combiner ``[F_r]_{j,i} = exp(-j arg g_hat_{i,j}) / sqrt(N)``.

    A zero estimate entry is given phase 0.
    """
    N = G_hat.shape[0]
    mag = np.abs(G_hat)
    unit = np.ones_like(G_hat)
    nz = mag > 0
    unit[nz] = np.conj(G_hat[nz]) / mag[nz]
    return unit.T / np.sqrt(N)


def quantize_angles(phi, B: int) -> np.ndarray:
    """Snap phases to the nearest point of ``{2*pi*m / 2**B}``.

    Ties go to the smaller codebook index, including the wrap-around tie
    between the last index and index 0.
    """
    if int(B) != B or B < 1:
        raise InvalidParameterError(f"B must be a positive integer, got {B}")
    levels = 2**B
    step = 2 * np.pi / levels
    q = np.mod(np.asarray(phi, dtype=float), 2 * np.pi) / step
    lower = np.floor(q)
    frac = q - lower
    idx = lower + (frac > 0.5)
    idx = np.where((frac == 0.5) & (lower == levels - 1), 0, np.mod(idx, levels))
    return idx * step


def quantize_phases(F_r: np.ndarray, B: int) -> np.ndarray:
    N = F_r.shape[1]
    return np.exp(1j * quantize_angles(np.angle(F_r), B)) / np.sqrt(N)


def digital_combiner(F_r: np.ndarray, G_hat: np.ndarray, max_cond: float = MAX_CONDITION) -> np.ndarray:
    H_eq = F_r @ G_hat
    cond = np.linalg.cond(H_eq)
    if not cond <= max_cond:
        raise SingularChannelError(cond)
    return np.linalg.inv(H_eq)


def downlink_weights(F_r: np.ndarray, W_r: np.ndarray, K: int):
    P = pair_permutation(K)
    return F_r.T, W_r.T @ P, P


def normalization(F_t: np.ndarray, W_t: np.ndarray) -> float:
    """Per-realization scaling so the relay's transmit vector has unit power."""
    norm = np.linalg.norm(F_t @ W_t)
    if not norm > 0:
        raise InvalidParameterError("precoder is identically zero")
    return 1.0 / norm


def build_weights(G_hat: np.ndarray, K: int, B: Optional[int] = None) -> HybridWeights:
    if G_hat.shape[1] != 2 * K:
        raise InvalidParameterError(f"estimate has {G_hat.shape[1]} columns, expected 2K={2 * K}")
    F_r = analog_combiner(G_hat)
    if B is not None:
        F_r = quantize_phases(F_r, B)
    W_r = digital_combiner(F_r, G_hat)
    F_t, W_t, P = downlink_weights(F_r, W_r, K)
    return HybridWeights(F_r, W_r, F_t, W_t, normalization(F_t, W_t), P)


def full_digital_weights(G_hat: np.ndarray, K: int, max_cond: float = MAX_CONDITION) -> FullDigitalWeights:
    gram = G_hat.conj().T @ G_hat
    cond = np.linalg.cond(gram)
    if not cond <= max_cond:
        raise SingularChannelError(cond)
    receive = np.linalg.solve(gram, G_hat.conj().T)
    P = pair_permutation(K)
    transmit = receive.T @ P
    return FullDigitalWeights(receive, transmit, 1.0 / np.linalg.norm(transmit), P)
