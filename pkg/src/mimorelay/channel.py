"""Channel realizations for the multi-pair two-way relay.

Rayleigh channels are produced directly in estimate/error form: the MMSE
estimate and its error are independent Gaussians, so sampling them separately
and summing gives the true channel with the right joint statistics. The
geometric mmWave channel is drawn first and then passed through a
per-element LMMSE observation that reproduces the same variance split.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class Rayleigh:
    name = "rayleigh"


@dataclass(frozen=True)
class MmWave:
    """Uniform linear array with ``n_paths`` far-field paths per user."""

    n_paths: int = 10
    spacing: float = 0.5
    name = "mmwave"

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise InvalidParameterError(f"n_paths must be a positive integer, got {self.n_paths}")
        if not self.spacing >= 0:
            raise InvalidParameterError(f"antenna spacing must be >= 0, got {self.spacing}")


ChannelModel = Union[Rayleigh, MmWave]


@dataclass(frozen=True)
class Scenario:
    """One operating point of the relay network.

    Powers are linear and normalized to unit noise variance. ``P_p=np.inf``
    means perfect channel knowledge. ``B=None`` selects ideal (unquantized)
    phase shifters. ``betas`` defaults to unit large-scale gain for every user.
    """

    N: int
    K: int
    P_s: float = 10.0
    P_r: Optional[float] = None
    P_p: float = 10.0
    tau: Optional[int] = None
    betas: Optional[Sequence[float]] = None
    B: Optional[int] = None
    model: ChannelModel = field(default_factory=Rayleigh)
    L: Optional[int] = None

    def __post_init__(self):
        set_ = object.__setattr__
        if int(self.K) != self.K or self.K < 1:
            raise InvalidParameterError(f"K must be a positive integer, got {self.K}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameterError(f"N must be a positive integer, got {self.N}")
        set_(self, "N", int(self.N))
        set_(self, "K", int(self.K))
        if self.L is None:
            set_(self, "L", 2 * self.K)
        elif self.L != 2 * self.K:
            raise InvalidParameterError(
                f"L must equal 2K (got L={self.L}, K={self.K}); 2K < L is not supported"
            )
        if self.P_r is None:
            set_(self, "P_r", 2 * self.K * self.P_s)
        if self.tau is None:
            set_(self, "tau", 2 * self.K)
        if self.tau < 2 * self.K:
            raise InvalidParameterError(f"pilot length tau={self.tau} must be >= 2K={2 * self.K}")
        for name in ("P_s", "P_r", "P_p"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.betas is None:
            betas = np.ones(2 * self.K)
        else:
            betas = np.asarray(self.betas, dtype=float)
        if betas.shape != (2 * self.K,):
            raise InvalidParameterError(f"betas must have length 2K={2 * self.K}, got {betas.shape}")
        if not np.all(betas > 0):
            raise InvalidParameterError("all large-scale gains must be > 0")
        set_(self, "betas", tuple(float(b) for b in betas))
        if self.B is not None and (int(self.B) != self.B or self.B < 1):
            raise InvalidParameterError(f"B must be a positive integer or None, got {self.B}")

    @property
    def perfect_csi(self) -> bool:
        return np.isinf(self.P_p)

    @property
    def equal_path_loss(self) -> bool:
        return len(set(self.betas)) == 1

    @property
    def beta0(self) -> float:
        if not self.equal_path_loss:
            raise InvalidParameterError("scenario does not have equal path loss")
        return self.betas[0]

    def variances(self):
        """Per-user (sigma2, eps2); the mmWave model has unit per-element power."""
        betas = np.ones(2 * self.K) if isinstance(self.model, MmWave) else np.array(self.betas)
        return estimation_variances(betas, self.tau, self.P_p)

    def replace(self, **changes) -> "Scenario":
        if "K" in changes:
            # derived defaults must follow K
            for key in ("L", "betas"):
                changes.setdefault(key, None)
        return replace(self, **changes)


@dataclass(frozen=True)
class ChannelRealization:
    G: np.ndarray
    G_hat: np.ndarray
    E: np.ndarray
    sigma2: np.ndarray
    eps2: np.ndarray


def estimation_variances(beta, tau, P_p):
    """MMSE estimate variance and error variance for gain ``beta``.

    Works elementwise on arrays of gains. ``P_p=np.inf`` gives the
    perfect-pilot limit (error variance exactly zero).
    """
    beta = np.asarray(beta, dtype=float)
    if not np.all(beta > 0):
        raise InvalidParameterError("beta must be > 0")
    if not tau >= 1:
        raise InvalidParameterError(f"tau must be >= 1, got {tau}")
    if not P_p > 0:
        raise InvalidParameterError(f"P_p must be > 0, got {P_p}")
    if np.isinf(P_p):
        sigma2 = beta.copy()
    else:
        snr = tau * P_p
        sigma2 = snr * beta**2 / (snr * beta + 1.0)
    eps2 = beta - sigma2
    return sigma2, eps2


def crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def gen_rayleigh(scenario: Scenario, rng: np.random.Generator) -> ChannelRealization:
    sigma2, eps2 = scenario.variances()
    shape = (scenario.N, 2 * scenario.K)
    G_hat = crandn(rng, shape) * np.sqrt(sigma2)
    E = crandn(rng, shape) * np.sqrt(eps2)
    return ChannelRealization(G_hat + E, G_hat, E, sigma2, eps2)


def array_response(theta, N: int, spacing: float) -> np.ndarray:
    """ULA response row ``[1, e^{j2πd sinθ}, ..., e^{j(N-1)2πd sinθ}] / sqrt(N)``.

    ``theta`` may be an array; the antenna index runs along the last axis.
    """
    theta = np.asarray(theta, dtype=float)
    phase = 2 * np.pi * spacing * np.sin(theta)[..., None] * np.arange(N)
    return np.exp(1j * phase) / np.sqrt(N)


def mmwave_channel(N: int, n_users: int, model: MmWave, rng: np.random.Generator) -> np.ndarray:
    """True N x n_users geometric channel; each entry has unit average power."""
    gains = crandn(rng, (n_users, model.n_paths))
    angles = rng.uniform(0.0, 2 * np.pi, size=(n_users, model.n_paths))
    resp = array_response(angles, N, model.spacing)  # (users, paths, N)
    g = np.sqrt(N / model.n_paths) * np.einsum("up,upn->un", gains, resp)
    return g.T


def gen_mmwave(scenario: Scenario, rng: np.random.Generator) -> ChannelRealization:
    model = scenario.model
    if not isinstance(model, MmWave):
        raise InvalidParameterError("scenario does not use the mmWave model")
    n_users = 2 * scenario.K
    G = mmwave_channel(scenario.N, n_users, model, rng)
    sigma2, eps2 = scenario.variances()
    noise = crandn(rng, G.shape)
    if scenario.perfect_csi:
        G_hat = G.copy()
    else:
        # LMMSE from a per-element observation at pilot SNR tau*P_p, unit prior
        snr = scenario.tau * scenario.P_p
        G_hat = (snr / (snr + 1.0)) * (G + noise / np.sqrt(snr))
    return ChannelRealization(G, G_hat, G - G_hat, sigma2, eps2)


def generate(scenario: Scenario, rng: np.random.Generator) -> ChannelRealization:
    if isinstance(scenario.model, MmWave):
        return gen_mmwave(scenario, rng)
    return gen_rayleigh(scenario, rng)
