"""Achievable rates of the hybrid ZF two-way relay.

Each directed link k -> R -> k' occupies two slots, so its rate is half the
smaller of the two one-hop ergodic rates. Three estimators are provided:

* ``mc_sum_rate``: ergodic mean of log2(1 + instantaneous SINR),
* ``hardening_bound_rate``: mean-plus-uncorrelated-noise lower bound with
  the expectations estimated by Monte Carlo,
* ``closed_form_theorem1``: the large-N deterministic equivalent.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np

from . import channel, hybrid
from .errors import InvalidParameterError, SimulationFailure, SingularChannelError
from .streams import run_trials

MAX_RESAMPLES = 100

METHODS = ("monte-carlo", "hardening-bound", "closed-form-theorem1", "closed-form-full-digital")


@dataclass
class RateReport:
    per_link: np.ndarray  # indexed by source user k of link k -> k'
    method: str
    trials: int = 0
    stderr: Optional[np.ndarray] = None
    resamples: int = 0
    uplink: Optional[np.ndarray] = None  # one-hop rates k -> R
    downlink: Optional[np.ndarray] = None  # one-hop rates R -> k', indexed by k'

    def __post_init__(self):
        self.per_link = np.asarray(self.per_link, dtype=float)
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")

    @property
    def sum(self) -> float:
        return float(np.sum(self.per_link))

    @property
    def sum_stderr(self) -> Optional[float]:
        # links are correlated through the shared channel; this is the
        # independent-links approximation, adequate for tolerance checks
        if self.stderr is None:
            return None
        return float(np.sqrt(np.sum(self.stderr**2)))


@dataclass(frozen=True)
class ScalingSpec:
    alpha: float
    E_s: float = 1.0
    E_r: float = 1.0
    case: str = "fixed-pilot"  # or "scaled-pilot"

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameterError(f"alpha must be > 0, got {self.alpha}")
        if self.case not in ("fixed-pilot", "scaled-pilot"):
            raise InvalidParameterError(f"unknown scaling case {self.case!r}")
        if not (self.E_s > 0 and self.E_r > 0):
            raise InvalidParameterError("power budgets must be > 0")


# --- instantaneous SINRs -------------------------------------------------

def uplink_sinrs(weights, G: np.ndarray, P_s: float) -> np.ndarray:
    """SINR of every stream k -> R after hybrid detection, on the true channel."""
    M = weights.receive @ G
    total = np.sum(np.abs(M) ** 2, axis=1)
    signal = np.abs(np.diag(M)) ** 2
    noise = np.sum(np.abs(weights.receive) ** 2, axis=1)
    return P_s * signal / (P_s * (total - signal) + noise)


def downlink_sinrs(weights, G: np.ndarray, P_r: float) -> np.ndarray:
    """SINR at every receiving user k' for the stream of its partner k."""
    T = G.T @ weights.transmit
    n = T.shape[0]
    rx = np.arange(n)
    total = np.sum(np.abs(T) ** 2, axis=1)
    signal = np.abs(T[rx, hybrid.partner(rx)]) ** 2
    return P_r * signal / (P_r * (total - signal) + 1.0 / weights.mu**2)


def sinr_uplink(k: int, weights, G: np.ndarray, P_s: float) -> float:
    return float(uplink_sinrs(weights, G, P_s)[k])


def sinr_downlink(k_prime: int, weights, G: np.ndarray, P_r: float) -> float:
    return float(downlink_sinrs(weights, G, P_r)[k_prime])


def _link_rates(up: np.ndarray, down: np.ndarray) -> np.ndarray:
    """Half the smaller hop rate, for link k -> partner(k)."""
    k = np.arange(up.shape[-1])
    return 0.5 * np.minimum(up, down[..., hybrid.partner(k)])


# --- Monte Carlo ---------------------------------------------------------

def draw_weights(scenario: channel.Scenario, rng: np.random.Generator, processing: str = "hybrid"):
    """Draw a realization and its weights, resampling singular draws.

    Returns ``(realization, weights, resamples)``.
    """
    for attempt in range(MAX_RESAMPLES + 1):
        real = channel.generate(scenario, rng)
        try:
            if processing == "hybrid":
                w = hybrid.build_weights(real.G_hat, scenario.K, scenario.B)
            elif processing == "full-digital":
                w = hybrid.full_digital_weights(real.G_hat, scenario.K)
            else:
                raise InvalidParameterError(f"unknown processing {processing!r}")
        except SingularChannelError:
            continue
        return real, w, attempt
    raise SimulationFailure(f"{MAX_RESAMPLES + 1} consecutive singular channel draws")


def _sinr_trial(scenario, processing, rng):
    real, w, resamples = draw_weights(scenario, rng, processing)
    return (uplink_sinrs(w, real.G, scenario.P_s),
            downlink_sinrs(w, real.G, scenario.P_r),
            resamples)


def simulate_sinrs(scenario: channel.Scenario, trials: int, seed: int = 0, stream: str = "mc",
                   workers: int = 1, processing: str = "hybrid"):
    """Per-trial SINRs: arrays (trials, 2K) for uplink and downlink, plus resample count."""
    out = run_trials(partial(_sinr_trial, scenario, processing), trials, seed, stream, workers)
    up = np.array([o[0] for o in out])
    down = np.array([o[1] for o in out])
    return up, down, int(sum(o[2] for o in out))


def _mc_report(up: np.ndarray, down: np.ndarray, resamples: int) -> RateReport:
    trials, n = up.shape
    log_up, log_down = np.log2(1 + up), np.log2(1 + down)
    R_up, R_down = log_up.mean(axis=0), log_down.mean(axis=0)
    per_link = _link_rates(R_up, R_down)

    def se(x):
        return x.std(axis=0, ddof=1) / np.sqrt(trials) if trials > 1 else np.zeros(n)

    k = np.arange(n)
    use_up = R_up <= R_down[hybrid.partner(k)]
    stderr = 0.5 * np.where(use_up, se(log_up), se(log_down)[hybrid.partner(k)])
    return RateReport(per_link, "monte-carlo", trials, stderr, resamples, R_up, R_down)


def mc_sum_rate(scenario: channel.Scenario, trials: int, seed: int = 0, stream: str = "mc",
                workers: int = 1, processing: str = "hybrid") -> RateReport:
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    up, down, resamples = simulate_sinrs(scenario, trials, seed, stream, workers, processing)
    return _mc_report(up, down, resamples)


def _sweep_trial(scenario, processing, P_s, P_r, rng):
    real, w, resamples = draw_weights(scenario, rng, processing)
    return (uplink_sinrs(w, real.G, P_s[:, None]),
            downlink_sinrs(w, real.G, P_r[:, None]),
            resamples)


def mc_power_sweep(scenario: channel.Scenario, P_s, P_r, trials: int, seed: int = 0,
                   stream: str = "mc", workers: int = 1, processing: str = "hybrid") -> list:
    """Monte Carlo rates at several (P_s, P_r) points on shared channel draws.

    The ZF weights do not depend on transmit power, so each realization is
    reused across the whole sweep. Point i matches ``mc_sum_rate`` run on
    ``scenario`` with powers (P_s[i], P_r[i]) and the same seed and stream.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    P_s = np.atleast_1d(np.asarray(P_s, dtype=float))
    P_r = np.atleast_1d(np.asarray(P_r, dtype=float))
    if P_s.shape != P_r.shape:
        raise InvalidParameterError("P_s and P_r sweeps must have the same length")
    out = run_trials(partial(_sweep_trial, scenario, processing, P_s, P_r), trials, seed, stream, workers)
    up = np.stack([o[0] for o in out], axis=1)  # (points, trials, 2K)
    down = np.stack([o[1] for o in out], axis=1)
    resamples = int(sum(o[2] for o in out))
    return [_mc_report(up[i], down[i], resamples) for i in range(len(P_s))]


def _bits_trial(scenario, bits, P_s, P_r, rng):
    for attempt in range(MAX_RESAMPLES + 1):
        real = channel.generate(scenario, rng)
        try:
            ws = [hybrid.build_weights(real.G_hat, scenario.K, B) for B in bits]
        except SingularChannelError:
            continue
        return ([uplink_sinrs(w, real.G, P_s[:, None]) for w in ws],
                [downlink_sinrs(w, real.G, P_r[:, None]) for w in ws],
                attempt)
    raise SimulationFailure(f"{MAX_RESAMPLES + 1} consecutive singular channel draws")


def mc_bits_sweep(scenario: channel.Scenario, bits, P_s, P_r, trials: int, seed: int = 0,
                  stream: str = "mc", workers: int = 1) -> dict:
    """Hybrid Monte Carlo rates for several phase resolutions on shared draws.

    ``bits`` holds integers or None (unquantized). A draw that is singular for
    any resolution is resampled for all of them. Returns {B: [RateReport per
    power point]}.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    bits = list(bits)
    P_s = np.atleast_1d(np.asarray(P_s, dtype=float))
    P_r = np.atleast_1d(np.asarray(P_r, dtype=float))
    if P_s.shape != P_r.shape:
        raise InvalidParameterError("P_s and P_r sweeps must have the same length")
    out = run_trials(partial(_bits_trial, scenario, bits, P_s, P_r), trials, seed, stream, workers)
    resamples = int(sum(o[2] for o in out))
    result = {}
    for b, B in enumerate(bits):
        up = np.stack([o[0][b] for o in out], axis=1)
        down = np.stack([o[1][b] for o in out], axis=1)
        result[B] = [_mc_report(up[i], down[i], resamples) for i in range(len(P_s))]
    return result


def _hardening_trial(scenario, rng):
    real, w, resamples = draw_weights(scenario, rng)
    M = w.receive @ real.G
    T = real.G.T @ w.transmit
    n = M.shape[0]
    rx = np.arange(n)
    up_gain = np.diag(M).copy()
    up_int = np.sum(np.abs(M) ** 2, axis=1) - np.abs(up_gain) ** 2
    up_noise = np.sum(np.abs(w.receive) ** 2, axis=1)
    down_gain = T[rx, hybrid.partner(rx)].copy()
    down_int = np.sum(np.abs(T) ** 2, axis=1) - np.abs(down_gain) ** 2
    return up_gain, up_int, up_noise, down_gain, down_int, 1.0 / w.mu**2, resamples


def hardening_bound_rate(scenario: channel.Scenario, trials: int, seed: int = 0,
                         stream: str = "hardening", workers: int = 1) -> RateReport:
    """Worst-case-uncorrelated-noise bound with Monte Carlo moments.

    The relay scaling enters as the deterministic constant E{||F_t W_t||_F^2}.
    """
    if trials < 2:
        raise InvalidParameterError("hardening bound needs at least 2 trials for a variance")
    out = run_trials(partial(_hardening_trial, scenario), trials, seed, stream, workers)
    cols = [np.array([o[i] for o in out]) for i in range(7)]
    up_gain, up_int, up_noise, down_gain, down_int, inv_mu2, resamples = cols
    P_s, P_r = scenario.P_s, scenario.P_r

    def var(x):
        return np.mean(np.abs(x - x.mean(axis=0)) ** 2, axis=0) * trials / (trials - 1)

    sinr_up = P_s * np.abs(up_gain.mean(axis=0)) ** 2 / (
        P_s * var(up_gain) + P_s * up_int.mean(axis=0) + up_noise.mean(axis=0))
    sinr_down = P_r * np.abs(down_gain.mean(axis=0)) ** 2 / (
        P_r * (var(down_gain) + down_int.mean(axis=0)) + inv_mu2.mean())
    R_up, R_down = np.log2(1 + sinr_up), np.log2(1 + sinr_down)
    return RateReport(_link_rates(R_up, R_down), "hardening-bound", trials, None,
                      int(resamples.sum()), R_up, R_down)


# --- closed forms --------------------------------------------------------

@dataclass(frozen=True)
class ConditionCheck:
    ok: bool
    threshold: int  # floor(4 L^2 / pi); need N above this
    margin: int  # N - threshold
    L_max: int  # largest L admissible for this N


def max_rf_chains(N: int) -> int:
    return int(math.floor(math.sqrt(math.pi * N / 4)))


def condition_check(N: int, L: int) -> ConditionCheck:
    threshold = int(math.floor(4 * L * L / math.pi))
    return ConditionCheck(N > threshold, threshold, N - threshold, max_rf_chains(N))


def sinr_argument(scenario: channel.Scenario) -> np.ndarray:
    """Per-link effective SINR factor x (min of uplink and downlink terms)."""
    sigma2, eps2 = scenario.variances()
    k = np.arange(2 * scenario.K)
    P_s, P_r = scenario.P_s, scenario.P_r
    up = P_s * sigma2 / (1 + P_s * eps2.sum())
    down = P_r / ((1 + P_r * eps2[hybrid.partner(k)]) * np.sum(1 / sigma2))
    return np.minimum(up, down)


def closed_form_theorem1(scenario: channel.Scenario) -> RateReport:
    check = condition_check(scenario.N, scenario.L)
    if not check.ok:
        warnings.warn(f"N={scenario.N} <= floor(4L^2/pi)={check.threshold}; "
                      "large-N rate expression may be inaccurate", stacklevel=2)
    x = sinr_argument(scenario)
    return RateReport(0.5 * np.log2(1 + math.pi * scenario.N * x / 4), "closed-form-theorem1")


def full_digital_rate(scenario: channel.Scenario) -> RateReport:
    if not scenario.N > 2 * scenario.K:
        raise InvalidParameterError(f"full-digital ZF needs N > 2K (N={scenario.N}, K={scenario.K})")
    x = sinr_argument(scenario)
    return RateReport(0.5 * np.log2(1 + (scenario.N - 2 * scenario.K) * x), "closed-form-full-digital")


def equal_path_loss_sum_rate(N, K, P_s, P_r, sigma2, eps2):
    """Sum rate when every user has the same large-scale gain (vectorizes over inputs)."""
    up = P_s * math.pi * N * sigma2 / (4 * (1 + 2 * K * P_s * eps2))
    down = P_r * math.pi * N * sigma2 / (8 * K * (1 + P_r * eps2))
    return K * np.log2(1 + np.minimum(up, down))


def scaled_powers(scenario: channel.Scenario, spec: ScalingSpec):
    """(P_s, P_r, P_p) after scaling the budgets by N^-alpha."""
    scale = float(scenario.N) ** (-spec.alpha)
    P_s = spec.E_s * scale
    P_r = 2 * scenario.K * spec.E_r * scale
    P_p = P_s if spec.case == "scaled-pilot" else scenario.P_p
    return P_s, P_r, P_p


def scaled_sum_rate(scenario: channel.Scenario, spec: ScalingSpec) -> RateReport:
    P_s, P_r, P_p = scaled_powers(scenario, spec)
    sigma2, eps2 = channel.estimation_variances(scenario.beta0, scenario.tau, P_p)
    total = equal_path_loss_sum_rate(scenario.N, scenario.K, P_s, P_r, sigma2, eps2)
    return RateReport(np.full(2 * scenario.K, total / (2 * scenario.K)), "closed-form-theorem1")


def scaling_limit(scenario: channel.Scenario, spec: ScalingSpec) -> float:
    """Sum rate as N -> infinity under the given scaling (inf or 0 off the critical exponent)."""
    K, b0, tau = scenario.K, scenario.beta0, scenario.tau
    critical = 1.0 if spec.case == "fixed-pilot" else 0.5
    if spec.alpha < critical:
        return math.inf
    if spec.alpha > critical:
        return 0.0
    if spec.case == "fixed-pilot":
        sigma2, _ = channel.estimation_variances(b0, tau, scenario.P_p)
        arg = min(spec.E_s, spec.E_r) * math.pi * float(sigma2) / 4
    else:
        arg = math.pi * tau * spec.E_s * min(spec.E_s, spec.E_r) * b0**2 / 4
    return K * math.log2(1 + arg)


# --- convergence diagnostics ---------------------------------------------

@dataclass
class ConvergenceStats:
    mean: float
    var: float
    stderr: float
    expected_mean: float
    expected_var: float
    trials: int

    @property
    def rel_error(self) -> float:
        return abs(self.mean - self.expected_mean) / self.expected_mean


def _offdiag_ratio_trial(scenario, rng):
    real = channel.generate(scenario, rng)
    F_r = hybrid.analog_combiner(real.G_hat)
    if scenario.B is not None:
        F_r = hybrid.quantize_phases(F_r, scenario.B)
    H = F_r @ real.G_hat
    d = np.diag(H)
    A = H - np.diag(d)
    return float(np.sum(np.abs(A / d[None, :]) ** 2))


def convergence_diagnostic(scenario: channel.Scenario, trials: int, seed: int = 0,
                           stream: str = "convergence", workers: int = 1) -> ConvergenceStats:
    """Monte Carlo moments of X = ||A D^-1||_F^2 for H_eq = F_r G_hat = D + A."""
    X = np.array(run_trials(partial(_offdiag_ratio_trial, scenario), trials, seed, stream, workers))
    K, N = scenario.K, scenario.N
    return ConvergenceStats(
        mean=float(X.mean()),
        var=float(X.var(ddof=1)) if trials > 1 else 0.0,
        stderr=float(X.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0,
        expected_mean=8 * K * (2 * K - 1) / (math.pi * N),
        expected_var=32 * K * (2 * K - 1) / (math.pi**2 * N**2),
        trials=trials,
    )


@dataclass
class RatioMomentRow:
    a: float
    estimate: float
    deviation: float  # estimate - 1
    leading_term: float  # 3 sigma^2 / a^2
    stderr: float


def ratio_moment_check(sigma: float, a_values, trials: int, seed: int = 0) -> list:
    """Estimate E{a^2 / (y + a)^2} for y ~ N(0, sigma^2) at each a.

    Uses antithetic pairs (y, -y), which cancel the odd-order terms of the
    expansion and leave the 3 sigma^2 / a^2 correction resolvable.
    """
    if sigma < 0:
        raise InvalidParameterError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    y = sigma * rng.standard_normal(trials)
    rows = []
    for a in a_values:
        if not a > 0:
            raise InvalidParameterError("a must be > 0")
        pair = 0.5 * (a**2 / (a + y) ** 2 + a**2 / (a - y) ** 2)
        est = float(pair.mean())
        se = float(pair.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
        rows.append(RatioMomentRow(a, est, est - 1.0, 3 * sigma**2 / a**2, se))
    return rows


# --- overhead ------------------------------------------------------------

def overhead_factor(T: int, N: int, K: int, mode: str) -> float:
    """Fraction of the coherence block left for data after channel training."""
    if mode == "limited":
        training = N
    elif mode == "full":
        training = 2 * K
    else:
        raise InvalidParameterError(f"mode must be 'limited' or 'full', got {mode!r}")
    if not T >= training:
        raise InvalidParameterError(f"coherence time T={T} shorter than training length {training}")
    if math.isinf(T):
        return 1.0
    return (T - training) / T


def throughput_with_overhead(rate, T, N: int, K: int, mode: str):
    return rate * overhead_factor(T, N, K, mode)
