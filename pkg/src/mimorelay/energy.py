"""Energy efficiency of the relay network under equal path loss.

EE is the large-N sum rate divided by the consumed power: half-duplex
transmit power through the amplifier efficiency, plus per-RF-chain,
constant, and per-phase-shifter circuit power.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .channel import Scenario, estimation_variances
from .errors import InvalidParameterError, OptimizerFailure
from .rate import equal_path_loss_sum_rate, max_rf_chains

LN2 = math.log(2.0)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PowerModel:
    kappa: float = 0.375
    P_0: float = 1.0
    P_const: float = 20.0
    P_APS: float = 0.02

    def __post_init__(self):
        if not 0 < self.kappa < 1:
            raise InvalidParameterError(f"kappa must lie in (0, 1), got {self.kappa}")
        for name in ("P_0", "P_const", "P_APS"):
            if not getattr(self, name) >= 0:
                raise InvalidParameterError(f"{name} must be >= 0")

    def circuit_power(self, K, N) -> float:
        """Everything except transmit power: RF chains, constant part, shifters."""
        return 2 * K * self.P_0 + self.P_const + 2 * K * N * self.P_APS


@dataclass
class EEReport:
    ee: float
    se: float
    p_sum: float
    P_s: float
    P_r: float
    K: int
    N: int
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EECoefficients:
    a0: float
    a1: float
    P_c: float
    # RF-chain parameterization; infinite when eps0^2 = 0
    a: float = math.inf
    b: float = math.inf
    d: float = math.nan
    m: float = math.nan


def total_power(P_s, P_r, K: int, N: int, model: PowerModel):
    return 0.5 * (2 * K * P_s + P_r) / model.kappa + model.circuit_power(K, N)


def _equal_variances(scenario: Scenario):
    sigma2, eps2 = estimation_variances(scenario.beta0, scenario.tau, scenario.P_p)
    return float(sigma2), float(eps2)


def coefficients(scenario: Scenario, model: PowerModel, P_s: Optional[float] = None) -> EECoefficients:
    sigma2, eps2 = _equal_variances(scenario)
    N, K = scenario.N, scenario.K
    a0 = math.pi * N * sigma2
    a1 = 8 * K * eps2
    P_c = model.circuit_power(K, N)
    if P_s is None or eps2 == 0:
        return EECoefficients(a0, a1, P_c)
    d = 2 * P_s / model.kappa + 2 * model.P_0 + 2 * N * model.P_APS
    return EECoefficients(a0, a1, P_c, a=1 / (2 * P_s * eps2), b=math.pi * N * sigma2 / (8 * eps2),
                          d=d, m=model.P_const / d)


def ee_value(P_s, P_r, scenario: Scenario, model: PowerModel):
    """EE for arrays of (P_s, P_r); broadcasting follows numpy rules."""
    sigma2, eps2 = _equal_variances(scenario)
    se = equal_path_loss_sum_rate(scenario.N, scenario.K, P_s, P_r, sigma2, eps2)
    return se / total_power(P_s, P_r, scenario.K, scenario.N, model)


def energy_efficiency(P_s: float, P_r: float, scenario: Scenario, model: PowerModel) -> EEReport:
    sigma2, eps2 = _equal_variances(scenario)
    se = float(equal_path_loss_sum_rate(scenario.N, scenario.K, P_s, P_r, sigma2, eps2))
    p_sum = float(total_power(P_s, P_r, scenario.K, scenario.N, model))
    return EEReport(se / p_sum, se, p_sum, P_s, P_r, scenario.K, scenario.N)


def ee_on_line(P_s, coef: EECoefficients, K: int, kappa: float):
    """EE along P_r = 2K P_s, written with a0, a1, P_c."""
    P_s = np.asarray(P_s, dtype=float)
    se = K * np.log2(1 + coef.a0 * P_s / (coef.a1 * P_s + 4))
    return se / (2 * K * P_s / kappa + coef.P_c)


# --- power split ----------------------------------------------------------

def split_sweep(P_T: float, scenario: Scenario, model: PowerModel, points: int = 99):
    """EE along the budget line 2K P_s + P_r = P_T; returns (ratios P_r/P_T, EE)."""
    ratio = np.arange(1, points + 1) / (points + 1)
    P_r = ratio * P_T
    P_s = (P_T - P_r) / (2 * scenario.K)
    return ratio, ee_value(P_s, P_r, scenario, model)


def optimal_power_split(P_T: float, scenario: Scenario, model: PowerModel, verify: bool = True):
    """Best (P_s, P_r) under a total transmit budget: half of it to the relay."""
    if not P_T > 0:
        raise InvalidParameterError(f"P_T must be > 0, got {P_T}")
    P_s, P_r = P_T / (4 * scenario.K), P_T / 2
    if verify:
        _, sweep = split_sweep(P_T, scenario, model)
        best = float(ee_value(P_s, P_r, scenario, model))
        if np.max(sweep) > best * (1 + 1e-12):
            raise OptimizerFailure("equal split is not the maximum on the budget line")
    return P_s, P_r


# --- transmit power -------------------------------------------------------

def kkt_residual(P_s: float, coef: EECoefficients, K: int, kappa: float) -> float:
    """Stationarity residual along P_r = 2K P_s; positive where EE increases."""
    u1 = (coef.a0 + coef.a1) * P_s + 4
    u2 = coef.a1 * P_s + 4
    g = 2 * K * P_s / kappa + coef.P_c
    return 2 * coef.a0 * kappa * g / (u1 * u2) - K * math.log(u1 / u2)


def ee_from_optimum(P_s: float, coef: EECoefficients, kappa: float) -> float:
    """Maximal EE expressed through the optimal P_s alone."""
    return 2 * coef.a0 * kappa / (((coef.a0 + coef.a1) * P_s + 4) * (coef.a1 * P_s + 4) * LN2)


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 500):
    """Golden-section search for the maximum of a unimodal ``f`` on [lo, hi].

    Returns ``(lo, hi, iterations)`` for the final bracketing interval.
    """
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    it = 0
    while hi - lo > tol and it < max_iter:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
        it += 1
    return lo, hi, it


def optimize_Ps(scenario: Scenario, model: PowerModel, bracket=(1e-6, 1e6),
                growth: float = 1e3, limits=(1e-30, 1e30)) -> EEReport:
    """Maximize EE over P_s with P_r = 2K P_s.

    EE is quasi-concave in P_s, so golden-section search in log P_s finds the
    global maximum once the bracket has the stationary point inside it. The
    result is polished by root-finding on the KKT residual.
    """
    K, kappa = scenario.K, model.kappa
    coef = coefficients(scenario, model)
    if coef.P_c <= 0:
        raise OptimizerFailure("EE has no interior maximum without circuit power")
    lo, hi = bracket
    r = lambda p: kkt_residual(p, coef, K, kappa)  # noqa: E731
    while r(lo) <= 0:
        lo /= growth
        if lo < limits[0]:
            raise OptimizerFailure("EE still decreasing at the lower bracket limit")
    while r(hi) >= 0:
        hi *= growth
        if hi > limits[1]:
            raise OptimizerFailure("EE still increasing at the upper bracket limit")

    obj = lambda t: float(ee_on_line(math.exp(t), coef, K, kappa))  # noqa: E731
    t_lo, t_hi, iterations = golden_section_max(obj, math.log(lo), math.log(hi))
    a, b = math.exp(t_lo), math.exp(t_hi)
    if not (r(a) > 0 > r(b)):
        # interval collapsed onto the root within rounding; widen to the full bracket
        a, b = lo, hi
    P_star = brentq(r, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    ee_star = float(ee_on_line(P_star, coef, K, kappa))
    se_star = K * math.log2(1 + coef.a0 * P_star / (coef.a1 * P_star + 4))
    log_term = K * math.log(1 + coef.a0 * P_star / (coef.a1 * P_star + 4))
    closed = ee_from_optimum(P_star, coef, kappa)
    diagnostics = {
        "kkt_residual": abs(r(P_star)) / log_term,
        "closed_form_mismatch": abs(closed - ee_star) / ee_star,
        "ee_closed_form": closed,
        "iterations": iterations,
        "bracket": (lo, hi),
    }
    p_sum = float(total_power(P_star, 2 * K * P_star, K, scenario.N, model))
    return EEReport(ee_star, se_star, p_sum, P_star, 2 * K * P_star, K, scenario.N, diagnostics)


# --- green points ---------------------------------------------------------

@dataclass
class GreenFit:
    slope: float
    intercept: float
    se: np.ndarray
    log_ee: np.ndarray
    residuals: np.ndarray
    expected_slope: float
    expected_intercept: float


def green_point_line(circuits: Sequence, scenario: Scenario, kappa: float = 0.375) -> GreenFit:
    """Fit ln(EE*) against SE* over circuit-power settings (P_0, P_const, P_APS).

    Perfect channel knowledge is required; the points then lie on a line of
    slope -ln2/K.
    """
    if not scenario.perfect_csi:
        raise InvalidParameterError("green-point line requires perfect CSI (P_p = inf)")
    if len(circuits) < 1:
        raise InvalidParameterError("need at least one circuit setting")
    se, log_ee = [], []
    for P_0, P_const, P_APS in circuits:
        res = optimize_Ps(scenario, PowerModel(kappa, P_0, P_const, P_APS))
        se.append(res.se)
        log_ee.append(math.log(res.ee))
    se, log_ee = np.array(se), np.array(log_ee)
    design = np.column_stack([se, np.ones_like(se)])
    (slope, intercept), *_ = np.linalg.lstsq(design, log_ee, rcond=None)
    a0 = coefficients(scenario, PowerModel(kappa)).a0
    return GreenFit(float(slope), float(intercept), se, log_ee, log_ee - (slope * se + intercept),
                    -LN2 / scenario.K, math.log(a0 * kappa / (8 * LN2)))


# --- RF-chain count -------------------------------------------------------

def is_unimodal(values) -> bool:
    """True if the sequence rises then falls (either part may be empty)."""
    diff = np.diff(np.asarray(values, dtype=float))
    signs = np.sign(diff[diff != 0])
    changes = int(np.sum(signs[1:] != signs[:-1]))
    return changes == 0 or (changes == 1 and signs[0] > 0)


def ee_vs_pairs(N: int, P_s: float, model: PowerModel, template: Scenario, K_values) -> np.ndarray:
    """EE at P_r = 2K P_s for each pair count K, estimation quality held fixed."""
    K = np.asarray(K_values, dtype=float)
    sigma2, eps2 = estimation_variances(template.beta0, template.tau, template.P_p)
    sigma2, eps2 = float(sigma2), float(eps2)
    if eps2 > 0:
        a = 1 / (2 * P_s * eps2)
        b = math.pi * N * sigma2 / (8 * eps2)
        d = 2 * P_s / model.kappa + 2 * model.P_0 + 2 * N * model.P_APS
        m = model.P_const / d
        return K * np.log2(1 + b / (K + a)) / (d * (K + m))
    se = K * np.log2(1 + math.pi * N * sigma2 * P_s / 4)
    return se / (2 * K * P_s / model.kappa + 2 * K * model.P_0 + model.P_const + 2 * K * N * model.P_APS)


@dataclass
class RFChainResult:
    K_star: int
    L_star: int
    ee_star: float
    K_values: np.ndarray
    ee_values: np.ndarray
    unimodal: bool


def optimize_rf_chains(N: int, P_s: float, model: PowerModel, template: Scenario,
                       K_values=None) -> RFChainResult:
    """Exhaustive search over the number of user pairs (L = 2K RF chains).

    By default K ranges over 1..floor(L_max(N)/2), the pair counts for which
    the large-N rate expression is valid.
    """
    if K_values is None:
        K_max = max_rf_chains(N) // 2
        if K_max < 1:
            raise InvalidParameterError(f"N={N} admits no RF-chain pair")
        K_values = np.arange(1, K_max + 1)
    K_values = np.asarray(K_values, dtype=int)
    ee = ee_vs_pairs(N, P_s, model, template, K_values)
    unimodal = is_unimodal(ee)
    if not unimodal:
        raise OptimizerFailure("EE over K is not unimodal")
    i = int(np.argmax(ee))
    return RFChainResult(int(K_values[i]), 2 * int(K_values[i]), float(ee[i]), K_values, ee, unimodal)
