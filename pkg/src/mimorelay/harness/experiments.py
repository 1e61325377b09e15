"""Figure-replication experiments.

Each experiment maps an ``ExperimentConfig`` to a list of ``ResultRow``.
Defaults are small "desk-scale" grids; ``cfg.full`` switches to the wide
grids. Monte Carlo sweeps reuse each channel draw across all power points.
"""
from __future__ import annotations

import math
import warnings
from typing import Callable, Dict, List

import numpy as np

from .. import energy, rate
from ..energy import PowerModel
from ..rate import ScalingSpec
from .config import ExperimentConfig, as_list, build_scenario, scalar
from .io import ResultRow

Experiment = Callable[[ExperimentConfig], List[ResultRow]]
REGISTRY: Dict[str, Experiment] = {}
DESCRIPTIONS: Dict[str, str] = {}

EE_DEFAULTS = dict(N=256, K=5, P_p=10.0, kappa=0.375, P_0=1.0, P_const=20.0, P_APS=0.02)


def register(name: str, description: str):
    def wrap(fn):
        REGISTRY[name] = fn
        DESCRIPTIONS[name] = description
        return fn
    return wrap


def to_db(x) -> float:
    return 10.0 * math.log10(x)


def db_grid(lo, hi, step) -> np.ndarray:
    return 10.0 ** (np.arange(lo, hi + step / 2, step) / 10.0)


def _grid(p, key, reduced, full, cfg):
    """Configured sweep if given, else the reduced or full default."""
    if key in p:
        return as_list(p[key])
    return list(full if cfg.full else reduced)


def _relay_powers(p, P_s, K):
    if "P_r" in p:
        P_r = as_list(p["P_r"])
        if len(P_r) == 1:
            return [P_r[0]] * len(P_s)
        if len(P_r) != len(P_s):
            raise ValueError("P_r sweep must match the P_s sweep in length")
        return P_r
    return [2 * K * x for x in P_s]


def _rate_rows(name, inputs, reports, metric="sum_rate"):
    return [ResultRow(name, inp, metric, rep.sum, rep.sum_stderr, rep.method)
            for inp, rep in zip(inputs, reports)]


# --- spectral efficiency --------------------------------------------------

@register("rate-vs-snr", "sum rate vs SNR: Monte Carlo, large-N closed form, full-RF-chain benchmark")
def rate_vs_snr(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "rate-vs-snr"
    p = cfg.merged(dict(K=5, P_p=10.0))
    K = p["K"]
    P_s = _grid(p, "P_s", db_grid(-10, 20, 5), db_grid(-10, 20, 2.5), cfg)
    P_r = _relay_powers(p, P_s, K)
    rows = []
    for N in _grid(p, "N", [64, 256], [64, 128, 256, 512], cfg):
        base = build_scenario(p, N=N, P_s=P_s[0], P_r=P_r[0])
        mc = rate.mc_power_sweep(base, P_s, P_r, cfg.trials, cfg.seed, f"{name}/N={N}", cfg.workers)
        points = [base.replace(P_s=s, P_r=r) for s, r in zip(P_s, P_r)]
        inputs = [{"N": N, "P_s_dB": to_db(s), "P_r_dB": to_db(r)} for s, r in zip(P_s, P_r)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            cf = [rate.closed_form_theorem1(sc) for sc in points]
        rows += _rate_rows(name, inputs, mc)
        rows += _rate_rows(name, inputs, cf)
        if N > 2 * K:
            rows += _rate_rows(name, inputs, [rate.full_digital_rate(sc) for sc in points])
    return rows


@register("power-scaling", "sum rate vs N when transmit powers shrink as N^-alpha (both pilot cases)")
def power_scaling(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "power-scaling"
    p = cfg.merged(dict(K=5, P_p=10.0, E_s=1.0, E_r=1.0))
    Ns = _grid(p, "N", [2**k for k in (6, 8, 10, 12)], [2**k for k in range(6, 15)], cfg)
    alphas = as_list(p["alpha"]) if "alpha" in p else None
    rows = []
    for case, critical in (("fixed-pilot", 1.0), ("scaled-pilot", 0.5)):
        for alpha in alphas or [critical]:
            spec = ScalingSpec(alpha, p["E_s"], p["E_r"], case)
            limit = rate.scaling_limit(build_scenario(p, N=Ns[0]), spec)
            for N in Ns:
                rep = rate.scaled_sum_rate(build_scenario(p, N=N), spec)
                inp = {"N": N, "case": case, "alpha": alpha}
                rows.append(ResultRow(name, inp, "sum_rate", rep.sum, None, rep.method))
                if math.isfinite(limit):
                    rows.append(ResultRow(name, inp, "limit", limit, None, "limit"))
    return rows


@register("quantization", "sum rate vs SNR for B-bit phase shifters against ideal ones")
def quantization(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "quantization"
    p = cfg.merged(dict(N=256, K=5, P_p=10.0))
    P_s = _grid(p, "P_s", db_grid(-10, 20, 10), db_grid(-10, 20, 5), cfg)
    P_r = _relay_powers(p, P_s, p["K"])
    bits = _grid(p, "B", [1, 2, 4, "ideal"], [1, 2, 3, 4, 6, "ideal"], cfg)
    sc = build_scenario(p, P_s=P_s[0], P_r=P_r[0], B=None)
    # every codebook sees the same channel draws
    sweeps = rate.mc_bits_sweep(sc, [None if B == "ideal" else B for B in bits], P_s, P_r,
                                cfg.trials, cfg.seed, name, cfg.workers)
    rows = []
    for B, reps in zip(bits, sweeps.values()):
        inputs = [{"B": str(B), "P_s_dB": to_db(s)} for s in P_s]
        rows += _rate_rows(name, inputs, reps)
    return rows


def _overhead_setup(p):
    K = p["K"]
    sc = build_scenario(p, P_s=1.0, P_r=2.0 * K)
    return sc, K


@register("overhead-throughput", "throughput vs SNR after training overhead, hybrid vs full RF chains")
def overhead_throughput(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "overhead-throughput"
    p = cfg.merged(dict(N=64, K=4, tau=8, T=600, P_p=10.0))
    sc, K = _overhead_setup(p)
    T = scalar(p, "T")
    P_s = _grid(p, "P_s", db_grid(-10, 20, 5), db_grid(-10, 20, 2.5), cfg)
    P_r = _relay_powers(p, P_s, K)
    rows = []
    for processing, mode in (("hybrid", "limited"), ("full-digital", "full")):
        reps = rate.mc_power_sweep(sc, P_s, P_r, cfg.trials, cfg.seed, name, cfg.workers, processing)
        factor = rate.overhead_factor(T, sc.N, K, mode)
        for s, rep in zip(P_s, reps):
            inp = {"processing": processing, "T": T, "P_s_dB": to_db(s)}
            rows.append(ResultRow(name, inp, "sum_rate", rep.sum, rep.sum_stderr, rep.method))
            rows.append(ResultRow(name, inp, "throughput", rep.sum * factor, rep.sum_stderr * factor,
                                  rep.method))
    return rows


@register("coherence-time", "throughput vs coherence time T, hybrid vs full RF chains")
def coherence_time(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "coherence-time"
    p = cfg.merged(dict(N=64, K=4, tau=8, P_p=10 ** 0.5, P_s=10 ** 0.5))
    K = p["K"]
    sc = build_scenario(p, P_r=2 * K * scalar(p, "P_s") if "P_r" not in p else scalar(p, "P_r"))
    Ts = _grid(p, "T", [100, 200, 400, 600, 1000, 2000],
               [64, 80, 100, 150, 200, 300, 400, 600, 800, 1000, 1500, 2000, 3000, 5000], cfg)
    rows = []
    for processing, mode in (("hybrid", "limited"), ("full-digital", "full")):
        rep = rate.mc_sum_rate(sc, cfg.trials, cfg.seed, name, cfg.workers, processing)
        for T in Ts:
            f = rate.overhead_factor(T, sc.N, K, mode)
            rows.append(ResultRow(name, {"processing": processing, "T": T}, "throughput",
                                  rep.sum * f, rep.sum_stderr * f, rep.method))
    return rows


@register("mmwave-rate", "sum rate vs SNR on a geometric mmWave channel, hybrid vs full RF chains")
def mmwave_rate(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "mmwave-rate"
    p = cfg.merged(dict(K=5, P_p=10.0, model="mmwave", n_paths=10, spacing=0.5))
    P_s = _grid(p, "P_s", db_grid(-10, 20, 5), db_grid(-10, 20, 2.5), cfg)
    P_r = _relay_powers(p, P_s, p["K"])
    rows = []
    for N in _grid(p, "N", [64], [64, 128, 256], cfg):
        sc = build_scenario(p, N=N, P_s=P_s[0], P_r=P_r[0])
        for processing in ("hybrid", "full-digital"):
            reps = rate.mc_power_sweep(sc, P_s, P_r, cfg.trials, cfg.seed, f"{name}/N={N}", cfg.workers,
                                       processing)
            inputs = [{"N": N, "processing": processing, "P_s_dB": to_db(s)} for s in P_s]
            rows += _rate_rows(name, inputs, reps)
    return rows


# --- energy efficiency ----------------------------------------------------

def _ee_setup(cfg, extra=None):
    d = dict(EE_DEFAULTS)
    d.update(extra or {})
    p = cfg.merged(d)
    return p, build_scenario(p, P_s=1.0, P_r=None), cfg.power_model(d)


def surface_argmax(P_s: np.ndarray, P_r: np.ndarray, scenario, model: PowerModel):
    """Grid argmax of EE over the (P_s, P_r) plane; returns (P_s, P_r, ee)."""
    ee = energy.ee_value(P_s[:, None], P_r[None, :], scenario, model)
    i, j = np.unravel_index(int(np.argmax(ee)), ee.shape)
    return P_s[i], P_r[j], ee


@register("ee-surface", "EE over a (P_s, P_r) grid in dB and its argmax")
def ee_surface(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "ee-surface"
    p, sc, model = _ee_setup(cfg)
    step = 1.0 if cfg.full else 2.0
    P_s = np.asarray(_grid(p, "P_s", db_grid(-20, 20, step), db_grid(-20, 20, 1.0), cfg))
    P_r = np.asarray(_grid(p, "P_r", db_grid(-20, 20, step), db_grid(-20, 20, 1.0), cfg))
    s_star, r_star, ee = surface_argmax(P_s, P_r, sc, model)
    rows = [ResultRow(name, {"P_s_dB": to_db(s), "P_r_dB": to_db(r)}, "ee", ee[i, j], None, "closed-form")
            for i, s in enumerate(P_s) for j, r in enumerate(P_r)]
    rows.append(ResultRow(name, {}, "argmax_P_s_dB", to_db(s_star), None, "grid"))
    rows.append(ResultRow(name, {}, "argmax_P_r_dB", to_db(r_star), None, "grid"))
    opt = energy.optimize_Ps(sc, model)
    rows.append(ResultRow(name, {}, "optimum_P_s_dB", to_db(opt.P_s), None, "golden-section"))
    rows.append(ResultRow(name, {}, "optimum_P_r_dB", to_db(opt.P_r), None, "golden-section"))
    rows.append(ResultRow(name, {}, "optimum_ee", opt.ee, None, "golden-section"))
    return rows


@register("ee-constraint", "EE along the budget line 2K P_s + P_r = P_T vs the relay share P_r / P_T")
def ee_constraint(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "ee-constraint"
    p, sc, model = _ee_setup(cfg)
    rows = []
    for P_T in _grid(p, "P_T", [10.0, 20.0, 40.0], [5.0, 10.0, 20.0, 40.0, 80.0], cfg):
        ratio, ee = energy.split_sweep(P_T, sc, model)
        rows += [ResultRow(name, {"P_T": P_T, "ratio": x}, "ee", v, None, "closed-form")
                 for x, v in zip(ratio, ee)]
        P_s, P_r = energy.optimal_power_split(P_T, sc, model)
        rows.append(ResultRow(name, {"P_T": P_T}, "best_ratio_grid", ratio[int(np.argmax(ee))], None, "grid"))
        rows.append(ResultRow(name, {"P_T": P_T}, "best_ratio", P_r / P_T, None, "closed-form"))
        rows.append(ResultRow(name, {"P_T": P_T}, "best_ee", energy.ee_value(P_s, P_r, sc, model), None,
                              "closed-form"))
    return rows


@register("ee-contour", "tangency of EE contours and total-power lines, relative to P_r = 2K P_s")
def ee_contour(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "ee-contour"
    p, sc, model = _ee_setup(cfg)
    K = sc.K
    points = 2001 if cfg.full else 401
    rows = []
    for P_T in _grid(p, "P_T", [1.0, 5.0, 20.0, 80.0], [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0, 160.0], cfg):
        # fine budget-line sweep in the relay share; the EE contour touches the line at its maximum
        share = np.arange(1, points) / points
        P_r = share * P_T
        P_s = (P_T - P_r) / (2 * K)
        ee = energy.ee_value(P_s, P_r, sc, model)
        i = int(np.argmax(ee))
        inp = {"P_T": P_T}
        rows.append(ResultRow(name, inp, "tangent_P_s_dB", to_db(P_s[i]), None, "grid"))
        rows.append(ResultRow(name, inp, "tangent_P_r_dB", to_db(P_r[i]), None, "grid"))
        rows.append(ResultRow(name, inp, "offset_from_line_dB", to_db(P_r[i] / (2 * K * P_s[i])), None, "grid"))
        rows.append(ResultRow(name, inp, "ee", ee[i], None, "grid"))
    grid = db_grid(-20, 20, 1.0)
    s_star, r_star, _ = surface_argmax(grid, grid, sc, model)
    rows.append(ResultRow(name, {}, "global_offset_from_line_dB", to_db(r_star / (2 * K * s_star)), None, "grid"))
    return rows


DEFAULT_CIRCUITS = [
    [1.0, 20.0, 0.02], [0.5, 10.0, 0.01], [2.0, 40.0, 0.05],
    [1.0, 5.0, 0.001], [3.0, 80.0, 0.1], [0.1, 2.0, 0.005],
]


@register("green-points", "EE-optimal (SE, EE) pairs under perfect CSI for several circuit-power settings")
def green_points(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "green-points"
    p = cfg.merged(dict(N=128, K=5, P_p=math.inf, kappa=0.375, circuits=DEFAULT_CIRCUITS))
    sc = build_scenario(p)
    fit = energy.green_point_line(p["circuits"], sc, p["kappa"])
    rows = []
    for (P_0, P_const, P_APS), se, log_ee in zip(p["circuits"], fit.se, fit.log_ee):
        inp = {"P_0": P_0, "P_const": P_const, "P_APS": P_APS}
        rows.append(ResultRow(name, inp, "se_star", se, None, "golden-section"))
        rows.append(ResultRow(name, inp, "log_ee_star", log_ee, None, "golden-section"))
    for metric, value in (("slope", fit.slope), ("intercept", fit.intercept)):
        rows.append(ResultRow(name, {}, metric, value, None, "least-squares"))
    rows.append(ResultRow(name, {}, "expected_slope", fit.expected_slope, None, "closed-form"))
    rows.append(ResultRow(name, {}, "expected_intercept", fit.expected_intercept, None, "closed-form"))
    return rows


@register("ee-vs-L", "EE vs the number of RF chains L = 2K for several array sizes")
def ee_vs_L(cfg: ExperimentConfig) -> List[ResultRow]:
    name = "ee-vs-L"
    p = cfg.merged(dict(K=1, P_s=10 ** 0.5, P_p=10 ** 0.5, tau=10, kappa=0.375, P_0=1.0, P_const=20.0,
                        P_APS=0.02, K_max=15))
    model = cfg.power_model(p)
    P_s = scalar(p, "P_s")
    K_max = p["K_max"] if "K_max" in cfg.params else (25 if cfg.full else 15)
    K_values = np.arange(1, K_max + 1)
    rows = []
    for N in _grid(p, "N", [128, 256, 512], [128, 256, 512, 1024], cfg):
        template = build_scenario(p, N=N, K=1, L=None)
        res = energy.optimize_rf_chains(N, P_s, model, template, K_values)
        rows += [ResultRow(name, {"N": N, "L": 2 * int(k)}, "ee", v, None, "closed-form")
                 for k, v in zip(res.K_values, res.ee_values)]
        check = rate.condition_check(N, res.L_star)
        rows.append(ResultRow(name, {"N": N}, "L_star", res.L_star, None, "exhaustive"))
        rows.append(ResultRow(name, {"N": N}, "L_star_condition_ok", float(check.ok), None, "exhaustive"))
        bounded = energy.optimize_rf_chains(N, P_s, model, template)
        rows.append(ResultRow(name, {"N": N}, "L_star_within_condition", bounded.L_star, None, "exhaustive"))
        rows.append(ResultRow(name, {"N": N}, "L_max", rate.max_rf_chains(N), None, "closed-form"))
    return rows


def run_experiment(cfg: ExperimentConfig) -> List[ResultRow]:
    try:
        fn = REGISTRY[cfg.experiment]
    except KeyError:
        raise KeyError(f"unknown experiment {cfg.experiment!r}; known: {', '.join(sorted(REGISTRY))}") from None
    return fn(cfg)
