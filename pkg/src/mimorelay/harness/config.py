"""Experiment configuration: flat TOML key/value files.

Power keys take linear values, or dB values under the same name with a
``_dB`` suffix (``P_s_dB = 10`` means ``P_s = 10.0``). Numeric keys that
describe a sweep accept either a scalar or an array.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import tomli

from ..channel import MmWave, Rayleigh, Scenario
from ..energy import PowerModel
from ..errors import ConfigError, InvalidParameterError

INT, FLOAT, STR, BOOL = "int", "float", "str", "bool"

# key -> (scalar type, array allowed)
SCHEMA: Dict[str, tuple] = {
    "experiment": (STR, False),
    "N": (INT, True),
    "K": (INT, False),
    "L": (INT, False),
    "tau": (INT, False),
    "betas": (FLOAT, True),
    "B": ("bits", True),
    "model": (STR, False),
    "n_paths": (INT, False),
    "spacing": (FLOAT, False),
    "P_s": (FLOAT, True),
    "P_r": (FLOAT, True),
    "P_p": (FLOAT, False),
    "P_T": (FLOAT, True),
    "E_s": (FLOAT, False),
    "E_r": (FLOAT, False),
    "alpha": (FLOAT, True),
    "kappa": (FLOAT, False),
    "P_0": (FLOAT, False),
    "P_const": (FLOAT, False),
    "P_APS": (FLOAT, False),
    "circuits": ("circuits", False),
    "T": (INT, True),
    "K_max": (INT, False),
    "trials": (INT, False),
    "seed": (INT, False),
    "workers": (INT, False),
    "out": (STR, False),
    "format": (STR, False),
    "full": (BOOL, False),
}

DB_KEYS = ("P_s", "P_r", "P_p", "P_T", "E_s", "E_r")
RUN_KEYS = ("experiment", "trials", "seed", "workers", "out", "format", "full")
FORMATS = ("csv", "json")


def valid_keys() -> list:
    return sorted(list(SCHEMA) + [k + "_dB" for k in DB_KEYS])


def from_db(x):
    if isinstance(x, list):
        return [from_db(v) for v in x]
    return 10.0 ** (x / 10.0)


@dataclass
class ExperimentConfig:
    experiment: str
    params: Dict[str, Any] = field(default_factory=dict)  # linear units
    trials: int = 10_000
    seed: int = 0
    out: Optional[str] = None
    format: str = "csv"
    workers: int = 1
    full: bool = False

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        for key, value in self.params.items():
            if isinstance(value, list) and not value:
                raise ConfigError(f"sweep {key!r} is empty")

    def merged(self, defaults: Dict[str, Any]) -> Dict[str, Any]:
        """Experiment defaults overlaid with the configured parameters."""
        out = dict(defaults)
        out.update(self.params)
        return out

    def power_model(self, defaults: Optional[Dict[str, Any]] = None) -> PowerModel:
        p = self.merged(defaults or {})
        kw = {k: p[k] for k in ("kappa", "P_0", "P_const", "P_APS") if k in p}
        return PowerModel(**kw)


def as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def scalar(p: Dict[str, Any], key: str):
    value = p.get(key)
    if isinstance(value, list):
        raise ConfigError(f"{key!r} must be a scalar for this experiment, got an array")
    return value


def build_scenario(p: Dict[str, Any], **overrides) -> Scenario:
    """Scenario from a merged parameter dict; sweep keys must be overridden."""
    q = dict(p)
    q.update(overrides)
    name = q.get("model", "rayleigh")
    if name == "rayleigh":
        model = Rayleigh()
    elif name == "mmwave":
        model = MmWave(n_paths=q.get("n_paths", 10), spacing=q.get("spacing", 0.5))
    else:
        raise ConfigError(f"model must be 'rayleigh' or 'mmwave', got {name!r}")
    B = q.get("B")
    return Scenario(
        N=scalar(q, "N"), K=q["K"], P_s=scalar(q, "P_s") if "P_s" in q else 10.0,
        P_r=scalar(q, "P_r"), P_p=q.get("P_p", 10.0), tau=q.get("tau"),
        betas=q.get("betas"), B=None if B == "ideal" else B, model=model, L=q.get("L"),
    )


def _line_of(text: str, key: str) -> str:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for n, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return f"line {n}: {line.strip()!r}"
    return f"key {key!r}"


def _check_scalar(kind: str, v) -> bool:
    if kind == INT:
        return isinstance(v, int) and not isinstance(v, bool)
    if kind == FLOAT:
        return isinstance(v, (int, float)) and not isinstance(v, bool)
    if kind == STR:
        return isinstance(v, str)
    if kind == BOOL:
        return isinstance(v, bool)
    if kind == "bits":
        return (isinstance(v, int) and not isinstance(v, bool)) or v == "ideal"
    raise AssertionError(kind)


def _coerce(key: str, value, text: str):
    base = key[:-3] if key.endswith("_dB") and key[:-3] in DB_KEYS else key
    kind, array_ok = SCHEMA[base]
    if kind == "circuits":
        ok = (isinstance(value, list) and value and all(
            isinstance(row, list) and len(row) == 3 and all(_check_scalar(FLOAT, x) for x in row) for row in value))
        if not ok:
            raise ConfigError(f"{_line_of(text, key)}: {key} expects an array of [P_0, P_const, P_APS] triples")
        return base, [[float(x) for x in row] for row in value]
    expected = kind + (" or array of " + kind if array_ok else "")
    if isinstance(value, list):
        if not array_ok:
            raise ConfigError(f"{_line_of(text, key)}: {key} expects {expected}, got array")
        if not value:
            raise ConfigError(f"{_line_of(text, key)}: sweep {key} is empty")
        bad = [v for v in value if not _check_scalar(kind, v)]
        if bad:
            raise ConfigError(f"{_line_of(text, key)}: {key} expects {expected}, got element {bad[0]!r}")
    elif not _check_scalar(kind, value):
        raise ConfigError(f"{_line_of(text, key)}: {key} expects {expected}, got {type(value).__name__}")
    if kind == FLOAT:
        value = [float(v) for v in value] if isinstance(value, list) else float(value)
    if base != key:
        value = from_db(value)
    return base, value


def parse_config(text: str, known=None) -> ExperimentConfig:
    """Parse and validate a config; ``known`` restricts experiment names."""
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    allowed = set(valid_keys())
    for key, value in raw.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}; valid keys: {', '.join(valid_keys())}")
        if isinstance(value, dict):
            raise ConfigError(f"{_line_of(text, key)}: tables are not supported, keys must be flat")
    if "experiment" not in raw:
        raise ConfigError("missing required key 'experiment'")

    values: Dict[str, Any] = {}
    for key, value in raw.items():
        base, v = _coerce(key, value, text)
        if base in values:
            raise ConfigError(f"{base!r} given both in linear and dB form")
        values[base] = v

    if known is None:
        from .experiments import REGISTRY
        known = REGISTRY
    if values["experiment"] not in known:
        raise ConfigError(f"unknown experiment {values['experiment']!r}; known: {', '.join(sorted(known))}")

    K, L = values.get("K"), values.get("L")
    if L is not None:
        if K is None:
            raise ConfigError("L given without K; set K (L must equal 2K)")
        if L != 2 * K:
            raise ConfigError(f"L must equal 2K: got K={K}, L={L}")
    for key in ("P_s", "P_r", "P_p", "P_T"):
        for v in as_list(values.get(key, [])):
            if not v > 0:
                raise ConfigError(f"{key} must be > 0, got {v}")
    if values.get("model", "rayleigh") not in ("rayleigh", "mmwave"):
        raise ConfigError(f"model must be 'rayleigh' or 'mmwave', got {values['model']!r}")

    run = {k: values.pop(k) for k in RUN_KEYS if k in values}
    cfg = ExperimentConfig(params=values, **run)
    try:
        cfg.power_model()
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg
