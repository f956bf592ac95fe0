"""Run configuration: typed settings, JSON loading, and schema validation.

A configuration file is a JSON document mirroring :class:`SimConfig`; every
field is optional and falls back to a documented default.  Unknown keys are
rejected so typos fail loudly, and validation errors carry the JSON-pointer
path of the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import jsonschema

from .abft import ErrorKind
from .coverage import ErrorRateTable, default_cpu_rate_table, default_gpu_rate_table
from .linalg import DecompositionKind
from .power import ProcessorModel, default_cpu_model, default_gpu_model

MODES = ("original", "r2h", "sr", "bsr")
ENGINES = ("analytic", "numeric")
RECOVERY_POLICIES = ("recompute", "abort", "continue")
DRIFT_KINDS = ("none", "linear", "sinusoidal")

# Behavior toggles per mode, mirroring the library's run-mode contract:
# reclaim_slack enables DVFS slack reclamation, overclock allows clocks
# beyond base, autoboost drops the idle device to its minimum clock, and
# col_ft/row_ft enable checksum protection.
MODE_FLAGS = {
    "original": {"reclaim_slack": False, "overclock": False,
                 "autoboost": False, "col_ft": False, "row_ft": False},
    "r2h":      {"reclaim_slack": False, "overclock": False,
                 "autoboost": True, "col_ft": False, "row_ft": False},
    "sr":       {"reclaim_slack": True, "overclock": False,
                 "autoboost": False, "col_ft": False, "row_ft": False},
    "bsr":      {"reclaim_slack": True, "overclock": True,
                 "autoboost": False, "col_ft": True, "row_ft": True},
}


class ConfigError(ValueError):
    """Invalid configuration; ``pointer`` locates the bad field."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}" if pointer else message)
        self.pointer = pointer


def mode_from_flags(reclaim_slack: bool, overclock: bool,
                    autoboost: bool) -> str:
    for mode, flags in MODE_FLAGS.items():
        if (flags["reclaim_slack"] == reclaim_slack
                and flags["overclock"] == overclock
                and flags["autoboost"] == autoboost):
            return mode
    raise ConfigError("flag combination matches no run mode")


@dataclass(frozen=True)
class DriftProfile:
    """Per-iteration multiplicative throughput drift (synthetic).

    ``linear`` ramps the efficiency factor from 1-amplitude to 1+amplitude
    across the run; ``sinusoidal`` oscillates around 1 with the given
    amplitude, which can flip the sign of the slack mid-run.
    """
    kind: str = "none"
    amplitude: float = 0.0

    def factor(self, k: int, n_iterations: int, device: str) -> float:
        if self.kind == "none" or self.amplitude == 0.0 or n_iterations <= 1:
            return 1.0
        phase = k / (n_iterations - 1)
        sign = 1.0 if device == "gpu" else -1.0
        if self.kind == "linear":
            return 1.0 + sign * self.amplitude * (2.0 * phase - 1.0)
        if self.kind == "sinusoidal":
            import math
            return 1.0 + sign * self.amplitude * math.sin(2.0 * math.pi * phase)
        raise ConfigError(f"unknown drift kind {self.kind!r}", "/drift/kind")


@dataclass(frozen=True)
class LinkModel:
    """CPU-GPU interconnect: elements/second plus a fixed per-transfer cost."""
    elements_per_second: float = 1.25e9
    latency_s: float = 1.0e-5

    def transfer_time(self, elements: float) -> float:
        return elements / self.elements_per_second + self.latency_s


@dataclass(frozen=True)
class SimConfig:
    kind: DecompositionKind = DecompositionKind.LU
    n: int = 1024
    b: int = 128
    mode: str = "original"
    r: float = 0.0
    seed: int = 0
    engine: str = "analytic"
    noise_sigma: float = 0.0
    drift: DriftProfile = field(default_factory=DriftProfile)
    cpu: ProcessorModel = field(default_factory=default_cpu_model)
    gpu: ProcessorModel = field(default_factory=default_gpu_model)
    rates: ErrorRateTable = field(default_factory=default_gpu_rate_table)
    link: LinkModel = field(default_factory=LinkModel)
    recovery: str = "recompute"
    fc_desired: float = 0.999999
    dvfs_latency_s: float = 0.0

    def __post_init__(self):
        if self.b < 1 or self.n < self.b:
            raise ConfigError("need n >= b >= 1", "/n")
        if not 0.0 <= self.r <= 1.0:
            raise ConfigError("r must be in [0, 1]", "/r")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}", "/mode")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}", "/engine")
        if self.recovery not in RECOVERY_POLICIES:
            raise ConfigError(f"recovery must be one of {RECOVERY_POLICIES}",
                              "/recovery")
        if self.noise_sigma < 0.0:
            raise ConfigError("noise_sigma must be >= 0", "/noise_sigma")
        if not 0.0 < self.fc_desired <= 1.0:
            raise ConfigError("fc_desired must be in (0, 1]", "/fc_desired")

    @property
    def flags(self) -> dict:
        return dict(MODE_FLAGS[self.mode])

    def with_overrides(self, **kwargs) -> "SimConfig":
        return replace(self, **kwargs)


_PROCESSOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "f_base_mhz": {"type": "number", "exclusiveMinimum": 0},
        "f_min_mhz": {"type": "number", "exclusiveMinimum": 0},
        "f_max_mhz": {"type": "number", "exclusiveMinimum": 0},
        "p_total_w": {"type": "number", "exclusiveMinimum": 0},
        "dynamic_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        "base_flops_per_second": {"type": "number", "exclusiveMinimum": 0},
        "alpha_default": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
}

_BREAKPOINTS_SCHEMA = {
    "type": "array",
    "items": {
        "type": "array",
        "minItems": 2,
        "maxItems": 2,
        "items": {"type": "number"},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "alg": {"enum": [k.value for k in DecompositionKind]},
        "n": {"type": "integer", "minimum": 1},
        "b": {"type": "integer", "minimum": 1},
        "mode": {"enum": list(MODES)},
        "r": {"type": "number", "minimum": 0, "maximum": 1},
        "reclamation_ratio": {"type": "number", "minimum": 0, "maximum": 1},
        "reclaim_slack": {"type": "boolean"},
        "overclock": {"type": "boolean"},
        "autoboost": {"type": "boolean"},
        "col_ft": {"type": "boolean"},
        "row_ft": {"type": "boolean"},
        "seed": {"type": "integer", "minimum": 0},
        "engine": {"enum": list(ENGINES)},
        "noise_sigma": {"type": "number", "minimum": 0},
        "drift": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(DRIFT_KINDS)},
                "amplitude": {"type": "number", "minimum": 0},
            },
        },
        "cpu": _PROCESSOR_SCHEMA,
        "gpu": _PROCESSOR_SCHEMA,
        "rates": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "d0": _BREAKPOINTS_SCHEMA,
                "d1": _BREAKPOINTS_SCHEMA,
                "d2": _BREAKPOINTS_SCHEMA,
            },
        },
        "link": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "elements_per_second": {"type": "number", "exclusiveMinimum": 0},
                "latency_s": {"type": "number", "minimum": 0},
            },
        },
        "recovery": {"enum": list(RECOVERY_POLICIES)},
        "fc_desired": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "dvfs_latency_s": {"type": "number", "minimum": 0},
    },
}

_RATE_KEYS = {"d0": ErrorKind.D0, "d1": ErrorKind.D1, "d2": ErrorKind.D2}


def validate_document(doc: dict) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise ConfigError(e.message, pointer)


def _processor_from(doc: dict, base: ProcessorModel) -> ProcessorModel:
    return replace(base, **doc)


def config_from_document(doc: dict) -> SimConfig:
    """Build a SimConfig from a validated JSON document."""
    validate_document(doc)
    doc = dict(doc)

    mode = doc.get("mode")
    flag_keys = ("reclaim_slack", "overclock", "autoboost")
    if mode is None and any(k in doc for k in flag_keys):
        defaults = MODE_FLAGS["original"]
        mode = mode_from_flags(*(doc.get(k, defaults[k]) for k in flag_keys))
    mode = mode or "original"
    if mode in MODE_FLAGS:
        expected = MODE_FLAGS[mode]
        for k in flag_keys + ("col_ft", "row_ft"):
            if k in doc and doc[k] != expected[k]:
                raise ConfigError(
                    f"{k}={doc[k]} contradicts mode {mode!r}", f"/{k}")

    r = doc.get("r", doc.get("reclamation_ratio", 0.0))
    if mode == "sr" and r != 0.0:
        raise ConfigError("sr mode reclaims by slowing only (r must be 0)", "/r")

    kwargs = {
        "kind": DecompositionKind(doc.get("alg", "lu")),
        "mode": mode,
        "r": r,
    }
    for key in ("n", "b", "seed", "engine", "noise_sigma", "recovery",
                "fc_desired", "dvfs_latency_s"):
        if key in doc:
            kwargs[key] = doc[key]
    if "drift" in doc:
        kwargs["drift"] = DriftProfile(**doc["drift"])
    if "cpu" in doc:
        kwargs["cpu"] = _processor_from(doc["cpu"], default_cpu_model())
    if "gpu" in doc:
        kwargs["gpu"] = _processor_from(doc["gpu"], default_gpu_model())
    if "rates" in doc:
        table = {kind: [] for kind in ErrorKind}
        for key, kind in _RATE_KEYS.items():
            table[kind] = [tuple(p) for p in doc["rates"].get(key, [])]
        kwargs["rates"] = ErrorRateTable(table)
    if "link" in doc:
        kwargs["link"] = LinkModel(**doc["link"])
    try:
        return SimConfig(**kwargs)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_document(doc)
