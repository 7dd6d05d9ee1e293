"""Experiment configuration: strict JSON parsing, validation and round trip.

A configuration is a JSON object::

    {
      "experiment": "simulate",
      "model": {"sigma": 3.0, "n2_coefficient": 0.5},
      "grid": {"L": 62.83, "n": 256},
      "evolve": {"dt": 1e-3, "t_end": 1.0, "scheme": "ifrk4"},
      "initial_condition": {"type": "gaussian", "amplitude": 1.0, "width": 1.0},
      "parameters": {},
      "seed": 0,
      "output_dir": "out"
    }

Only ``experiment`` is required; everything else has a default (the
initial condition defaults to a unit Gaussian, or to the ``k = 1``
stationary wave for ``wave_check``). Unknown
keys anywhere are errors, and every error names the offending key path
(``model.sigma``, ``parameters.amplitudes[2]``, ...). ``parameters`` holds
the experiment-specific settings listed in :data:`EXPERIMENT_PARAMETERS`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from .evolve import SCHEMES, EvolveConfig
from .model import ModelParams

EXPERIMENTS = ("simulate", "picard", "imethod", "probe_bilinear", "region",
               "wave_check", "existence_scaling")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the key path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# -- typed value readers ------------------------------------------------------

def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _real(x, path):
    if not _is_number(x) or not math.isfinite(x):
        raise ConfigError(path, f"expected a finite number, got {x!r}")
    return float(x)


def _int(x, path):
    if isinstance(x, bool) or not (isinstance(x, int) or (isinstance(x, float) and x.is_integer())):
        raise ConfigError(path, f"expected an integer, got {x!r}")
    return int(x)


def _str(x, path):
    if not isinstance(x, str):
        raise ConfigError(path, f"expected a string, got {x!r}")
    return x


def _bool(x, path):
    if not isinstance(x, bool):
        raise ConfigError(path, f"expected true or false, got {x!r}")
    return x


def _real_list(x, path):
    if not isinstance(x, list):
        raise ConfigError(path, f"expected a list of numbers, got {x!r}")
    return [_real(v, f"{path}[{i}]") for i, v in enumerate(x)]


def _int_list(x, path):
    if not isinstance(x, list):
        raise ConfigError(path, f"expected a list of integers, got {x!r}")
    return [_int(v, f"{path}[{i}]") for i, v in enumerate(x)]


def _real_pair(x, path):
    vals = _real_list(x, path)
    if len(vals) != 2:
        raise ConfigError(path, "expected exactly two numbers")
    if not vals[0] < vals[1]:
        raise ConfigError(path, "range must be increasing")
    return vals


READERS = {"real": _real, "int": _int, "str": _str, "bool": _bool, "real_list": _real_list,
           "int_list": _int_list, "real_pair": _real_pair}


def _section(doc, path) -> Dict[str, Any]:
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(path, f"expected an object, got {type(doc).__name__}")
    return doc


def _read_fields(doc: Dict[str, Any], schema: Dict[str, Tuple[str, Any]], path: str,
                 required: Tuple[str, ...] = ()) -> Dict[str, Any]:
    unknown = sorted(set(doc) - set(schema))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
    out = {}
    for key, (kind, default) in schema.items():
        p = f"{path}.{key}" if path else key
        if key not in doc:
            if key in required:
                raise ConfigError(p, "missing required key")
            out[key] = list(default) if isinstance(default, (list, tuple)) else default
            continue
        val = doc[key]
        if val is None and default is None:
            out[key] = None
            continue
        out[key] = READERS[kind](val, p)
    return out


def _check(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigError(path, message)


# -- sections ---------------------------------------------------------------------

MODEL_SCHEMA = {"p": ("int", 1), "q": ("int", 1), "sigma": ("real", 1.0), "theta": ("real", 0.0),
                "alpha": ("real", 0.0), "n2_coefficient": ("real", None),
                "n1_coefficient": ("real", 1.0)}
GRID_SCHEMA = {"L": ("real", 2 * math.pi), "n": ("int", 128)}
EVOLVE_SCHEMA = {"dt": ("real", 1e-3), "t_end": ("real", 1.0), "scheme": ("str", "ifrk4"),
                 "record_every": ("int", 1), "blowup_threshold": ("real", 1e6),
                 "sobolev_index": ("real", 1.0)}
IC_SCHEMAS = {
    "gaussian": {"amplitude": ("real", 1.0), "width": ("real", 1.0), "center": ("real", 0.0),
                 "phase_velocity": ("real", 0.0), "v_amplitude": ("real", None)},
    "plane_wave": {"amplitude": ("real", 1.0), "wavenumber": ("real", 1.0),
                   "v_amplitude": ("real", None)},
    "exact_stationary": {"k": ("real", 1.0)},
    "from_checkpoint": {"path": ("str", None)},
}
IC_REQUIRED = {"from_checkpoint": ("path",)}

EXPERIMENT_PARAMETERS: Dict[str, Dict[str, Tuple[str, Any]]] = {
    "simulate": {},
    "picard": {"T": ("real", None), "tolerance": ("real", 1e-12), "max_iter": ("int", 50),
               "mesh_intervals": ("int", 64), "seed_iterate": ("str", "linear"),
               "compare_with_stepper": ("bool", True)},
    "imethod": {"s": ("real", -0.5), "N_values": ("real_list", [16.0, 32.0, 64.0, 128.0]),
                "delta_prefactor": ("real", 1.0)},
    "probe_bilinear": {"kappa": ("real", 0.0), "s": ("real", 0.0), "b": ("real", 0.6),
                       "d": ("real", 0.4), "ensemble_size": ("int", 16),
                       "resolutions": ("int_list", [16, 32, 64])},
    "region": {"kappa_range": ("real_pair", [-2.0, 2.0]), "s_range": ("real_pair", [-2.0, 2.0]),
               "resolution": ("int", 41)},
    "wave_check": {},
    "existence_scaling": {"amplitudes": ("real_list", [1.25, 2.5, 5.0, 12.5]),
                          "threshold": ("real", 0.5), "T_start": ("real", 0.05),
                          "T_cap": ("real", 1.0), "rel_tol": ("real", 1e-3),
                          "mesh_intervals": ("int", 64)},
}


@dataclass(frozen=True)
class GridConfig:
    L: float = 2 * math.pi
    n: int = 128


@dataclass(frozen=True)
class InitialCondition:
    type: str = "gaussian"
    values: Tuple[Tuple[str, Any], ...] = ()

    def get(self, key, default=None):
        return dict(self.values).get(key, default)

    def as_dict(self) -> Dict[str, Any]:
        d = {"type": self.type}
        d.update(self.values)
        return d


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: ModelParams = field(default_factory=ModelParams)
    grid: GridConfig = field(default_factory=GridConfig)
    evolve: EvolveConfig = field(default_factory=EvolveConfig)
    initial_condition: InitialCondition = field(default_factory=InitialCondition)
    parameters: Tuple[Tuple[str, Any], ...] = ()
    seed: int = 0
    output_dir: str = "out"

    def param(self, key):
        return dict(self.parameters)[key]

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[str] = None):
        d = dict(self.__dict__)
        if seed is not None:
            d["seed"] = int(seed)
        if output_dir is not None:
            d["output_dir"] = str(output_dir)
        return ExperimentConfig(**d)


def _freeze(v):
    return tuple(v) if isinstance(v, list) else v


def _model(doc) -> ModelParams:
    f = _read_fields(_section(doc, "model"), MODEL_SCHEMA, "model")
    _check(f["p"] in (1, -1), "model.p", "must be +1 or -1")
    _check(f["q"] in (1, -1), "model.q", "must be +1 or -1")
    _check(f["sigma"] > 0, "model.sigma", f"must be positive, got {f['sigma']}")
    return ModelParams(**f)


def _grid(doc) -> GridConfig:
    f = _read_fields(_section(doc, "grid"), GRID_SCHEMA, "grid")
    _check(f["L"] > 0, "grid.L", "must be positive")
    _check(f["n"] >= 4 and f["n"] % 2 == 0, "grid.n", "must be an even integer >= 4")
    return GridConfig(**f)


def _evolve(doc) -> EvolveConfig:
    f = _read_fields(_section(doc, "evolve"), EVOLVE_SCHEMA, "evolve")
    _check(f["dt"] > 0, "evolve.dt", "must be positive")
    _check(f["t_end"] > 0, "evolve.t_end", "must be positive")
    _check(f["dt"] < f["t_end"], "evolve.dt", "must be smaller than evolve.t_end")
    _check(f["scheme"] in SCHEMES, "evolve.scheme", f"must be one of {list(SCHEMES)}")
    _check(f["record_every"] >= 1, "evolve.record_every", "must be >= 1")
    _check(f["blowup_threshold"] > 0, "evolve.blowup_threshold", "must be positive")
    return EvolveConfig(**f)


def _initial_condition(doc, experiment: str) -> InitialCondition:
    doc = _section(doc, "initial_condition")
    if not doc:
        doc = {"type": "exact_stationary" if experiment == "wave_check" else "gaussian"}
    if "type" not in doc:
        raise ConfigError("initial_condition.type", "missing required key")
    kind = _str(doc["type"], "initial_condition.type")
    if kind not in IC_SCHEMAS:
        raise ConfigError("initial_condition.type", f"must be one of {sorted(IC_SCHEMAS)}")
    rest = {k: v for k, v in doc.items() if k != "type"}
    f = _read_fields(rest, IC_SCHEMAS[kind], "initial_condition", IC_REQUIRED.get(kind, ()))
    if kind == "gaussian":
        _check(f["width"] > 0, "initial_condition.width", "must be positive")
    return InitialCondition(kind, tuple(sorted(f.items())))


def _parameters(doc, experiment: str):
    f = _read_fields(_section(doc, "parameters"), EXPERIMENT_PARAMETERS[experiment], "parameters")
    p = "parameters."
    if experiment == "picard":
        _check(f["T"] is None or f["T"] > 0, p + "T", "must be positive (or null)")
        _check(f["tolerance"] > 0, p + "tolerance", "must be positive")
        _check(f["max_iter"] >= 1, p + "max_iter", "must be >= 1")
        _check(f["mesh_intervals"] >= 8 and f["mesh_intervals"] % 2 == 0, p + "mesh_intervals",
               "must be an even integer >= 8")
        _check(f["seed_iterate"] in ("linear", "zero"), p + "seed_iterate", "must be 'linear' or 'zero'")
    elif experiment == "imethod":
        _check(f["s"] <= 0, p + "s", "must be <= 0")
        _check(len(f["N_values"]) >= 4, p + "N_values", "need at least 4 values")
        _check(all(n > 1 for n in f["N_values"]), p + "N_values", "every N must exceed 1")
        _check(max(f["N_values"]) >= 4 * min(f["N_values"]) * (1 - 1e-12), p + "N_values",
               "must span at least two dyadic levels")
        _check(f["delta_prefactor"] > 0, p + "delta_prefactor", "must be positive")
    elif experiment == "probe_bilinear":
        _check(0.5 < f["b"] < 0.75, p + "b", "must lie in (1/2, 3/4)")
        _check(0.25 < f["d"] < 0.5, p + "d", "must lie in (1/4, 1/2)")
        _check(f["ensemble_size"] >= 16, p + "ensemble_size", "must be >= 16")
        _check(len(f["resolutions"]) >= 1, p + "resolutions", "need at least one resolution")
        for i, r in enumerate(f["resolutions"]):
            _check(r >= 4 and r % 2 == 0, f"{p}resolutions[{i}]", "must be an even integer >= 4")
    elif experiment == "region":
        _check(f["resolution"] >= 2, p + "resolution", "must be >= 2")
    elif experiment == "existence_scaling":
        amps = f["amplitudes"]
        _check(len(amps) >= 4, p + "amplitudes", "need at least 4 amplitudes")
        _check(all(a > 0 for a in amps), p + "amplitudes", "must be positive")
        _check(max(amps) >= 10 * min(amps) * (1 - 1e-12), p + "amplitudes",
               "must span at least one decade")
        _check(0 < f["threshold"] < 1, p + "threshold", "must lie in (0, 1)")
        _check(f["T_start"] > 0, p + "T_start", "must be positive")
        _check(f["T_cap"] > 0, p + "T_cap", "must be positive")
        _check(f["mesh_intervals"] >= 8 and f["mesh_intervals"] % 2 == 0, p + "mesh_intervals",
               "must be an even integer >= 8")
    return tuple(sorted((k, _freeze(v)) for k, v in f.items()))


TOP_KEYS = ("experiment", "model", "grid", "evolve", "initial_condition", "parameters",
            "seed", "output_dir")


def config_from_dict(doc: Dict[str, Any]) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("", "configuration must be a JSON object")
    unknown = sorted(set(doc) - set(TOP_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "experiment" not in doc:
        raise ConfigError("experiment", "missing required key")
    exp = _str(doc["experiment"], "experiment").replace("-", "_")
    if exp not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {list(EXPERIMENTS)}")
    seed = _int(doc.get("seed", 0), "seed")
    _check(seed >= 0, "seed", "must be nonnegative")
    return ExperimentConfig(
        experiment=exp,
        model=_model(doc.get("model")),
        grid=_grid(doc.get("grid")),
        evolve=_evolve(doc.get("evolve")),
        initial_condition=_initial_condition(doc.get("initial_condition"), exp),
        parameters=_parameters(doc.get("parameters"), exp),
        seed=seed,
        output_dir=_str(doc.get("output_dir", "out"), "output_dir"),
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from None
    return config_from_dict(doc)


def config_to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Fully explicit document (all defaults spelled out)."""
    return {
        "experiment": cfg.experiment,
        "model": asdict(cfg.model),
        "grid": asdict(cfg.grid),
        "evolve": asdict(cfg.evolve),
        "initial_condition": cfg.initial_condition.as_dict(),
        "parameters": {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.parameters},
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    }


def serialize_config(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2) + "\n"


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())

