"""
Strict parsing of the per-run JSON document handed to `qphonon.py`.

A document names its command and carries one parameter block under the
command's name:

```
{
  "schema_version": 1,
  "command": "evolve",
  "seed": 0,
  "evolve": {
    "n_total": 128,
    "omega_e": 1.0,
    "pulse": {"kind": "gaussian", "amplitude": 0.4, "omega_f": 1.0, "center": 3.0, "width": 1.0},
    "time": {"t_max": 8.0, "n_points": 161}
  }
}
```

Unknown keys, missing keys, wrong types and out-of-range values raise
`ConfigError` naming the dotted path of the offending field. Frequencies are
angular (hbar = 1). `configs/run_config.schema.json` documents the same
layout.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from dynamics import PULSE_KINDS, PulseProfile

SCHEMA_VERSION = 1
COMMANDS = ("algebra-check", "evolve", "sweep", "dressed-check", "rabi")
SIGN_RESOLUTIONS = ("oracle", "derived")


class ConfigError(ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


########################################################################################
## Field readers
########################################################################################


def _join(path, key):
    return f"{path}.{key}" if path else str(key)


def _mapping(data, path):
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    return data


def _check_keys(data, path, required=(), optional=()):
    _mapping(data, path)
    unknown = sorted(set(data) - set(required) - set(optional))
    if unknown:
        raise ConfigError(_join(path, unknown[0]), "unknown key")
    for key in required:
        if key not in data:
            raise ConfigError(_join(path, key), "missing required key")


def _int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {value}")
    return value


def _float(value, path, positive=False, non_negative=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, f"must be finite, got {value}")
    if positive and value <= 0:
        raise ConfigError(path, f"must be > 0, got {value}")
    if non_negative and value < 0:
        raise ConfigError(path, f"must be >= 0, got {value}")
    return value


def _bool(value, path):
    if not isinstance(value, bool):
        raise ConfigError(path, f"expected true or false, got {value!r}")
    return value


def _complex(value, path):
    """A number, or [re, im]."""
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(path, f"complex values are [re, im], got {len(value)} entries")
        return complex(_float(value[0], f"{path}[0]"), _float(value[1], f"{path}[1]"))
    return complex(_float(value, path))


def _choice(value, path, choices):
    if value not in choices:
        raise ConfigError(path, f"expected one of {list(choices)}, got {value!r}")
    return value


def _int_list(value, path, minimum=1, non_empty=True):
    if not isinstance(value, list):
        raise ConfigError(path, f"expected a list, got {type(value).__name__}")
    if non_empty and not value:
        raise ConfigError(path, "must not be empty")
    return tuple(_int(v, f"{path}[{i}]", minimum) for i, v in enumerate(value))


def _pairs(value, path):
    if not isinstance(value, list):
        raise ConfigError(path, f"expected a list of [N, Delta] pairs, got {type(value).__name__}")
    pairs = []
    for i, pair in enumerate(value):
        item = f"{path}[{i}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(item, f"expected [N, Delta], got {pair!r}")
        pairs.append((_int(pair[0], f"{item}[0]", 1), _int(pair[1], f"{item}[1]", 1)))
    return tuple(pairs)


def _pulse(data, path):
    _mapping(data, path)
    kind = _choice(data.get("kind"), _join(path, "kind"), PULSE_KINDS)
    required = {
        "constant": ("kind", "amplitude"),
        "monochromatic": ("kind", "amplitude", "omega_f"),
        "gaussian": ("kind", "amplitude", "omega_f", "center", "width"),
    }[kind]
    _check_keys(data, path, required=required)
    amplitude = _complex(data["amplitude"], _join(path, "amplitude"))
    if kind == "constant":
        return PulseProfile.constant(amplitude)
    omega_f = _float(data["omega_f"], _join(path, "omega_f"))
    if kind == "monochromatic":
        return PulseProfile.monochromatic(amplitude, omega_f)
    return PulseProfile.gaussian(
        amplitude,
        omega_f,
        _float(data["center"], _join(path, "center")),
        _float(data["width"], _join(path, "width"), positive=True),
    )


@dataclass(frozen=True)
class TimeGrid:
    t_max: float
    n_points: int

    @classmethod
    def from_dict(cls, data, path):
        _check_keys(data, path, required=("t_max", "n_points"))
        return cls(
            _float(data["t_max"], _join(path, "t_max"), positive=True),
            _int(data["n_points"], _join(path, "n_points"), minimum=2),
        )

    def values(self):
        return np.linspace(0.0, self.t_max, self.n_points)


########################################################################################
## Command blocks
########################################################################################


@dataclass(frozen=True)
class AlgebraCheckConfig:
    n_values: tuple
    dressed_pairs: tuple = ()

    @classmethod
    def from_dict(cls, data, path):
        _check_keys(data, path, required=("n_values",), optional=("dressed_pairs",))
        return cls(
            n_values=_int_list(data["n_values"], _join(path, "n_values")),
            dressed_pairs=_pairs(data.get("dressed_pairs", []), _join(path, "dressed_pairs")),
        )


@dataclass(frozen=True)
class EvolveConfig:
    n_total: int
    omega_e: float
    pulse: PulseProfile
    time: TimeGrid
    sign_resolution: str = "oracle"
    substeps: int | None = None
    check_step: bool = False

    @classmethod
    def from_dict(cls, data, path):
        _check_keys(
            data,
            path,
            required=("n_total", "omega_e", "pulse", "time"),
            optional=("sign_resolution", "substeps", "check_step"),
        )
        substeps = data.get("substeps")
        return cls(
            n_total=_int(data["n_total"], _join(path, "n_total"), minimum=1),
            omega_e=_float(data["omega_e"], _join(path, "omega_e")),
            pulse=_pulse(data["pulse"], _join(path, "pulse")),
            time=TimeGrid.from_dict(data["time"], _join(path, "time")),
            sign_resolution=_choice(
                data.get("sign_resolution", "oracle"),
                _join(path, "sign_resolution"),
                SIGN_RESOLUTIONS,
            ),
            substeps=None if substeps is None else _int(substeps, _join(path, "substeps"), 1),
            check_step=_bool(data.get("check_step", False), _join(path, "check_step")),
        )


@dataclass(frozen=True)
class SweepConfig:
    n_values: tuple
    omega_e: float
    pulse: PulseProfile
    time: TimeGrid
    sign_resolution: str = "oracle"
    substeps: int | None = None

    @classmethod
    def from_dict(cls, data, path):
        _check_keys(
            data,
            path,
            required=("n_values", "omega_e", "pulse", "time"),
            optional=("sign_resolution", "substeps"),
        )
        substeps = data.get("substeps")
        return cls(
            n_values=_int_list(data["n_values"], _join(path, "n_values")),
            omega_e=_float(data["omega_e"], _join(path, "omega_e")),
            pulse=_pulse(data["pulse"], _join(path, "pulse")),
            time=TimeGrid.from_dict(data["time"], _join(path, "time")),
            sign_resolution=_choice(
                data.get("sign_resolution", "oracle"),
                _join(path, "sign_resolution"),
                SIGN_RESOLUTIONS,
            ),
            substeps=None if substeps is None else _int(substeps, _join(path, "substeps"), 1),
        )


@dataclass(frozen=True)
class DressedFrequencies:
    omega_e: float = 1.0
    omega_g: float = 0.0
    omega_0: float = 0.0
    g: float = 0.1

    @classmethod
    def from_dict(cls, data, path):
        _check_keys(data, path, optional=("omega_e", "omega_g", "omega_0", "g"))
        defaults = cls()
        return cls(
            **{
                key: _float(data.get(key, getattr(defaults, key)), _join(path, key))
                for key in ("omega_e", "omega_g", "omega_0", "g")
            }
        )


@dataclass(frozen=True)
class DressedDynamicsConfig:
    n_total: int
    delta: int
    omega_e: float
    g: float
    time: TimeGrid
    omega_g: float = 0.0
    omega_0: float = 0.0
    substeps: int | None = None

    @classmethod
    def from_dict(cls, data, path):
        _check_keys(
            data,
            path,
            required=("n_total", "delta", "omega_e", "g", "time"),
            optional=("omega_g", "omega_0", "substeps"),
        )
        substeps = data.get("substeps")
        return cls(
            n_total=_int(data["n_total"], _join(path, "n_total"), minimum=1),
            delta=_int(data["delta"], _join(path, "delta"), minimum=1),
            omega_e=_float(data["omega_e"], _join(path, "omega_e")),
            g=_float(data["g"], _join(path, "g")),
            time=TimeGrid.from_dict(data["time"], _join(path, "time")),
            omega_g=_float(data.get("omega_g", 0.0), _join(path, "omega_g")),
            omega_0=_float(data.get("omega_0", 0.0), _join(path, "omega_0")),
            substeps=None if substeps is None else _int(substeps, _join(path, "substeps"), 1),
        )


@dataclass(frozen=True)
class DressedCheckConfig:
    pairs: tuple = ()
    exhaustive_max: int = 0
    random_pairs: int = 0
    random_max: int = 200
    frequencies: DressedFrequencies = field(default_factory=DressedFrequencies)
    dynamics: DressedDynamicsConfig | None = None

    @classmethod
    def from_dict(cls, data, path):
        _check_keys(
            data,
            path,
            optional=(
                "pairs",
                "exhaustive_max",
                "random_pairs",
                "random_max",
                "frequencies",
                "dynamics",
            ),
        )
        dynamics = data.get("dynamics")
        config = cls(
            pairs=_pairs(data.get("pairs", []), _join(path, "pairs")),
            exhaustive_max=_int(data.get("exhaustive_max", 0), _join(path, "exhaustive_max"), 0),
            random_pairs=_int(data.get("random_pairs", 0), _join(path, "random_pairs"), 0),
            random_max=_int(data.get("random_max", 200), _join(path, "random_max"), 1),
            frequencies=DressedFrequencies.from_dict(
                data.get("frequencies", {}), _join(path, "frequencies")
            ),
            dynamics=None
            if dynamics is None
            else DressedDynamicsConfig.from_dict(dynamics, _join(path, "dynamics")),
        )
        if not (config.pairs or config.exhaustive_max or config.random_pairs):
            raise ConfigError(path, "no sectors to check; give pairs, exhaustive_max or random_pairs")
        return config


@dataclass(frozen=True)
class RabiConfig:
    g: float
    omega_e: float
    omega_f: float
    n_total: int
    time: TimeGrid
    substeps: int | None = None

    @classmethod
    def from_dict(cls, data, path):
        _check_keys(
            data,
            path,
            required=("g", "omega_e", "omega_f", "n_total", "time"),
            optional=("substeps",),
        )
        substeps = data.get("substeps")
        return cls(
            g=_float(data["g"], _join(path, "g")),
            omega_e=_float(data["omega_e"], _join(path, "omega_e")),
            omega_f=_float(data["omega_f"], _join(path, "omega_f")),
            n_total=_int(data["n_total"], _join(path, "n_total"), minimum=1),
            time=TimeGrid.from_dict(data["time"], _join(path, "time")),
            substeps=None if substeps is None else _int(substeps, _join(path, "substeps"), 1),
        )


BLOCKS = {
    "algebra-check": AlgebraCheckConfig,
    "evolve": EvolveConfig,
    "sweep": SweepConfig,
    "dressed-check": DressedCheckConfig,
    "rabi": RabiConfig,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    block: object
    seed: int = 0
    output_dir: Path | None = None
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, data):
        _mapping(data, "<document>")
        command = _choice(data.get("command"), "command", COMMANDS)
        _check_keys(
            data,
            "",
            required=("schema_version", "command", command),
            optional=("seed", "output_dir"),
        )
        version = _int(data["schema_version"], "schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"unsupported version {version}, expected {SCHEMA_VERSION}")
        output_dir = data.get("output_dir")
        if output_dir is not None and not isinstance(output_dir, str):
            raise ConfigError("output_dir", f"expected a path string, got {output_dir!r}")
        return cls(
            command=command,
            block=BLOCKS[command].from_dict(data[command], command),
            seed=_int(data.get("seed", 0), "seed", minimum=0),
            output_dir=None if output_dir is None else Path(output_dir),
        )


def load_config(path):
    """Read and validate a run document from `path`."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError("<document>", f"config file {path} not found") from e
    except json.JSONDecodeError as e:
        raise ConfigError("<document>", f"invalid JSON in {path}: {e}") from e
    return RunConfig.from_dict(data)
