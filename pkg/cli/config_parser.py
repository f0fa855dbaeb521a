"""
Run configuration files: line-oriented `key = value` pairs with `#` comments.

Values are coerced with yaml.safe_load and validated per key; keys the file
omits take their defaults from the `run:` section of config/config.yaml.
"""

import math
import os
from dataclasses import dataclass, fields
from typing import Optional, Tuple

import yaml

from base.exceptions import ConfigError
from flow.particles import PRESET_NAMES
from utils.complexplane import Grid
from utils.config_manager import get_config_manager

MODES = ("probe-map", "field", "advect", "sweep-eps", "check")
ECHO_FILE = "config_effective.txt"


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one slitflow invocation"""

    mode: str
    epsilon: float
    gamma: float
    eta: float
    vorticity_preset: str
    grid_origin: Tuple[float, float]
    grid_h: float
    grid_nx: int
    grid_ny: int
    dt: float
    t_final: float
    blob_delta: Optional[float]
    output_dir: str
    seed: int
    snapshot_cadence: int
    check: Optional[str]
    eps_list: Tuple[float, ...]
    particle_h: float
    jobs: int

    def grid(self) -> Grid:
        return Grid(complex(*self.grid_origin), self.grid_h, self.grid_nx, self.grid_ny)

    def to_text(self) -> str:
        """Effective configuration in the file grammar; parse_config(to_text()) == self"""
        lines = ["# effective configuration"]
        for item in fields(self):
            lines.append(f"{item.name} = {_render(getattr(self, item.name))}")
        return "\n".join(lines) + "\n"


def _render(value):
    if value is None:
        return "null"
    if isinstance(value, tuple):
        return ", ".join(_render(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---- per-key coercion -------------------------------------------------------

def _number(key, value):
    if isinstance(value, bool):
        raise ValueError(f"{key} must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        number = float(value)
    elif isinstance(value, str):
        # YAML 1.1 leaves forms like 1e-3 as strings
        number = float(value)
    else:
        raise ValueError(f"{key} must be a number, got {value!r}")
    if not math.isfinite(number):
        raise ValueError(f"{key} must be finite")
    return number


def _integer(key, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{key} must be an integer, got {value!r}")
    return int(value)


def _positive(key, value):
    number = _number(key, value)
    if not number > 0:
        raise ValueError(f"{key} must be > 0, got {number!r}")
    return number


def _non_negative(key, value):
    number = _number(key, value)
    if not number >= 0:
        raise ValueError(f"{key} must be >= 0, got {number!r}")
    return number


def _text(key, value):
    if value is None or str(value).strip() == "":
        raise ValueError(f"{key} must not be empty")
    return str(value)


def _mode(key, value):
    value = _text(key, value)
    if value not in MODES:
        raise ValueError(f"{key} must be one of {', '.join(MODES)}, got {value!r}")
    return value


def _preset(key, value):
    value = _text(key, value)
    if value not in PRESET_NAMES:
        raise ValueError(f"{key} must be one of {', '.join(PRESET_NAMES)}, got {value!r}")
    return value


def _origin(key, value):
    values = tuple(value) if isinstance(value, (list, tuple)) else (value,)
    if len(values) != 2:
        raise ValueError(f"{key} needs two coordinates, got {len(values)}")
    return tuple(_number(key, v) for v in values)


def _eps_list(key, value):
    values = tuple(value) if isinstance(value, (list, tuple)) else (value,)
    if not values:
        raise ValueError(f"{key} must list at least one epsilon")
    return tuple(_positive(key, v) for v in values)


def _count(key, value):
    count = _integer(key, value)
    if count < 1:
        raise ValueError(f"{key} must be >= 1, got {count}")
    return count


def _non_negative_count(key, value):
    count = _integer(key, value)
    if count < 0:
        raise ValueError(f"{key} must be >= 0, got {count}")
    return count


def _optional(coerce):
    def wrapped(key, value):
        if value is None:
            return None
        return coerce(key, value)
    return wrapped


COERCERS = {
    "mode": _mode,
    "epsilon": _positive,
    "gamma": _number,
    "eta": _non_negative,
    "vorticity_preset": _preset,
    "grid_origin": _origin,
    "grid_h": _positive,
    "grid_nx": _count,
    "grid_ny": _count,
    "dt": _positive,
    "t_final": _positive,
    "blob_delta": _optional(_non_negative),
    "output_dir": _text,
    "seed": _non_negative_count,
    "snapshot_cadence": _non_negative_count,
    "check": _optional(_text),
    "eps_list": _eps_list,
    "particle_h": _positive,
    "jobs": _count,
}
LIST_KEYS = ("grid_origin", "eps_list")
TEXT_KEYS = ("mode", "vorticity_preset", "output_dir", "check")
NULL_WORDS = ("", "null", "~")


def _load_value(key, text):
    """Coerce the text right of '=' to a Python value"""
    if key in LIST_KEYS:
        return [yaml.safe_load(part.strip()) for part in text.split(",") if part.strip()]
    if key in TEXT_KEYS:
        return None if text in NULL_WORDS else text
    return yaml.safe_load(text) if text else None


def read_pairs(text):
    """Map key -> (value, line number) for every assignment line"""
    pairs = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}",
                              line_number=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in COERCERS:
            raise ConfigError(f"unknown key '{key}'", line_number=number, key=key)
        if key in pairs:
            raise ConfigError(f"duplicate key '{key}' (first set on line {pairs[key][1]})",
                              line_number=number, key=key)
        try:
            loaded = _load_value(key, value)
        except yaml.YAMLError as e:
            raise ConfigError(f"malformed value for '{key}': {e}",
                              line_number=number, key=key) from e
        pairs[key] = (loaded, number)
    return pairs


def parse_config(text, overrides=None, defaults=None) -> RunConfig:
    """
    Parse and validate a run configuration.

    overrides (mode, output_dir, seed, check from the command line) win over
    file values; a file mode that disagrees with the command-line mode is an
    error. Missing keys fall back to defaults (config.yaml's run section).
    """
    pairs = read_pairs(text)
    if defaults is None:
        defaults = get_config_manager().get_run_defaults()
    overrides = {key: value for key, value in (overrides or {}).items() if value is not None}

    if "mode" in overrides and "mode" in pairs and pairs["mode"][0] != overrides["mode"]:
        raise ConfigError(f"mode '{pairs['mode'][0]}' disagrees with "
                          f"the command-line mode '{overrides['mode']}'",
                          line_number=pairs["mode"][1], key="mode")

    values = {}
    for key, coerce in COERCERS.items():
        line_number = None
        if key in overrides:
            raw = overrides[key]
        elif key in pairs:
            raw, line_number = pairs[key]
        elif key in defaults:
            raw = defaults[key]
        elif key == "mode":
            raise ConfigError("missing required key 'mode'", key="mode")
        else:
            raise ConfigError(f"no default for key '{key}'", key=key)

        try:
            values[key] = coerce(key, raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), line_number=line_number, key=key) from e

    return RunConfig(**values)


def load_config_file(path, overrides=None) -> RunConfig:
    """Read a UTF-8 config file and parse it"""
    try:
        with open(path, "r", encoding="utf-8") as file:
            text = file.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return parse_config(text, overrides)


def write_config_echo(config: RunConfig, directory=None):
    """Write the effective configuration next to the run outputs"""
    directory = directory or config.output_dir
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, ECHO_FILE)
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write(config.to_text())
    return path
