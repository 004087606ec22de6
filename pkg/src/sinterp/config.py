"""Run configuration: a small key=value file format with strict validation."""

import os
from dataclasses import dataclass, fields

from .pipeline import parse_superpixel_spec

_METHODS = ("sin", "slic")
_SCORERS = ("color", "gt", "trained")
_COLOR_SPACES = ("rgb", "lab")


class ConfigError(ValueError):
    """Malformed configuration file or invalid value."""


@dataclass(frozen=True)
class RunConfig:
    """Everything the CLI needs that is not a per-invocation path."""

    method: str = "sin"
    scorer: str = "color"
    seed_step: int = 16
    tau: float = 0.05
    color_space: str = "rgb"
    target_superpixels: object = None  # int count or (rows, cols)
    weights_h: tuple | None = None
    weights_v: tuple | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ConfigError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.scorer not in _SCORERS:
            raise ConfigError(f"scorer must be one of {_SCORERS}, got {self.scorer!r}")
        if self.seed_step < 2 or (self.seed_step & (self.seed_step - 1)) != 0:
            raise ConfigError(f"seed_step must be a power of two >= 2, "
                              f"got {self.seed_step}")
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.color_space not in _COLOR_SPACES:
            raise ConfigError(f"color_space must be one of {_COLOR_SPACES}, "
                              f"got {self.color_space!r}")
        for name in ("weights_h", "weights_v"):
            value = getattr(self, name)
            if value is not None:
                if not value or any(w <= 0 for w in value):
                    raise ConfigError(f"{name} must be positive numbers")
                object.__setattr__(self, name, tuple(float(w) for w in value))
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")


def _parse_value(key, raw):
    if key == "method" or key == "scorer" or key == "color_space":
        return raw
    if key == "seed_step":
        return int(raw)
    if key == "tau":
        return float(raw)
    if key == "target_superpixels":
        return parse_superpixel_spec(raw)
    if key in ("weights_h", "weights_v"):
        return tuple(float(part) for part in raw.split(","))
    if key == "threads":
        return int(raw)
    raise AssertionError(key)


def load_config(path) -> RunConfig:
    """Parse a key=value config file; unknown keys are errors."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{line_no}: expected key=value, "
                                  f"got {stripped!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in known:
                raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
            try:
                values[key] = _parse_value(key, raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{path}:{line_no}: bad value for {key}: "
                                  f"{exc}") from None
    return RunConfig(**values)


def resolve_threads(config_threads: int | None) -> int:
    """Thread count: SINTERP_THREADS overrides config; default is the
    machine's available parallelism."""
    env = os.environ.get("SINTERP_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"SINTERP_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(f"SINTERP_THREADS must be >= 1, got {n}")
        return n
    if config_threads is not None:
        return config_threads
    return os.cpu_count() or 1
