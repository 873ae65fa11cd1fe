"""
Run settings: built-in defaults, then weightlab.toml, then CLI flags.
"""
import dataclasses
import os
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import constants
from errors import ConfigError


@dataclass(frozen=True)
class TrendThresholds:
    plateau_spread: float = constants.PLATEAU_RELATIVE_SPREAD
    min_slope: float = constants.DIVERGENCE_MIN_SLOPE
    min_growth: float = constants.DIVERGENCE_MIN_GROWTH
    log_min_step: float = constants.LOG_DIVERGENCE_MIN_STEP
    log_persistence: float = constants.LOG_DIVERGENCE_PERSISTENCE
    log_rule: bool = False


@dataclass(frozen=True)
class Settings:
    trend: TrendThresholds = field(default_factory=TrendThresholds)
    quad_tolerance: float = constants.QUAD_RELATIVE_TOLERANCE
    rdf_tolerance: float = constants.RDF_TOLERANCE
    rdf_max_terms: int = constants.RDF_MAX_TERMS
    norm_trials: int = constants.NORM_TRIALS
    seed: int = constants.DEFAULT_SEED
    depth: int = constants.DEFAULT_DEPTH
    radius: float = constants.GLOBAL_RADII[-1]
    p: float = 2.0
    jobs: int = 1
    out: str = constants.DEFAULT_OUTPUT_DIR
    format: str = "json"
    plots: bool = True

    def to_dict(self):
        return dataclasses.asdict(self)


_TREND_KEYS = {f.name for f in dataclasses.fields(TrendThresholds)}
_SETTINGS_KEYS = {f.name for f in dataclasses.fields(Settings)} - {"trend"}


def _split(values, source):
    trend, top = {}, {}
    for key, value in values.items():
        if value is None:
            continue
        if key in _TREND_KEYS:
            trend[key] = value
        elif key in _SETTINGS_KEYS:
            top[key] = value
        else:
            raise ConfigError(
                f"Unknown setting '{key}' in {source}.\n"
                f"Known settings: {', '.join(sorted(_TREND_KEYS | _SETTINGS_KEYS))}"
            )
    return trend, top


def _apply(settings, values, source):
    trend, top = _split(values, source)
    if trend:
        top["trend"] = dataclasses.replace(settings.trend, **trend)
    return dataclasses.replace(settings, **top)


def read_config_file(path):
    """Parse a flat key = value TOML file into a dict."""
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid TOML: {e}")
    if any(isinstance(v, dict) for v in data.values()):
        raise ConfigError(f"Config file {path} must be flat key = value pairs, no tables.")
    return data


def load_settings(path=None, overrides=None):
    """Build Settings with precedence defaults < config file < overrides.

    When no path is given, weightlab.toml in the working directory is used if present.
    """
    settings = Settings()
    if path is None and os.path.exists(constants.CONFIG_FILE_NAME):
        path = constants.CONFIG_FILE_NAME
    if path is not None:
        settings = _apply(settings, read_config_file(path), path)
    if overrides:
        settings = _apply(settings, overrides, "command-line flags")
    if settings.jobs < 1:
        raise ConfigError("jobs must be at least 1.")
    if settings.format not in ("json", "csv"):
        raise ConfigError(f"format must be 'json' or 'csv', got '{settings.format}'.")
    smallest = 2.0 ** (constants.TREND_MIN_POINTS + 1)
    if not settings.radius >= smallest:
        raise ConfigError(f"radius must be at least {smallest:g} for a global trend, "
                          f"got {settings.radius:g}.")
    return settings
