import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "config.yaml"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


@dataclass(frozen=True)
class Settings:
    """
    Library-wide defaults.

    Values come from config.yaml and can be overridden through the
    VORTEX_THREADS and VORTEX_LOG_LEVEL environment variables.
    """
    first_order_threshold: float = 0.1
    threads: int = 1
    log_level: str = "INFO"
    grid_extent: float = 3.0
    grid_resolution: int = 256
    step_count: int = 10_000
    convergence_step_counts: Tuple[int, ...] = (100, 200, 400, 800)
    zscan_z_max_over_labs: float = 40.0
    zscan_points: int = 401
    intensity_floor: float = 1e-12
    petal_samples: int = 512
    source: Optional[str] = field(default=None, compare=False)


def _section(raw: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = raw.get(name) or {}
    if not isinstance(value, dict):
        raise ValueError(f"config section '{name}' must be a mapping")
    return value


def settings_from_mapping(raw: Dict[str, Any], source: Optional[str] = None) -> Settings:
    """
    Build Settings from a parsed YAML mapping, keeping defaults for missing keys.

    Args:
        raw: Mapping as returned by yaml.safe_load
        source: Where the mapping was read from (for log messages)

    Returns:
        Settings instance
    """
    defaults = Settings()
    grid = _section(raw, "grid")
    integrator = _section(raw, "integrator")
    convergence = _section(raw, "convergence")
    zscan = _section(raw, "zscan")
    vortices = _section(raw, "vortices")

    try:
        settings = Settings(
            first_order_threshold=float(raw.get("first_order_threshold", defaults.first_order_threshold)),
            threads=int(raw.get("threads", defaults.threads)),
            log_level=str(raw.get("log_level", defaults.log_level)).upper(),
            grid_extent=float(grid.get("extent", defaults.grid_extent)),
            grid_resolution=int(grid.get("resolution", defaults.grid_resolution)),
            step_count=int(integrator.get("step_count", defaults.step_count)),
            convergence_step_counts=tuple(
                int(s) for s in convergence.get("step_counts", defaults.convergence_step_counts)
            ),
            zscan_z_max_over_labs=float(zscan.get("z_max_over_labs", defaults.zscan_z_max_over_labs)),
            zscan_points=int(zscan.get("points", defaults.zscan_points)),
            intensity_floor=float(vortices.get("intensity_floor", defaults.intensity_floor)),
            petal_samples=int(vortices.get("petal_samples", defaults.petal_samples)),
            source=source,
        )
    except (TypeError, ValueError) as e:
        raise ValueError(f"invalid value in config {source or '<mapping>'}: {e}") from e

    if settings.first_order_threshold <= 0:
        raise ValueError("first_order_threshold must be positive")
    if settings.threads < 1:
        raise ValueError("threads must be at least 1")
    return settings


def _apply_environment(settings: Settings) -> Settings:
    overrides: Dict[str, Any] = {}
    threads = os.getenv("VORTEX_THREADS")
    if threads:
        try:
            overrides["threads"] = max(1, int(threads))
        except ValueError as e:
            raise ValueError(f"VORTEX_THREADS must be an integer, got {threads!r}") from e
    level = os.getenv("VORTEX_LOG_LEVEL")
    if level:
        overrides["log_level"] = level.upper()
    if not overrides:
        return settings
    values = {name: getattr(settings, name) for name in settings.__dataclass_fields__}
    values.update(overrides)
    return Settings(**values)


@lru_cache(maxsize=None)
def load_settings(path: Optional[str] = None) -> Settings:
    """
    Load settings from config.yaml (or VORTEX_CONFIG / an explicit path).

    A missing file yields the built-in defaults.
    """
    config_path = Path(path or os.getenv("VORTEX_CONFIG") or DEFAULT_CONFIG_PATH)
    if not config_path.exists():
        return _apply_environment(Settings())

    try:
        raw = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ValueError(f"malformed config file {config_path}: {e}") from e
    if not isinstance(raw, dict):
        raise ValueError(f"config file {config_path} must contain a mapping")
    return _apply_environment(settings_from_mapping(raw, source=str(config_path)))


def configure_logging(level: str = "INFO") -> None:
    """Route log records to stderr; called once by the command-line front end."""
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)
