"""Pipeline-wide configuration: file loading, overrides and thread limits.

A config file is one JSON object with an optional object per section::

    {"segmentation": {"bg_tolerance": 0.1}, "dc": {"max_iters": 200}}

Unknown sections or keys are rejected. ``--set section.key=value`` style
overrides are applied on top; values are parsed as JSON, falling back to
plain strings.
"""
import json
import os
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any, Final

from ..exceptions import ConfigError
from .module_configs import (DcConfig, EventConfig, FlowConfig, ImagingConfig,
                             RefineConfig, SegmentationConfig, TrackerConfig)
from .parameterizable_mixin import ParameterizableMixin

__all__ = ["PipelineConfig", "load_config", "apply_overrides",
           "worker_count", "THREADS_ENV_VAR"]

THREADS_ENV_VAR: Final[str] = "MOTIONVEC_THREADS"

_SECTIONS: Final[dict[str, type[ParameterizableMixin]]] = {
    "imaging": ImagingConfig,
    "segmentation": SegmentationConfig,
    "flow": FlowConfig,
    "dc": DcConfig,
    "tracking": TrackerConfig,
    "refine": RefineConfig,
    "events": EventConfig,
}


class PipelineConfig(ParameterizableMixin):
    """All per-module sections bundled together.

    The tracking section's flow and dc handles always mirror the top-level
    flow and dc sections.
    """

    def __init__(self, imaging: ImagingConfig | None = None,
                 segmentation: SegmentationConfig | None = None,
                 flow: FlowConfig | None = None, dc: DcConfig | None = None,
                 tracking: TrackerConfig | None = None,
                 refine: RefineConfig | None = None,
                 events: EventConfig | None = None):
        self.imaging = imaging or ImagingConfig()
        self.segmentation = segmentation or SegmentationConfig()
        self.flow = flow or FlowConfig()
        self.dc = dc or DcConfig()
        tracking = tracking or TrackerConfig()
        self.tracking = tracking.with_updates(flow=self.flow, dc=self.dc)
        self.refine = refine or RefineConfig()
        self.events = events or EventConfig()

    def get_params(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in _SECTIONS}

    @classmethod
    def from_sections(cls, sections: Mapping[str, Any]) -> "PipelineConfig":
        """Build a config from plain per-section dictionaries.

        Raises:
            ConfigError: On unknown sections, unknown keys, or invalid values.
        """
        if not isinstance(sections, Mapping):
            raise ConfigError("Config root must be a JSON object")
        built = {}
        for section, values in sections.items():
            if section not in _SECTIONS:
                raise ConfigError(f"Unknown config section '{section}'; "
                                  f"expected one of {sorted(_SECTIONS)}")
            if not isinstance(values, Mapping):
                raise ConfigError(f"Config section '{section}' must be an object")
            if section == "tracking" and ({"flow", "dc"} & set(values)):
                raise ConfigError("Set flow and dc options in their own sections")
            try:
                built[section] = _SECTIONS[section].from_params(values, section=section)
            except TypeError as e:
                raise ConfigError(f"Invalid value in section '{section}': {e}") from e
        return cls(**built)

    def to_sections(self) -> dict[str, dict[str, Any]]:
        """Plain per-section dictionaries, the inverse of from_sections."""
        sections = {}
        for name in _SECTIONS:
            params = getattr(self, name).get_params()
            if name == "tracking":
                params = {k: v for k, v in params.items() if k not in ("flow", "dc")}
            sections[name] = params
        return sections


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read a JSON config file; None yields all defaults.

    Raises:
        ConfigError: If the file is missing, not JSON, or invalid.
    """
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: "
                          f"{e.msg} at line {e.lineno}, column {e.colno}") from e
    return PipelineConfig.from_sections(tree)


def _parse_override_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(config: PipelineConfig,
                    overrides: Iterable[str]) -> PipelineConfig:
    """Apply ``section.key=value`` overrides to a config.

    Args:
        config: The base configuration.
        overrides: Override strings, applied in order.

    Returns:
        A new PipelineConfig.

    Raises:
        ConfigError: On malformed override strings or invalid values.
    """
    sections = config.to_sections()
    for item in overrides:
        target, sep, raw = item.partition("=")
        section, dot, key = target.strip().partition(".")
        if not sep or not dot or not section or not key:
            raise ConfigError(f"Override '{item}' must look like section.key=value")
        if section not in sections:
            raise ConfigError(f"Unknown config section '{section}' in override '{item}'")
        sections[section][key] = _parse_override_value(raw.strip())
    return PipelineConfig.from_sections(sections)


def worker_count(default: int | None = None) -> int:
    """Number of worker threads allowed by MOTIONVEC_THREADS.

    Args:
        default: Used when the variable is unset; None means os.cpu_count().

    Returns:
        A positive worker count.

    Raises:
        ConfigError: If the variable is set to anything but a positive int.
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return max(1, default if default is not None else (os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV_VAR} must be a positive integer, "
                          f"got {raw!r}") from e
    if value < 1:
        raise ConfigError(f"{THREADS_ENV_VAR} must be a positive integer, got {value}")
    return value
