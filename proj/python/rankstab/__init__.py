"""Ranking-stability analysis with rank-biased overlap."""

from ._rankstab import (
    DEFAULT_PERSISTENCE,
    DEFAULT_PRESENCE_THRESHOLD,
    ConfigError,
    InputError,
    RboResult,
    SeriesPoint,
    aggregate,
    expected_depth,
    moving_average,
    parse_suggestions,
    prefix_weight,
    rbo,
    stability_series,
    window_for_days,
)

__all__ = [
    "DEFAULT_PERSISTENCE",
    "DEFAULT_PRESENCE_THRESHOLD",
    "ConfigError",
    "InputError",
    "RboResult",
    "SeriesPoint",
    "aggregate",
    "expected_depth",
    "moving_average",
    "parse_suggestions",
    "prefix_weight",
    "rbo",
    "stability_series",
    "window_for_days",
]
