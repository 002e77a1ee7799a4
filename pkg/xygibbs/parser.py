"""Parsing of command-line values and JSON config files."""
import json
import math
import os
from typing import Any, Dict, List, Union

from xygibbs.equilibrium import Cylinder
from xygibbs.exceptions import ConfigError
from xygibbs.potential import EventuallyConstantPoint


def _load_json(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.decoder.JSONDecodeError as e:
        raise ConfigError(f'could not parse {what}: {e}')


def _number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'{what} must be a number, got {value!r}')
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f'{what} must be finite, got {value!r}')
    return value


def parse_numbers(raw: Union[str, float, List[float]], what: str = "value") -> List[float]:
    """Parse ``"v"`` or ``"v1,v2,..."`` (or an already decoded JSON value).

    :param raw:
        The text or value.
    :param str what:
        Name used in error messages.
    :rtype: list
    """
    if isinstance(raw, str):
        parts = [p.strip() for p in raw.split(",")]
        if not all(parts):
            raise ConfigError(f'could not parse {what} list {raw!r}')
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f'could not parse {what} list {raw!r}')
        return [_number(v, what) for v in values]
    if isinstance(raw, list):
        return [_number(v, what) for v in raw]
    return [_number(raw, what)]


def parse_betas(raw: Union[str, float, List[float]]) -> List[float]:
    """Parse one or more inverse temperatures; all must be nonnegative."""
    betas = parse_numbers(raw, "beta")
    if not betas:
        raise ConfigError('at least one beta is required')
    for beta in betas:
        if beta < 0:
            raise ConfigError(f'beta must be nonnegative, got {beta!r}')
    return betas


def parse_cylinder(raw: Union[str, list]) -> Cylinder:
    """Parse ``[[lo, hi], ...]`` given as JSON text or decoded JSON.

    :rtype: Cylinder
    """
    if isinstance(raw, str):
        raw = _load_json(raw, "cylinder")
    return Cylinder.from_pairs(raw)


def parse_point(raw: Union[str, dict, list]) -> EventuallyConstantPoint:
    """Parse an eventually constant point.

    Accepted forms are ``{"prefix": [x_1, ...], "tail": c}``,
    ``[[x_1, ...], c]`` and a bare number ``c`` for a constant point.

    :rtype: EventuallyConstantPoint
    """
    if isinstance(raw, str):
        raw = _load_json(raw, "point")
    if isinstance(raw, dict):
        prefix = raw.get("prefix", [])
        tail = raw.get("tail")
    elif isinstance(raw, list) and len(raw) == 2 and isinstance(raw[0], list):
        prefix, tail = raw
    else:
        prefix, tail = [], raw
    if not isinstance(prefix, list):
        raise ConfigError(f'point prefix must be a list, got {prefix!r}')
    return EventuallyConstantPoint(
        [_number(v, "point coordinate") for v in prefix],
        _number(tail, "point tail"),
    )


def load_config(path: str) -> Dict[str, Any]:
    """Read a JSON config file holding a family object and optional run fields.

    :param str path:
        Path of the file.
    :rtype: dict
    """
    if not os.path.isfile(path):
        raise ConfigError(f'config file {path!r} does not exist')
    with open(path, encoding="utf-8") as fh:
        config = _load_json(fh.read(), f'config file {path!r}')
    if not isinstance(config, dict):
        raise ConfigError(f'config file {path!r} must hold a JSON object')
    return config
