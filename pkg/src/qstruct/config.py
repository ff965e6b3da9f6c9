"""Flat ``key = value`` experiment configuration files.

Grammar (one entry per line)::

    line    := blank | comment | entry
    comment := "#" anything
    entry   := key "=" literal
    key     := [A-Za-z_][A-Za-z0-9_]*
    literal := a Python literal: int, float, str, bool, or a list/tuple of those

Reserved keys: ``experiment`` (text, required), ``seed`` (integer, required
unless given on the command line) and ``output_dir`` (text, optional). Every
other key is an experiment parameter and must be declared by that experiment.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
RESERVED = ("experiment", "seed", "output_dir")
DEFAULT_OUTPUT_DIR = "qstruct-output"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = DEFAULT_OUTPUT_DIR


def parse_config_text(text: str) -> dict:
    """Parse the flat format into an ordered ``{key: value}`` dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not _KEY.match(key):
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = ast.literal_eval(value.strip())
        except (ValueError, SyntaxError) as exc:
            raise ConfigError(f"line {lineno}: bad literal for {key!r}: {value.strip()!r}") from exc
    return out


def _coerce(key: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a real number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be text")
        return value
    if isinstance(default, (list, tuple)):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key} must be a list")
        if default:
            return [_coerce(f"{key}[{i}]", v, default[0]) for i, v in enumerate(value)]
        return list(value)
    raise ConfigError(f"{key}: unsupported parameter type")


def build_config(entries: dict, defaults_for, seed_override: int | None = None,
                 output_override: str | None = None) -> ExperimentConfig:
    """Validate parsed entries against the experiment's declared defaults.

    Args:
        entries: output of :func:`parse_config_text`.
        defaults_for: callable mapping an experiment id to its default
            parameters, raising ``KeyError`` for unknown ids.
        seed_override: ``--seed`` value, replacing the file's seed.
        output_override: ``QSTRUCT_OUTPUT_DIR`` value, replacing ``output_dir``.
    """
    if "experiment" not in entries or not isinstance(entries["experiment"], str):
        raise ConfigError("missing text key 'experiment'")
    exp = entries["experiment"]
    try:
        defaults = defaults_for(exp)
    except KeyError:
        raise ConfigError(f"unknown experiment {exp!r}") from None
    seed = entries.get("seed") if seed_override is None else seed_override
    if seed is None:
        raise ConfigError("missing integer key 'seed'")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    out_dir = entries.get("output_dir", DEFAULT_OUTPUT_DIR)
    if not isinstance(out_dir, str):
        raise ConfigError("output_dir must be text")
    if output_override:
        out_dir = output_override
    params = dict(defaults)
    for key, value in entries.items():
        if key in RESERVED:
            continue
        if key not in defaults:
            raise ConfigError(f"unknown parameter {key!r} for {exp}")
        params[key] = _coerce(key, value, defaults[key])
    return ExperimentConfig(exp, params, int(seed), out_dir)


def load_config(path, defaults_for, seed_override=None, output_override=None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_config(parse_config_text(text), defaults_for, seed_override, output_override)
