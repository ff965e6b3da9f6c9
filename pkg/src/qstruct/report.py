"""Experiment reports and their frozen JSON/CSV renderings.

JSON schema (keys always in this order)::

    {"experimentId": str, "seed": int, "config": {param: value, ...},
     "metrics": {name: real, ...}, "passFlags": {name: bool, ...},
     "artifactPaths": [str, ...]}

Parameters, metrics and flags keep their insertion order. Reals use 17
significant digits (``format(x, ".17g")``), so parsing recovers them exactly;
non-finite reals are written as ``null``.

CSV schema: header ``metric,value`` followed by one row per metric.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ExperimentReport:
    experiment_id: str
    seed: int
    config_echo: dict
    metrics: dict = field(default_factory=dict)
    pass_flags: dict = field(default_factory=dict)
    artifact_paths: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.pass_flags.values())


def _real(x: float) -> str:
    return format(float(x), ".17g") if math.isfinite(x) else "null"


def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _real(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return _object(v)
    if hasattr(v, "item"):  # numpy scalar
        return _value(v.item())
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _object(d: dict, indent: str = "") -> str:
    if not d:
        return "{}"
    inner = indent + "  "
    body = ",\n".join(f"{inner}{json.dumps(str(k))}: {_value(v)}" for k, v in d.items())
    return "{\n" + body + "\n" + indent + "}"


def render_json(report: ExperimentReport) -> str:
    parts = [
        ("experimentId", json.dumps(report.experiment_id)),
        ("seed", str(int(report.seed))),
        ("config", _object(report.config_echo, "  ")),
        ("metrics", _object({k: float(v) for k, v in report.metrics.items()}, "  ")),
        ("passFlags", _object({k: bool(v) for k, v in report.pass_flags.items()}, "  ")),
        ("artifactPaths", _value(list(report.artifact_paths))),
    ]
    return "{\n" + ",\n".join(f'  "{k}": {v}' for k, v in parts) + "\n}\n"


def render_csv(report: ExperimentReport) -> str:
    lines = ["metric,value"]
    lines += [f"{name},{_real(v) if math.isfinite(float(v)) else 'nan'}" for name, v in report.metrics.items()]
    return "\n".join(lines) + "\n"


def emit_report(report: ExperimentReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return render_json(report).encode()
    if fmt == "csv":
        return render_csv(report).encode()
    raise ValueError(f"unknown format {fmt!r}")


def render_series(columns: dict) -> str:
    """Plot-ready CSV: one column per series, one row per sample."""
    names = list(columns)
    rows = zip(*(columns[n] for n in names))
    return "\n".join([",".join(names)] + [",".join(_real(v) for v in r) for r in rows]) + "\n"


def write_atomic(path, data: bytes) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
