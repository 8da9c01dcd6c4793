"""Check records, reports and their JSON serialization.

A report is a JSON document

``{"meta": {...}, "checks": [CheckRecord, ...], "summary": {"pass": n, "fail": m}}``

written with sorted keys so that two runs with the same inputs produce
byte-identical files once the timing fields are removed
(:func:`strip_timing`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .representation import ChainConfig, config_from_json, config_to_json

__all__ = [
    "SCHEMA_VERSION", "CheckRecord", "build_report", "report_to_json", "save_report",
    "strip_timing", "load_config", "save_config", "summarize",
]

SCHEMA_VERSION = 1


def _jsonable(x):
    """Context values as JSON: complex numbers become ``"re,im"`` strings."""
    if isinstance(x, complex):
        return f"{x.real!r},{x.imag!r}"
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):          # numpy scalars
        return _jsonable(x.item())
    if hasattr(x, "tolist"):        # numpy arrays
        return _jsonable(x.tolist())
    return x


@dataclass
class CheckRecord:
    """Outcome of one numerical check.

    ``passed`` is ``residual <= tolerance``; a non-finite residual never passes
    and is serialized as ``null``.
    """

    id: str
    residual: float
    tolerance: float
    wall_time_ms: int = 0
    context: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "residual": float(self.residual) if math.isfinite(self.residual) else None,
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "wall_time_ms": int(self.wall_time_ms),
            "context": _jsonable(self.context),
        }


def build_report(records, meta: dict) -> dict:
    checks = [r.to_dict() for r in records]
    n_pass = sum(c["pass"] for c in checks)
    return {
        "meta": dict(meta, schema_version=SCHEMA_VERSION),
        "checks": checks,
        "summary": {"pass": n_pass, "fail": len(checks) - n_pass},
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def save_report(records, path, meta: dict) -> dict:
    """Write the report for ``records`` to ``path`` and return it."""
    report = build_report(records, meta)
    Path(path).write_text(report_to_json(report))
    return report


def strip_timing(report: dict) -> dict:
    """Copy of ``report`` without wall-clock fields (for determinism comparisons)."""
    out = json.loads(json.dumps(report))
    for c in out["checks"]:
        c.pop("wall_time_ms", None)
    out["meta"].pop("wall_time_ms", None)
    return out


def load_config(path) -> ChainConfig:
    """Read a configuration file (see :func:`~tau2sov.representation.config_from_json`)."""
    return config_from_json(Path(path).read_text())


def save_config(cfg: ChainConfig, path) -> None:
    Path(path).write_text(config_to_json(cfg))


def summarize(records) -> Optional[str]:
    """One line per check: ``PASS/FAIL id residual <= tolerance``."""
    lines = []
    for r in records:
        tag = "PASS" if r.passed else "FAIL"
        lines.append(f"{tag} {r.id:<34s} {r.residual:10.3e} <= {r.tolerance:.1e}")
    return "\n".join(lines)
