"""Deterministic JSON and CSV writers.

Floats are written with 17 significant digits so every double round-trips
exactly.  Non-finite floats become the strings ``"inf"``, ``"-inf"`` and
``"nan"``, which keeps the JSON standard-conforming.
"""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__

__all__ = ["format_float", "to_plain", "dumps", "csv_text", "metadata"]


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def to_plain(obj: Any) -> Any:
    """Convert numpy scalars/arrays, enums, tuples and complex numbers to JSON types."""
    if isinstance(obj, Enum):
        return to_plain(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, Mapping):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    return obj


def _emit(obj: Any, level: int, out: list[str]) -> None:
    pad = "  " * level
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(f"{pad}  {json.dumps(k)}: ")
            _emit(v, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list)) for v in obj):
            parts: list[str] = []
            for v in obj:
                sub: list[str] = []
                _emit(v, level + 1, sub)
                parts.append("".join(sub))
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad + "  ")
            _emit(v, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, float):
        out.append(format_float(obj))
    else:
        out.append(json.dumps(obj))


def dumps(obj: Any) -> str:
    out: list[str] = []
    _emit(to_plain(obj), 0, out)
    return "".join(out) + "\n"


def _cell(v: Any) -> str:
    v = to_plain(v)
    if isinstance(v, float):
        return format_float(v).strip('"')
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], meta: Mapping[str, Any] | None = None) -> str:
    """CSV with ``# key: value`` comment lines carrying the metadata."""
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        text = value if isinstance(value, str) else " ".join(dumps(value).split())
        buf.write(f"# {key}: {text}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def metadata(config: Mapping[str, Any], seed: int, timestamp: bool = False) -> dict[str, Any]:
    """Provenance block embedded in every artifact.

    ``wall_clock`` stays null unless requested so reruns are byte-identical.
    """
    clock = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None
    return {
        "tool": "critline",
        "version": __version__,
        "seed": int(seed),
        "wall_clock": clock,
        "config": to_plain(dict(config)),
    }
