"""Structured reports and deterministic CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

SCHEMA_VERSION = 1


def fmt(x) -> str:
    """17 significant digits for floats; ints and strings pass through."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        return f"{x:.17g}"
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    try:
        return f"{float(x):.17g}"
    except (TypeError, ValueError):
        return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, complex):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    try:
        v = float(x)
    except (TypeError, ValueError):
        return str(x)
    if math.isinf(v) or math.isnan(v):
        return fmt(v)
    # round-trips through float() exactly
    return float(fmt(v))


@dataclass
class Report:
    operation: str
    parameters: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    verdict: str = "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "operation": self.operation,
            "parameters": _jsonable(self.parameters),
            "rows": _jsonable(self.rows),
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows))
    return path


def point_columns(d: int) -> List[str]:
    cols = []
    for j in range(1, d + 1):
        suffix = "" if d == 1 else str(j)
        cols += [f"x{suffix}_re", f"x{suffix}_im"]
    return cols


def point_values(z) -> List[float]:
    out = []
    for c in z:
        out += [float(c.real), float(c.imag)]
    return out
