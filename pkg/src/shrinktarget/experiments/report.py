"""Uniform report container shared by every experiment, with JSON and CSV forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from ..exact import fmt_fraction

# verdict vocabulary; FAIL means a certified inequality was violated
PASS, FAIL, UNRESOLVED = "pass", "fail", "unresolved"
COMPLETED = "completed"
ETA_REACHED, NOT_REACHED = "eta-reached", "not-reached"
REDIRECT = "redirect-case1"
SKIPPED = "skipped"

_SAFE_INT = 1 << 53


def jsonable(x: Any) -> Any:
    """Exact rationals become ``num/den`` strings; huge integers become decimal strings."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return fmt_fraction(x)
    if isinstance(x, int):
        return x if abs(x) < _SAFE_INT else str(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "item"):  # numpy scalars
        return jsonable(x.item())
    return str(x)


@dataclass
class Report:
    op: str
    alpha: str | None
    params: dict
    checkpoints: list[dict]
    verdict: str
    summary: dict = field(default_factory=dict)
    columns: list[str] | None = None

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL

    def as_dict(self) -> dict:
        return {
            "op": self.op,
            "alpha": self.alpha,
            "params": jsonable(self.params),
            "checkpoints": jsonable(self.checkpoints),
            "verdict": self.verdict,
            "summary": jsonable(self.summary),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False) + "\n"

    def csv_columns(self) -> list[str]:
        if self.columns is not None:
            return list(self.columns)
        cols: list[str] = []
        for row in self.checkpoints:
            for k in row:
                if k not in cols:
                    cols.append(k)
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = self.csv_columns()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.checkpoints:
            w.writerow([_csv_cell(jsonable(row.get(c))) for c in cols])
        return buf.getvalue()


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)
