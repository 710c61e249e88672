"""Result rows, pass/fail checks and atomic file output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence


@dataclass(frozen=True)
class Check:
    """One reproduced scalar compared with its target.

    ``tol`` is absolute unless ``relative`` is set; ``kind`` selects the
    comparison: "abs" (|computed - target| <= tol), "min" (computed >= target),
    "max" (computed <= target), "ratio" (max(c/t, t/c) <= tol) or "bool".
    """

    criterion: str
    target: float
    computed: float
    tol: float
    anchor: str
    kind: str = "abs"

    @property
    def passed(self) -> bool:
        c, t = self.computed, self.target
        if not math.isfinite(c):
            return False
        if self.kind == "abs":
            return abs(c - t) <= self.tol
        if self.kind == "min":
            return c >= t - self.tol
        if self.kind == "max":
            return c <= t + self.tol
        if self.kind == "ratio":
            return c > 0 and max(c / t, t / c) <= self.tol
        if self.kind == "bool":
            return bool(c) == bool(t)
        raise ValueError(f"unknown check kind {self.kind!r}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["target"], d["computed"], d["tol"] = float(self.target), float(self.computed), float(self.tol)
        d["pass"] = bool(self.passed)
        return d

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.criterion}: computed={self.computed:.10g} target={self.target:.10g} tol={self.tol:g} ({self.kind})"


@dataclass
class Table:
    columns: Sequence[str]
    rows: list[Sequence] = field(default_factory=list)
    anchor: str = ""

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, expected {len(self.columns)}")
        for v in values:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"non-finite value in row {values}")
        self.rows.append(values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.columns, "anchor"])
        for row in self.rows:
            w.writerow([_fmt(v) for v in row] + [self.anchor])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int,)) or (hasattr(v, "dtype") and v.dtype.kind in "iu"):
        return str(int(v))
    return f"{float(v):.17g}"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def summary_json(checks: Sequence[Check], notes: dict | None = None) -> str:
    doc = {"checks": [c.as_dict() for c in checks]}
    if notes:
        doc["notes"] = notes
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
