"""Per-replicate records, estimates with error bars, and persistence.

Records carry one row per (parameter point, replicate) in a fixed schema
shared by every experiment; unused columns stay empty.  Writers emit CSV or
JSON lines with 17-significant-digit floats so a round trip reproduces every
value bit-exactly.  Files are written atomically (temp file plus rename).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .errors import EmptyAggregation

__all__ = [
    "Record",
    "Estimate",
    "mean_estimate",
    "proportion_estimate",
    "aggregate",
    "write_records",
    "read_records",
    "write_table",
    "atomic_write_text",
]

_Z95 = 1.959963984540054


@dataclass
class Record:
    """One replicate of one experiment at one parameter point."""

    experiment: str
    d: int
    L: int
    topology: str
    bc: str
    kind: str = ""
    p: Optional[float] = None
    K: Optional[float] = None
    replicate: int = 0
    seed: int = 0
    exact: bool = True
    R2: Optional[float] = None
    droplet_size: Optional[int] = None
    boundary_size: Optional[int] = None
    delta: Optional[float] = None
    ratio: Optional[float] = None
    size_ok: Optional[bool] = None
    bound_ok: Optional[bool] = None
    Dsize: Optional[int] = None
    DboundarySize: Optional[int] = None
    event: Optional[bool] = None
    r: Optional[int] = None
    energy0: Optional[float] = None
    energy1: Optional[float] = None
    walltime_ms: Optional[float] = None


_COLUMNS = [f.name for f in fields(Record)]
_INT_COLUMNS = {"d", "L", "replicate", "seed", "droplet_size", "boundary_size",
                "Dsize", "DboundarySize", "r"}
_BOOL_COLUMNS = {"exact", "size_ok", "bound_ok", "event"}
_STR_COLUMNS = {"experiment", "topology", "bc", "kind"}


@dataclass(frozen=True)
class Estimate:
    """Point estimate with a standard error and a 95% interval.

    Means carry a normal interval; probabilities a Wilson interval.  A
    single observation reports stderr 0 with n = 1.
    """

    mean: float
    stderr: float
    n: int
    lo95: float
    hi95: float


def mean_estimate(values) -> Estimate:
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise EmptyAggregation("no values to aggregate")
    m = float(values.mean())
    if values.size == 1:
        return Estimate(m, 0.0, 1, m, m)
    se = float(values.std(ddof=1) / math.sqrt(values.size))
    return Estimate(m, se, int(values.size), m - _Z95 * se, m + _Z95 * se)


def proportion_estimate(successes: int, n: int) -> Estimate:
    """Wilson 95% interval for a binomial proportion."""
    if n <= 0:
        raise EmptyAggregation("no trials to aggregate")
    phat = successes / n
    se = math.sqrt(phat * (1.0 - phat) / n)
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2 * n)) / denom
    half = _Z95 * math.sqrt(phat * (1.0 - phat) / n + z2 / (4 * n * n)) / denom
    # The Wilson interval contains phat mathematically; keep that true under
    # floating-point rounding as well.
    lo = min(max(0.0, center - half), phat)
    hi = max(min(1.0, center + half), phat)
    return Estimate(phat, se, int(n), lo, hi)


def aggregate(values, kind: str = "mean") -> Estimate:
    """Aggregate raw values into an estimate.

    ``kind`` is "mean" for real-valued observables or "proportion" for 0/1
    event indicators (Wilson interval).
    """
    if kind == "mean":
        return mean_estimate(values)
    if kind == "proportion":
        vals = [int(bool(v)) for v in values]
        if not vals:
            raise EmptyAggregation("no values to aggregate")
        return proportion_estimate(sum(vals), len(vals))
    raise ValueError(f"unknown aggregation kind {kind!r}")


# -- formatting ---------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return f"{float(value):.17g}"
    return str(value)


def _parse(column: str, text: str):
    if text == "":
        return None
    if column in _STR_COLUMNS:
        return text
    if column in _BOOL_COLUMNS:
        return text not in ("0", "false", "False")
    if column in _INT_COLUMNS:
        return int(text)
    return float(text)


def atomic_write_text(path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a
    partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records(records, path, fmt: str = "csv") -> None:
    """Persist records as CSV (header row) or JSON lines."""
    if fmt == "csv":
        lines = [",".join(_COLUMNS)]
        for rec in records:
            lines.append(",".join(_fmt(getattr(rec, c)) for c in _COLUMNS))
        atomic_write_text(path, "\n".join(lines) + "\n")
    elif fmt == "jsonl":
        lines = []
        for rec in records:
            row = {}
            for c in _COLUMNS:
                v = getattr(rec, c)
                if isinstance(v, (np.bool_,)):
                    v = bool(v)
                if isinstance(v, (np.floating,)):
                    v = float(v)
                if isinstance(v, (np.integer,)):
                    v = int(v)
                if isinstance(v, float) and math.isnan(v):
                    v = None
                row[c] = v
            lines.append(json.dumps(row))
        atomic_write_text(path, "\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_records(path, fmt: str | None = None) -> list[Record]:
    path = os.fspath(path)
    if fmt is None:
        fmt = "jsonl" if path.endswith(".jsonl") else "csv"
    out: list[Record] = []
    with open(path, "r", encoding="utf-8") as fh:
        if fmt == "csv":
            header = fh.readline().rstrip("\n").split(",")
            if header != _COLUMNS:
                raise ValueError(f"{path}: unexpected header")
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split(",")
                kwargs = {c: _parse(c, t) for c, t in zip(_COLUMNS, parts)}
                kwargs = {k: ("" if v is None and k in _STR_COLUMNS else v)
                          for k, v in kwargs.items()}
                out.append(Record(**kwargs))
        else:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                out.append(Record(**json.loads(line)))
    return out


def write_table(rows, path) -> None:
    """Write aggregate rows (list of dicts sharing keys) as a plain CSV.

    One row per parameter point; columns in the order of the first row.
    Suitable for gnuplot and friends.
    """
    rows = list(rows)
    if not rows:
        atomic_write_text(path, "\n")
        return
    columns = list(rows[0].keys())
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")
