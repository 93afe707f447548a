"""Per-iteration trace rows and their CSV form."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Tuple

FLUSH_EVERY = 1000


@dataclass(frozen=True)
class TraceRecord:
    t: int
    obj_est: float
    obj_avg: float
    h: Tuple[float, ...]
    h_avg: Tuple[float, ...]
    lambda_norm: float
    eta: float
    upsilon: float


def header(n_constraints: int) -> List[str]:
    hs = [f"h{i + 1}" for i in range(n_constraints)]
    return ["t", "obj_est", "obj_avg", *hs, *(f"{h}_avg" for h in hs),
            "lambda_norm", "eta", "upsilon"]


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def to_row(r: TraceRecord) -> List[str]:
    return [str(r.t), fmt(r.obj_est), fmt(r.obj_avg), *map(fmt, r.h), *map(fmt, r.h_avg),
            fmt(r.lambda_norm), fmt(r.eta), fmt(r.upsilon)]


class TraceWriter:
    """Streams records to CSV, flushing every ``FLUSH_EVERY`` rows so an aborted
    run leaves a readable partial trace."""

    def __init__(self, path, n_constraints):
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(header(n_constraints))
        self.rows = 0

    def __call__(self, record: TraceRecord):
        self._w.writerow(to_row(record))
        self.rows += 1
        if self.rows % FLUSH_EVERY == 0:
            self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_trace(path, records, n_constraints):
    with TraceWriter(path, n_constraints) as w:
        for r in records:
            w(r)


def read_trace(path) -> List[TraceRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    cols = rows[0]
    n = (len(cols) - 6) // 2
    if cols != header(n):
        raise ValueError(f"{path}: unexpected columns {cols}")
    out = []
    for row in rows[1:]:
        v = [float(a) for a in row]
        out.append(TraceRecord(int(row[0]), v[1], v[2], tuple(v[3:3 + n]),
                               tuple(v[3 + n:3 + 2 * n]), v[3 + 2 * n], v[4 + 2 * n], v[5 + 2 * n]))
    return out
