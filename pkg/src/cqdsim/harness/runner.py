"""Seeded batches of sessions, aggregate reports and parameter sweeps.

Round ``i`` of a run draws from ``PCG64(round_seed(master_seed, i))`` where
``round_seed`` is two splitmix64 finalizer steps (see :func:`splitmix64`).
Rounds are independent, so adding rounds never changes earlier ones.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..protocols.common import ERASED, SessionResult
from ..protocols.dispatch import run_protocol
from .config import SWEEP_AXES, RunSpec, replace_axis
from ..errors import ConfigError

MASK64 = (1 << 64) - 1
CSV_COLUMNS = ("round", "aborted", "abort_reason", "qber_link1", "qber_link2", "qber_link3",
               "detect_rate", "alice_err", "bob_err")
AGGREGATE_KEYS = ("abort_rate", "mean_qber_link1", "mean_qber_link2", "mean_qber_link3",
                  "detect_rate", "alice_error_rate", "bob_error_rate")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def round_seed(master_seed: int, index: int) -> int:
    return splitmix64((splitmix64(master_seed & MASK64) + index) & MASK64)


def round_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(round_seed(master_seed, index)))


def error_rate(decoded: str, expected: str) -> float | None:
    """Mismatches over positions that carry a decision; erasures are skipped."""
    if not expected or len(decoded) != len(expected):
        return None
    decided = [(d, e) for d, e in zip(decoded, expected) if d != ERASED]
    if not decided:
        return None
    return sum(d != e for d, e in decided) / len(decided)


def row_from_result(index: int, res: SessionResult) -> dict[str, Any]:
    q = res.qber_per_link
    transcript = res.transcript.to_json()
    return {
        "round": index,
        "aborted": res.aborted,
        "abort_reason": res.reason or "",
        "qber_link1": q.get("link1"),
        "qber_link2": q.get("link2"),
        "qber_link3": q.get("link3"),
        "detect_rate": res.detect_rate,
        "alice_err": None if res.aborted else error_rate(res.alice_decoded, res.alice_expected),
        "bob_err": None if res.aborted else error_rate(res.bob_decoded, res.bob_expected),
        "qber_per_link": dict(sorted(q.items())),
        "alice_decoded": res.alice_decoded,
        "bob_decoded": res.bob_decoded,
        "alice_expected": res.alice_expected,
        "bob_expected": res.bob_expected,
        "counts": res.counts.to_dict(),
        "transcript_sha256": hashlib.sha256(transcript.encode()).hexdigest(),
    }


def _mean(values: Sequence[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return math.fsum(vals) / len(vals) if vals else None


def aggregate(rows: Sequence[dict[str, Any]]) -> dict[str, Any]:
    """Aggregates that depend only on the CSV columns of ``rows``."""
    n = len(rows)
    return {
        "rounds": n,
        "abort_rate": sum(bool(r["aborted"]) for r in rows) / n if n else None,
        "mean_qber_link1": _mean([r["qber_link1"] for r in rows]),
        "mean_qber_link2": _mean([r["qber_link2"] for r in rows]),
        "mean_qber_link3": _mean([r["qber_link3"] for r in rows]),
        "detect_rate": _mean([r["detect_rate"] for r in rows]),
        "alice_error_rate": _mean([r["alice_err"] for r in rows]),
        "bob_error_rate": _mean([r["bob_err"] for r in rows]),
    }


def aggregate_full(rows: Sequence[dict[str, Any]]) -> dict[str, Any]:
    agg = aggregate(rows)
    links = sorted({k for r in rows for k in r["qber_per_link"]}, key=lambda s: int(s[4:]))
    agg["mean_qber_per_link"] = {k: _mean([r["qber_per_link"].get(k) for r in rows]) for k in links}
    agg["decoy_consumption"] = _mean([float(r["counts"]["decoys_checked"]) for r in rows])
    return agg


def audit(report: dict[str, Any]) -> bool:
    """True when every stored aggregate equals its recomputation from the rows."""
    return aggregate_full(report["rows"]) == report["aggregates"]


@dataclass
class RunReport:
    spec: RunSpec
    rows: list[dict[str, Any]]
    results: list[SessionResult] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        out = {"spec": self.spec.to_dict(), "rows": self.rows, "aggregates": aggregate_full(self.rows)}
        out["self_audit"] = audit(out)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)

    @property
    def any_aborted(self) -> bool:
        return any(r["aborted"] for r in self.rows)


def run_spec(spec: RunSpec, keep_results: bool = False) -> RunReport:
    rows, results = [], []
    for i in range(spec.rounds):
        rng = round_rng(spec.master_seed, i)
        cfg = spec.session_config(rng)
        res = run_protocol(cfg, rng)
        rows.append(row_from_result(i, res))
        if keep_results:
            results.append(res)
    return RunReport(spec, rows, results)


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict[str, Any]]:
    """Inverse of :func:`rows_to_csv`."""
    rows = []
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    for rec in reader:
        row: dict[str, Any] = {"round": int(rec["round"]), "aborted": rec["aborted"] == "1",
                               "abort_reason": rec["abort_reason"]}
        for c in CSV_COLUMNS[3:]:
            row[c] = float(rec[c]) if rec[c] != "" else None
        rows.append(row)
    return rows


@dataclass
class SweepResult:
    axis: str
    values: list[float]
    aggregates: list[dict[str, Any]]

    def monotonic(self) -> dict[str, str]:
        """Per aggregate column: 'increasing', 'decreasing', 'constant' or 'no'."""
        flags = {}
        for key in AGGREGATE_KEYS:
            col = [a[key] for a in self.aggregates]
            if any(v is None for v in col) or len(col) < 2:
                flags[key] = "no"
                continue
            inc = all(x <= y for x, y in zip(col, col[1:]))
            dec = all(x >= y for x, y in zip(col, col[1:]))
            flags[key] = "constant" if inc and dec else "increasing" if inc else "decreasing" if dec else "no"
        return flags

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow((self.axis,) + AGGREGATE_KEYS)
        for v, agg in zip(self.values, self.aggregates):
            w.writerow([_fmt(float(v))] + [_fmt(agg[k]) for k in AGGREGATE_KEYS])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {"axis": self.axis, "values": list(self.values), "aggregates": self.aggregates,
                "monotonic": self.monotonic()}


def run_sweep(spec: RunSpec, axis: str, values: Sequence[float]) -> SweepResult:
    if axis not in SWEEP_AXES:
        raise ConfigError("--axis", f"unknown axis {axis!r} (expected one of {', '.join(SWEEP_AXES)})")
    if not values:
        raise ConfigError("--values", "needs at least one value")
    aggs = [aggregate(run_spec(replace_axis(spec, axis, float(v))).rows) for v in values]
    return SweepResult(axis, [float(v) for v in values], aggs)
