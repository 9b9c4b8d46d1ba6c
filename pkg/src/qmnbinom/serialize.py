"""Rendering of scalars, reports and trajectories as CSV, JSON or text tables."""
from __future__ import annotations

import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction
from typing import Iterable, Sequence

from .identities import CheckRecord, Report
from .processes import TrajectorySummary
from .qseries import Backend, DeformParams, to_scalar

FORMATS = ("table", "csv", "json")


def format_scalar(value) -> str:
    """``"p/q"`` for exact values, ``repr`` (shortest round-trip) for floats."""
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_scalar(text: str, backend: Backend | str = Backend.EXACT):
    return to_scalar(text, backend)


def _json_scalar(value):
    if isinstance(value, Fraction):
        return str(value)
    return value


def params_dict(params: DeformParams) -> dict:
    return {"q": _json_scalar(params.q), "mu": _json_scalar(params.mu), "nu": _json_scalar(params.nu)}


def record_dict(record: CheckRecord) -> dict:
    return {
        "check_name": record.check_name,
        "params": params_dict(record.params),
        "indices": list(record.indices),
        "lhs": _json_scalar(record.lhs),
        "rhs": _json_scalar(record.rhs),
        "equal": record.equal,
        "tolerance": record.tolerance,
        "note": record.note,
    }


def render_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def render_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    rows = [list(map(str, r)) for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def render_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


PMF_HEADER = ("j", "weight", "cumulative")


def pmf_rows(weights: Sequence) -> list[tuple[str, str, str]]:
    rows = []
    total = None
    for j, w in enumerate(weights):
        total = w if total is None else total + w
        rows.append((str(j), format_scalar(w), format_scalar(total)))
    return rows


def render_pmf(weights: Sequence, fmt: str) -> str:
    rows = pmf_rows(weights)
    if fmt == "csv":
        return render_csv(PMF_HEADER, rows)
    if fmt == "json":
        return render_json([{"j": int(j), "weight": w, "cumulative": c} for j, w, c in rows])
    return render_table(PMF_HEADER, rows)


REPORT_HEADER = ("check_name", "q", "mu", "nu", "indices", "lhs", "rhs", "equal", "tolerance", "note")


def render_report(report: Report, fmt: str) -> str:
    if fmt == "json":
        return render_json([record_dict(r) for r in report])
    if fmt == "csv":
        rows = [
            (
                r.check_name,
                format_scalar(r.params.q),
                format_scalar(r.params.mu),
                format_scalar(r.params.nu),
                ";".join(map(str, r.indices)),
                format_scalar(r.lhs),
                format_scalar(r.rhs),
                "true" if r.equal else "false",
                repr(float(r.tolerance)),
                r.note,
            )
            for r in report
        ]
        return render_csv(REPORT_HEADER, rows)
    rows = []
    for name, records in report.by_check().items():
        failed = sum(not r.equal for r in records)
        rows.append((name, len(records), failed, "PASS" if not failed else "FAIL"))
    text = render_table(("check", "records", "failures", "status"), rows)
    first = report.first_violation
    if first is not None:
        text += f"first violation: {first.check_name} at {first.params}, indices={first.indices}\n"
    return text


TRAJECTORY_HEADER = ("time", "current", "mean_displacement", "occupancy_histogram")


def render_trajectory(summary: TrajectorySummary, fmt: str) -> str:
    if fmt == "json":
        return render_json(
            [
                {
                    "time": r.time,
                    "current": r.current,
                    "mean_displacement": r.mean_displacement,
                    "occupancy_histogram": list(r.occupancy_histogram),
                }
                for r in summary.records
            ]
        )
    rows = [
        (
            str(r.time),
            repr(r.current),
            repr(r.mean_displacement),
            ";".join(repr(h) for h in r.occupancy_histogram),
        )
        for r in summary.records
    ]
    if fmt == "csv":
        return render_csv(TRAJECTORY_HEADER, rows)
    return render_table(TRAJECTORY_HEADER, rows)


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    reader = csv.reader(io.StringIO(text))
    header, *rows = list(reader)
    return header, rows


def write_output(text: str, path: str | None, stream=None) -> None:
    """Write ``text`` to ``path`` atomically (temp file then rename), or to ``stream``."""
    if path is None or path == "-":
        (stream or sys.stdout).write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

