"""Report files: one JSON document, one CSV per sweep and a text summary."""

from __future__ import annotations

import csv
import json
import os
import re

from .results import SweepReport
from .suite import RunReport

REPORT_JSON = "report.json"
SUMMARY_TXT = "summary.txt"
SWEEP_DIR = "sweeps"
CSV_HEADER = ("param", "lhs", "rhs", "gap", "verdict")


def _g12(v) -> str:
    return "" if v is None else f"{v:.12g}"


def report_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def load_report(path) -> RunReport:
    with open(path, encoding="utf-8") as fh:
        return RunReport.from_dict(json.load(fh))


def csv_name(entry_id: str) -> str:
    """File-system safe name of a sweep's CSV, derived from its id."""
    return re.sub(r"[^A-Za-z0-9_.=+-]+", "_", entry_id.replace("/", "__")) + ".csv"


def sweep_csv(sweep: SweepReport) -> str:
    lines = [",".join(CSV_HEADER)]
    for v, r in zip(sweep.values, sweep.results):
        lines.append(",".join((_g12(v), _g12(r.lhs), _g12(r.rhs), _g12(r.gap), r.verdict)))
    return "\n".join(lines) + "\n"


def summary_text(report: RunReport) -> str:
    counts = report.counts()
    rows = [("id", "verdict", "gap", "tolerance")]
    for e in report.entries:
        r = e.result
        if isinstance(r, SweepReport):
            worst = [c for c in r.results + r.limits if c.verdict == r.verdict] or r.results
            gap, tol = worst[0].gap, worst[0].tolerance
        else:
            gap, tol = r.gap, r.tolerance
        rows.append((e.id, e.verdict, "-" if gap is None else f"{gap:.4g}", f"{tol:.3g}"))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    body = "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)
    head = (
        f"fisherinfo {report.version}: overall {report.verdict.upper()} "
        f"({counts['pass']} pass, {counts['fail']} fail, {counts['degenerate']} degenerate)"
    )
    return f"{head}\n\n{body}\n"


def emit_report(report: RunReport, directory) -> dict:
    """Write ``report.json``, ``summary.txt`` and ``sweeps/<id>.csv``; returns the paths written.

    Raises ``OSError`` when the directory cannot be written.
    """
    os.makedirs(directory, exist_ok=True)
    written = {"json": os.path.join(directory, REPORT_JSON), "summary": os.path.join(directory, SUMMARY_TXT)}
    with open(written["json"], "w", encoding="utf-8") as fh:
        fh.write(report_json(report))
    with open(written["summary"], "w", encoding="utf-8") as fh:
        fh.write(summary_text(report))
    sweeps = [e for e in report.entries if isinstance(e.result, SweepReport)]
    paths = []
    if sweeps:
        sweep_dir = os.path.join(directory, SWEEP_DIR)
        os.makedirs(sweep_dir, exist_ok=True)
        for e in sweeps:
            path = os.path.join(sweep_dir, csv_name(e.id))
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(sweep_csv(e.result))
            paths.append(path)
    written["sweeps"] = paths
    return written


def read_sweep_csv(path) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
