"""CSV and JSON export with byte-stable formatting."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .metrics import PSD_KEYS, MetricsReport

TASK_COLUMNS = ("id", "src", "dst", "arrival", "offload_finish", "start", "completion",
                "deadline", "met")


class ExportError(OSError):
    pass


def fmt(x) -> str:
    """Shortest round-tripping text for a number; blank for missing."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else ("inf" if math.isinf(x) else x)
    return obj


def _rows_to_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def metrics_csv(report: MetricsReport) -> str:
    rows = [(s, fmt(report.max_dod[s]), fmt(report.avg_dod[s]), fmt(report.lifetime_years[s]),
             fmt(bool(report.lifetime_degenerate[s]))) for s in range(report.max_dod.size)]
    return _rows_to_text(("sat", "max_dod", "avg_dod", "lifetime_years", "lifetime_degenerate"), rows)


def tasks_csv(report: MetricsReport) -> str:
    rows = [(r.id, r.src, r.dst, r.arrival, fmt(r.offload_finish), fmt(r.start), fmt(r.completion),
             r.deadline, fmt(r.met)) for r in report.tasks]
    return _rows_to_text(TASK_COLUMNS, rows)


def dod_trace_csv(dod: np.ndarray) -> str:
    header = ["slot"] + [f"sat_{s}" for s in range(dod.shape[1])]
    rows = ([t] + [f"{v:.9g}" for v in row] for t, row in enumerate(dod))
    return _rows_to_text(header, rows)


def summary_json(report: MetricsReport, extra: dict | None = None) -> str:
    doc = report.summary()
    doc["psd_percent"] = {k: doc["psd_percent"][k] for k in PSD_KEYS}
    if extra:
        doc.update(extra)
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from exc


def export(report: MetricsReport, dod: np.ndarray, path, extra: dict | None = None) -> list[Path]:
    """Write metrics.csv, tasks.csv, dod_trace.csv and summary.json under ``path``."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create {out}: {exc.strerror or exc}") from exc
    files = {
        "metrics.csv": metrics_csv(report),
        "tasks.csv": tasks_csv(report),
        "dod_trace.csv": dod_trace_csv(dod),
        "summary.json": summary_json(report, extra),
    }
    for name, text in files.items():
        _write(out / name, text)
    return [out / name for name in files]


def read_miss_rate(tasks_csv_path) -> float:
    """Deadline-miss rate recomputed from an exported tasks.csv."""
    with open(tasks_csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return 0.0
    return sum(r["met"] == "0" for r in rows) / len(rows)
