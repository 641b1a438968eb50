"""Report emission: deterministic report.json, plot-ready report.csv, witness dumps.

report.json carries the full machine-readable payload and must be byte
identical across reruns of the same config and master seed, so wall-clock
timing lives only in the CSV.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

CSV_COLUMNS = ["seed_id", "explainer", "region", "solver", "headline", "cov",
               "evaluations", "wall_time_ms", "censored", "feasible", "error"]


def sanitize(obj):
    """numpy scalars/arrays to plain Python; non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def dump_json(payload: dict, path: Path):
    text = json.dumps(sanitize(payload), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if not math.isfinite(value) else repr(value)
    return value


def write_report_csv(rows: list[dict], path: Path, columns: list[str] | None = None):
    columns = columns or CSV_COLUMNS
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(sanitize(row.get(col))) for col in columns])


def write_report(out_dir: Path, config_echo: dict, rows: list[dict],
                 csv_rows: list[dict]) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    csv_path = out_dir / "report.csv"
    dump_json({"config": config_echo, "rows": rows}, json_path)
    write_report_csv(csv_rows, csv_path)
    return json_path, csv_path


def write_witness(out_dir: Path, seed_id, region: str, payload: dict) -> Path:
    path = Path(out_dir) / f"witness_{seed_id}_{region}.json"
    dump_json(payload, path)
    return path
