"""CSV and JSON renderings of a run bundle.

Every numeric cell is written as a decimal string with 17 significant
digits, so both renderings carry the same values bit for bit and reruns
are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .runner import RunBundle
from .scenario import SCHEMA_VERSION

TABLE_COLUMNS: dict[str, list[str]] = {
    "experiments": ["scenario_id", "experiment", "status", "message"],
    "solve": ["scenario_id", "theta", "r", "j", "re", "im", "abs"],
    "norms": ["scenario_id", "target", "space", "params", "value", "residual"],
    "bounds": ["scenario_id", "bound_id", "theta", "r", "lhs", "rhs", "margin", "pass"],
    "bound_status": ["scenario_id", "bound_id", "theta", "status", "margin_min", "n_points"],
    "conditions": ["scenario_id", "mode", "threshold", "item", "exponent", "value", "passed"],
    "volterra": ["scenario_id", "quantity", "index", "r", "value"],
    "scan": ["scenario_id", "r_max", "value", "slope", "classification"],
}


def format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def bundle_tables(bundle: RunBundle) -> dict[str, list[list[str]]]:
    """Formatted rows of every table, in a fixed order."""
    tables = {name: [] for name in TABLE_COLUMNS}
    for res in bundle.results:
        tables["experiments"].append(
            [format_cell(x) for x in (bundle.scenario_id, res.key, res.status, res.message)]
        )
        for name, rows in res.rows.items():
            cols = TABLE_COLUMNS[name]
            tables[name].extend([format_cell(row[c]) for c in cols] for row in rows)
    return tables


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return format(f, ".17g") if not math.isfinite(f) else f
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def render_csv(bundle: RunBundle) -> dict[str, str]:
    out = {}
    for name, rows in bundle_tables(bundle).items():
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS[name])
        w.writerows(rows)
        out[f"{name}.csv"] = buf.getvalue()
    return out


def render_json(bundle: RunBundle) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario_id": bundle.scenario_id,
        "scenario": bundle.scenario,
        "experiments": [
            {"key": r.key, "type": r.type, "status": r.status, "message": r.message,
             "details": _jsonable(r.details)}
            for r in bundle.results
        ],
        "tables": {
            name: {"columns": TABLE_COLUMNS[name], "rows": rows}
            for name, rows in bundle_tables(bundle).items()
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit_report(bundle: RunBundle, out_dir, fmt: str = "csv") -> list[Path]:
    """Write ``<table>.csv`` files and/or ``report.json`` into ``out_dir``."""
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"unknown report format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        for fname, text in render_csv(bundle).items():
            p = out / fname
            p.write_text(text)
            written.append(p)
    if fmt in ("json", "both"):
        p = out / "report.json"
        p.write_text(render_json(bundle))
        written.append(p)
    return written
