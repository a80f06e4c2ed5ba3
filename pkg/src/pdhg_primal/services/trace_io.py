"""
Trace and audit files.

Traces are written as CSV (or .xlsx) with one row per record and floats at 17
significant digits, so a trace read back equals the one written. The run
metadata goes to a sidecar `<out>.json`, x/s snapshots (when recorded) to
`<out>.npz`.
"""

import csv
import json
import logging
import math
import os
from typing import Any, Dict, List, Sequence

import numpy as np
import openpyxl

from pdhg_primal.errors import DiagnosticsError, ManifestError
from pdhg_primal.models.certificates import AuditRow
from pdhg_primal.models.trace import BASE_COLUMNS, Trace, TraceRecord

logger = logging.getLogger(__name__)

AUDIT_COLUMNS = ["quantity", "k", "measured", "bound", "satisfied"]

# written as strings to keep the sidecar strict JSON
NON_FINITE = {"inf", "-inf", "nan"}


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _is_excel(path: str) -> bool:
    return path.lower().endswith(".xlsx")


def sidecar_path(path: str) -> str:
    return f"{path}.json"


def snapshot_path(path: str) -> str:
    return f"{path}.npz"


def write_trace(trace: Trace, path: str) -> None:
    """Write the trace, its metadata sidecar and, if recorded, its snapshots"""
    extra_columns = trace.extra_columns
    header = list(BASE_COLUMNS) + extra_columns
    rows = [record.to_row(extra_columns) for record in trace.records]

    if _is_excel(path):
        _write_workbook(path, "trace", header, rows)
    else:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([str(row[0])] + [format_float(value) for value in row[1:]])

    write_json(trace.metadata, sidecar_path(path))
    if trace.has_snapshots:
        np.savez(snapshot_path(path), k=trace.ks(), x=trace.x_series(),
                 s=np.vstack([record.s for record in trace.records]))
    logger.info("wrote %d trace records to %s", len(trace), path)


def read_trace(path: str) -> Trace:
    """Read a trace written by write_trace; the sidecar and snapshots are optional"""
    if not os.path.exists(path):
        raise ManifestError(f"file not found: {path}", "trace")
    header, rows = _read_workbook(path) if _is_excel(path) else _read_csv(path)
    missing = [name for name in BASE_COLUMNS if name not in header]
    if missing:
        raise ManifestError(f"{path} lacks columns {', '.join(missing)}", "trace")

    metadata: Dict[str, Any] = {}
    if os.path.exists(sidecar_path(path)):
        metadata = read_json(sidecar_path(path))
    trace = Trace(variant=metadata.get("variant", ""), metadata=metadata)

    for row in rows:
        values = dict(zip(header, row))
        record = TraceRecord(k=int(float(values["k"])),
                             **{attribute: float(values[column])
                                for column, attribute in BASE_COLUMNS.items() if column != "k"})
        for name in header:
            if name not in BASE_COLUMNS:
                record.extras[name] = float(values[name])
        trace.records.append(record)

    if os.path.exists(snapshot_path(path)):
        with np.load(snapshot_path(path)) as data:
            if list(data["k"]) != [record.k for record in trace.records]:
                raise DiagnosticsError(f"snapshots in {snapshot_path(path)} do not match the trace")
            for record, x, s in zip(trace.records, data["x"], data["s"]):
                record.x = np.array(x)
                record.s = np.array(s)
    return trace


def write_audit(rows: Sequence[AuditRow], path: str) -> None:
    table = [[row.quantity, row.k, row.measured, row.bound, row.satisfied] for row in rows]
    if _is_excel(path):
        _write_workbook(path, "audit", AUDIT_COLUMNS, table)
        return
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(AUDIT_COLUMNS)
        for quantity, k, measured, bound, satisfied in table:
            writer.writerow([quantity, k, format_float(measured), format_float(bound),
                             "true" if satisfied else "false"])


def read_audit(path: str) -> List[AuditRow]:
    header, rows = _read_workbook(path) if _is_excel(path) else _read_csv(path)
    if header != AUDIT_COLUMNS:
        raise ManifestError(f"{path} is not an audit file", "audit")
    audit = []
    for quantity, k, measured, bound, satisfied in rows:
        audit.append(AuditRow(quantity=str(quantity), k=int(float(k)), measured=float(measured),
                              bound=float(bound),
                              satisfied=satisfied is True or str(satisfied).lower() == "true"))
    return audit


def write_json(data: dict, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_jsonable(data), f, indent=2, ensure_ascii=False)


def read_json(path: str) -> dict:
    """Inverse of write_json: non-finite floats come back as floats"""
    with open(path, 'r', encoding='utf-8') as f:
        return _restore_floats(json.load(f))


def _restore_floats(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _restore_floats(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_restore_floats(item) for item in value]
    if isinstance(value, str) and value in NON_FINITE:
        return float(value)
    return value


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def _read_csv(path: str):
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path} is empty") from None
        return header, [row for row in reader if row]


def _write_workbook(path: str, title: str, header: List[str], rows: List[list]) -> None:
    workbook = openpyxl.Workbook()
    worksheet = workbook.active
    worksheet.title = title
    worksheet.append(header)
    for row in rows:
        worksheet.append(row)
    workbook.save(path)
    workbook.close()


def _read_workbook(path: str):
    workbook = openpyxl.load_workbook(path, read_only=True, data_only=True)
    worksheet = workbook.active
    rows = [list(row) for row in worksheet.iter_rows(values_only=True)]
    workbook.close()
    if not rows:
        raise ManifestError(f"{path} is empty")
    return [str(name) for name in rows[0]], rows[1:]
