"""Utility functions"""

import csv
import json
import platform
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import OutputError

# exit statuses of a run
SUCCESS = 0
INVALID_CONFIG = 2
SOLVER_FAILURE = 3
INVARIANT_VIOLATION = 4
IO_ERROR = 5


def create_result(code, message, data=None, payload=None):
    """
    Create standard run result format

    Args:
        code: exit status
        message: Result message
        data: Result data (default: {})
        payload: Resolved descriptor or extra context (default: {})

    Returns:
        tuple: (result dictionary, exit status)
    """
    return {
        "code": code,
        "message": message,
        "data": data if data is not None else {},
        "payLoad": payload if payload is not None else {}
    }, code


def success_result(message, data=None, payload=None):
    return create_result(SUCCESS, message, data, payload)


def error_result(code, message, data=None, payload=None):
    return create_result(code, message, data, payload)


def invalid_config(message="Invalid configuration", data=None):
    return error_result(INVALID_CONFIG, message, data)


def solver_failure(message="Solver failure", data=None):
    return error_result(SOLVER_FAILURE, message, data)


def invariant_violation(message="Invariant violation", data=None):
    return error_result(INVARIANT_VIOLATION, message, data)


def io_error(message="I/O error", data=None):
    return error_result(IO_ERROR, message, data)


def _format_value(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, columns, rows, comments=()):
    """CSV with '#'-prefixed comment lines ahead of the header"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            for comment in comments:
                f.write(f"# {comment}\n")
            writer = csv.writer(f)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_value(v) for v in row])
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    return path


def read_csv(path):
    """(columns, rows of strings) skipping comment lines"""
    with Path(path).open(encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    reader = csv.reader(lines)
    columns = next(reader)
    return columns, [row for row in reader]


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def write_json(path, document):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_jsonable(document), indent=2), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    return path


def write_manifest(output_dir, descriptor, outputs, diagnostics, elapsed):
    """manifest.json: the resolved descriptor plus grid sizes, residuals and timing"""
    manifest = {
        "timestamp_utc": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "descriptor": descriptor,
        "outputs": [str(p) for p in outputs],
        "diagnostics": diagnostics,
        "elapsed_seconds": elapsed,
    }
    return write_json(Path(output_dir) / "manifest.json", manifest)


def emit_table(output_dir, descriptor, stem, columns, rows, comments=()):
    """Write a result table in the descriptor's output format"""
    output = descriptor["output"]
    if output["format"] == "json":
        path = output.get("path") or Path(output_dir) / f"{stem}.json"
        document = {"comments": list(comments), "columns": list(columns),
                    "rows": [list(row) for row in rows]}
        return write_json(path, document)
    path = output.get("path") or Path(output_dir) / f"{stem}.csv"
    return write_csv(path, columns, rows, comments)
