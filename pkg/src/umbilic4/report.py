"""Versioned result reports and their json / csv / pretty writers"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import FORMATS, RunConfig
from .errors import ValidationError
from .field import AlgebraicScalar
from .utils import logger

SCHEMA_VERSION = "1.0"


def jsonable(value: Any) -> Any:
    """Plain JSON data from results: numpy arrays and scalars, exact numbers
    as canonical strings, non-finite floats as "nan" / "inf" / "-inf"."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(value, (AlgebraicScalar, Fraction)):
        return str(value)
    if value is None or isinstance(value, str):
        return value
    if hasattr(value, "to_json"):
        return jsonable(value.to_json())
    return str(value)


def _canonical(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _canonical(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_canonical(v) for v in value]
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def canonical_json(value: Any) -> str:
    """Sorted keys, compact separators, floats at 17 significant digits."""
    return json.dumps(_canonical(jsonable(value)), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class Report:
    """Everything a command writes, with a digest over all but the timing"""

    command: str
    config: dict
    results: Any
    passed: int = 0
    failed: int = 0
    timing: dict = field(default_factory=dict)
    rows: list[dict] | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def body(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "toolkit_version": __version__,
            "command": self.command,
            "config": jsonable(self.config),
            "results": jsonable(self.results),
            "summary": {"passed": self.passed, "failed": self.failed, "ok": self.ok},
        }

    @property
    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.body()).encode()).hexdigest()

    def to_json(self) -> dict:
        data = self.body()
        data["timing"] = jsonable(self.timing)
        data["digest"] = self.digest
        return data


def make_report(command: str, config: RunConfig, results: Any, checks: dict[str, bool] | None = None,
                elapsed: float | None = None, rows: list[dict] | None = None) -> Report:
    """Report with the pass/fail counts of `checks` (name -> passed)."""
    checks = checks or {}
    passed = sum(1 for v in checks.values() if v)
    timing = {"seconds": round(elapsed, 6)} if elapsed is not None else {}
    return Report(command, config.echo(), results, passed, len(checks) - passed, timing, rows)


def _flatten(prefix: str, value: Any, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, list) and value and all(not isinstance(v, (dict, list)) for v in value):
        out[prefix] = ";".join(str(v) for v in value)
    elif isinstance(value, list):
        for n, v in enumerate(value):
            _flatten(f"{prefix}.{n}" if prefix else str(n), v, out)
    else:
        out[prefix] = value


def to_csv(report: Report) -> str:
    """Tabular rows when the command has them, else key/value pairs of the results."""
    buffer = io.StringIO()
    if report.rows:
        rows = [jsonable(r) for r in report.rows]
        flat = []
        for row in rows:
            cells: dict = {}
            _flatten("", row, cells)
            flat.append(cells)
        columns = list(dict.fromkeys(k for cells in flat for k in cells))
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(flat)
    else:
        cells = {}
        _flatten("", jsonable(report.results), cells)
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in cells.items():
            writer.writerow([key, value])
    return buffer.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (dict, list)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def to_table(report: Report) -> Table:
    table = Table(title=f"umbilic4 {report.command}")
    if report.rows:
        rows = [jsonable(r) for r in report.rows]
        columns = list(dict.fromkeys(k for row in rows for k in row))
        for column in columns:
            table.add_column(column)
        for row in rows:
            table.add_row(*(_cell(row.get(c, "")) for c in columns))
    else:
        table.add_column("key")
        table.add_column("value")
        cells: dict = {}
        _flatten("", jsonable(report.results), cells)
        for key, value in cells.items():
            table.add_row(key, _cell(value))
    table.caption = f"passed {report.passed}, failed {report.failed}"
    return table


def write_report(report: Report, fmt: str = "json", output: str | Path | None = None) -> None:
    """Write to `output`, or to stdout when it is None.

    Raises:
        ValidationError: On an unknown format
    """
    if fmt not in FORMATS:
        raise ValidationError(f"Unknown format '{fmt}' (expected one of {', '.join(FORMATS)})")
    if fmt == "pretty":
        table = to_table(report)
        if output is None:
            Console().print(table)
            return
        with open(output, "w") as f:
            Console(file=f, width=160).print(table)
    else:
        text = json.dumps(report.to_json(), indent=2, sort_keys=True, ensure_ascii=False) if fmt == "json" else to_csv(report)
        if output is None:
            logger.stream(text)
            return
        Path(output).write_text(text if text.endswith("\n") else text + "\n")
    logger.success(f"Report written to {output}")
