"""Run reports: scalars, CSV tables, atomic writes and golden comparison."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Reports with different scalar names or table columns."""


def fmt(x) -> str:
    """Lossless text for a number: 17 significant digits for floats."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x) + 0.0, ".17g")  # + 0.0 maps -0.0 to 0.0
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


@dataclass
class Table:
    columns: list
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(v) for v in r])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Table":
        rd = list(csv.reader(io.StringIO(text)))
        return cls(rd[0], [[_parse(v) for v in r] for r in rd[1:] if r])


def _parse(s):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


@dataclass
class Report:
    """Scalars, named tables and run metadata of one command."""

    command: str
    scalars: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add_table(self, name, columns, rows):
        self.tables[name] = Table(list(columns), [list(r) for r in rows])

    def to_dict(self):
        return {
            "command": self.command,
            "metadata": _jsonable(self.metadata),
            "scalars": _jsonable(self.scalars),
            "tables": {k: t.to_csv() for k, t in self.tables.items()},
        }

    @classmethod
    def from_dict(cls, d):
        tables = {k: Table.from_csv(v) for k, v in d.get("tables", {}).items()}
        return cls(d["command"], d.get("scalars", {}), tables, d.get("metadata", {}))

    def write(self, out_dir) -> Path:
        """Write ``report.json`` and one CSV per table into ``out_dir``, each atomically."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, t in self.tables.items():
            atomic_write(out / f"{name}.csv", t.to_csv())
        path = out / "report.json"
        atomic_write(path, json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")
        return path


def load_report(path) -> Report:
    with open(path) as fh:
        return Report.from_dict(json.load(fh))


def _umask_mode():
    mask = os.umask(0)
    os.umask(mask)
    return 0o666 & ~mask


def atomic_write(path, data, binary: bool = False):
    """Write to a temporary file in the target directory, fsync, then rename over ``path``.

    A reader never sees a partially written file; an interrupted write leaves
    the previous file (if any) untouched.
    """
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb" if binary else "w") as fh:
            if callable(data):
                data(fh)
            else:
                fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.chmod(tmp, _umask_mode())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


@dataclass
class CheckResult:
    passed: bool
    failures: list

    def __bool__(self):
        return self.passed

    def summary(self) -> str:
        if self.passed:
            return "PASS"
        return "FAIL\n" + "\n".join("  " + f for f in self.failures)


def _close(a, b, rtol, atol):
    if isinstance(a, str) or isinstance(b, str):
        return a == b
    if isinstance(a, list) or isinstance(b, list):
        if not (isinstance(a, list) and isinstance(b, list)) or len(a) != len(b):
            return False
        return all(_close(x, y, rtol, atol) for x, y in zip(a, b))
    if a is None or b is None:
        return a is b
    a, b = float(a), float(b)
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    return abs(a - b) <= atol + rtol * abs(b)


def golden_check(report: Report, golden: Report, rtol: float = 1e-9, atol: float = 0.0,
                 tolerances: dict | None = None, tables: bool = True) -> CheckResult:
    """Compare scalars (and table cells) against a golden report.

    ``tolerances`` maps a scalar name to ``(rtol, atol)`` overriding the
    defaults. Raises :class:`SchemaError` when the scalar names or table
    columns differ.
    """
    tolerances = tolerances or {}
    if set(report.scalars) != set(golden.scalars):
        missing = sorted(set(golden.scalars) - set(report.scalars))
        extra = sorted(set(report.scalars) - set(golden.scalars))
        raise SchemaError(f"scalar sets differ: missing {missing}, unexpected {extra}")
    failures = []
    for k in sorted(golden.scalars):
        rt, at = tolerances.get(k, (rtol, atol))
        a, b = report.scalars[k], golden.scalars[k]
        if not _close(a, b, rt, at):
            failures.append(f"{k}: got {a!r}, golden {b!r} (rtol {rt:g}, atol {at:g})")
    if tables:
        if set(report.tables) != set(golden.tables):
            raise SchemaError(f"table sets differ: {sorted(report.tables)} vs {sorted(golden.tables)}")
        for name in sorted(golden.tables):
            t, gt = report.tables[name], golden.tables[name]
            if t.columns != gt.columns:
                raise SchemaError(f"table {name}: columns {t.columns} vs {gt.columns}")
            if len(t.rows) != len(gt.rows):
                failures.append(f"table {name}: {len(t.rows)} rows, golden {len(gt.rows)}")
                continue
            for i, (r, gr) in enumerate(zip(t.rows, gt.rows)):
                for col, a, b in zip(t.columns, r, gr):
                    if not _close(a, b, rtol, atol):
                        failures.append(f"table {name} row {i} column {col}: got {a!r}, golden {b!r}")
    return CheckResult(not failures, failures)
