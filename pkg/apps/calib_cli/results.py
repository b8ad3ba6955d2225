"""
Aggregated Monte Carlo results and their CSV form.

The CSV header is fixed:

    method,sweep_name,sweep_value,parameter,mse,crlb,trials,invalid

With extended output three columns follow: mse_deg2 (phase parameters only),
std_error and unreliable.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_COLUMNS = ('method', 'sweep_name', 'sweep_value', 'parameter', 'mse', 'crlb', 'trials', 'invalid')
EXTENDED_COLUMNS = ('mse_deg2', 'std_error', 'unreliable')
DEBUG_COLUMNS = ('method', 'sweep_name', 'sweep_value', 'trial', 'parameter', 'squared_error')

GAINS_AGGREGATE = 'gains'
PHASES_AGGREGATE = 'phases'
DOA_AGGREGATE = 'doa'
RAD2_TO_DEG2 = (180.0 / math.pi) ** 2


@dataclass(frozen=True)
class ResultRow:
    method: str
    sweep_name: str
    sweep_value: float
    parameter: str
    mse: float
    crlb: float | None
    trials: int
    invalid: int
    std_error: float | None = None
    unreliable: bool = False

    def __post_init__(self):
        if self.mse < 0 or (math.isnan(self.mse) and self.invalid < self.trials):
            raise ValueError(f'MSE must be non-negative, got {self.mse} for {self.parameter}.')
        if not 0 <= self.invalid <= self.trials:
            raise ValueError(f'Invalid count {self.invalid} outside [0, {self.trials}].')

    @property
    def is_phase(self) -> bool:
        return self.parameter.startswith('phi') or self.parameter == PHASES_AGGREGATE

    @property
    def mse_deg2(self) -> float | None:
        return self.mse * RAD2_TO_DEG2 if self.is_phase else None

    @property
    def invalid_fraction(self) -> float:
        return self.invalid / self.trials


@dataclass
class ResultTable:
    experiment_id: str = ''
    master_seed: int = 0
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def append(self, row: ResultRow):
        self.rows.append(row)

    @property
    def unreliable(self) -> bool:
        return any(row.unreliable for row in self.rows)

    @property
    def methods(self) -> list:
        return list(dict.fromkeys(row.method for row in self.rows))

    def select(self, method=None, parameter=None, sweep_value=None) -> list:
        return [
            row for row in self.rows
            if (method is None or row.method == method)
            and (parameter is None or row.parameter == parameter)
            and (sweep_value is None or row.sweep_value == sweep_value)
        ]

    def series(self, method: str, parameter: str) -> tuple[np.ndarray, np.ndarray]:
        """(sweep values, MSEs) for one method and parameter."""
        rows = self.select(method=method, parameter=parameter)
        return np.array([r.sweep_value for r in rows], dtype=float), np.array([r.mse for r in rows], dtype=float)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def format_value(value) -> str:
    """Integers as integers, floats with full double precision, missing as empty."""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if value.is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(value)


def table_rows(table: ResultTable, extended: bool = False) -> list[list[str]]:
    rows = []
    for row in table:
        values = [row.method, row.sweep_name, row.sweep_value, row.parameter, row.mse, row.crlb, row.trials, row.invalid]
        if extended:
            values += [row.mse_deg2, row.std_error, row.unreliable]
        rows.append([value if isinstance(value, str) else format_value(value) for value in values])
    return rows


def emit_csv(table: ResultTable, path, extended: bool = False) -> Path:
    """
    Write the table as CSV, header first, one line per row.

    Raises:
        OSError: If the file cannot be written; the message names the path.
    """
    path = Path(path)
    header = CSV_COLUMNS + (EXTENDED_COLUMNS if extended else ())
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            writer.writerows(table_rows(table, extended))
    except OSError as exc:
        raise OSError(f'Cannot write results to {path}: {exc}') from exc
    return path


def emit_debug_csv(records, path) -> Path:
    """Per-trial squared errors: (method, sweep_name, sweep_value, trial, parameter, squared_error)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(DEBUG_COLUMNS)
            for record in records:
                writer.writerow([value if isinstance(value, str) else format_value(value) for value in record])
    except OSError as exc:
        raise OSError(f'Cannot write per-trial errors to {path}: {exc}') from exc
    return path
