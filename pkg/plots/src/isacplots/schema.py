"""CSV reading and schema validation for the experiment outputs.

The experiment CLI writes one CSV per run: comment lines (``# key = value``)
recording the configuration, a header row, then full-precision float rows.
Each figure kind has a fixed column set; anything else is rejected with a
diagnostic naming both the expected and the observed columns.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KINDS = ("fig2", "fig3", "fig4a", "fig4b")

EXPECTED_COLUMNS = {
    "fig2": ("eta", "trial", "outer_iteration", "papr"),
    "fig3": ("snr_db", "variant", "mean_sum_rate", "stderr"),
    "fig4a": ("angle_deg", "desired", "with_ris", "without_ris"),
    "fig4b": ("rho", "variant", "mean_mse_db"),
}

# Columns that stay strings; everything else must parse as a float.
_TEXT_COLUMNS = {"variant"}


class SchemaError(ValueError):
    """The CSV does not match the expected experiment schema."""


@dataclass(frozen=True)
class Table:
    """Parsed CSV: config metadata plus one array (or str list) per column."""

    meta: dict
    columns: dict

    def __getitem__(self, name):
        return self.columns[name]


def read_table(path, kind: str) -> Table:
    if kind not in EXPECTED_COLUMNS:
        raise SchemaError(f"unknown figure kind {kind!r}")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc

    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise SchemaError(f"{path} has no header row")

    rows = list(csv.reader(io.StringIO("\n".join(body))))
    header = tuple(h.strip() for h in rows[0])
    expected = EXPECTED_COLUMNS[kind]
    if header != expected:
        raise SchemaError(
            f"{kind} expects columns {list(expected)}, got {list(header)}"
        )
    if len(rows) == 1:
        raise SchemaError(f"{path} has no data rows")

    raw = {name: [] for name in expected}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(expected):
            raise SchemaError(
                f"{path} row {lineno}: expected {len(expected)} fields, "
                f"got {len(row)}"
            )
        for name, field in zip(expected, row):
            raw[name].append(field)

    columns = {}
    for name in expected:
        if name in _TEXT_COLUMNS:
            columns[name] = raw[name]
            continue
        try:
            columns[name] = np.array([float(v) for v in raw[name]])
        except ValueError as exc:
            raise SchemaError(f"column {name!r} is not numeric: {exc}") from exc
    return Table(meta=meta, columns=columns)
