"""Figure rendering for the waveform-design experiment CSVs."""

from .figures import PlotSpec, RenderInfo, render
from .schema import EXPECTED_COLUMNS, KINDS, SchemaError, Table, read_table

__all__ = [
    "EXPECTED_COLUMNS",
    "KINDS",
    "PlotSpec",
    "RenderInfo",
    "SchemaError",
    "Table",
    "read_table",
    "render",
]

__version__ = "0.1.0"
