"""Figure-style rendering of the cooling engine's CSV outputs."""

__version__ = "0.1.0"

from .panels import KINDS, MissingColumn, PanelSpec, SchemaMismatch, Table, read_table, render

__all__ = ["KINDS", "MissingColumn", "PanelSpec", "SchemaMismatch", "Table",
           "read_table", "render"]
