"""File formats: Touchstone 1.x, CSV traces and JSON design files."""

from .designfile import DesignDocument, load_fixture, read_design, read_spec, write_design
from .touchstone import TouchstoneDocument, read_touchstone, write_touchstone
from .traces import read_trace_csv, read_trace_touchstone, write_sparameter_csv, write_trace_csv

__all__ = [
    "DesignDocument",
    "TouchstoneDocument",
    "load_fixture",
    "read_design",
    "read_spec",
    "read_touchstone",
    "read_trace_csv",
    "read_trace_touchstone",
    "write_design",
    "write_sparameter_csv",
    "write_touchstone",
    "write_trace_csv",
]
