"""Command-line surface: parsing, table regeneration and dispatch."""

from .config_loader import (
    BackcalcInput,
    Command,
    ExitCode,
    OutputFormat,
    RunConfig,
    TableName,
    build_parser,
    parse_and_validate,
)
from .main import main, run
from .tables import build_tables, equivalence_table, heterogeneous_table, ni_table, write_tables

__all__ = [
    "BackcalcInput",
    "Command",
    "ExitCode",
    "OutputFormat",
    "RunConfig",
    "TableName",
    "build_parser",
    "parse_and_validate",
    "main",
    "run",
    "build_tables",
    "equivalence_table",
    "heterogeneous_table",
    "ni_table",
    "write_tables",
]
