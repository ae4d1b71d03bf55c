"""This module contains the functions needed to write result tables to CSV or JSON files."""

import csv
import math
from pathlib import Path

from .json_writer import write_to_json


def format_cell(value) -> str:
    """Format one table cell; floats keep 17 significant digits so they round-trip."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    try:
        return f"{float(value):.17g}"
    except (TypeError, ValueError):
        return str(value)


def write_table(filename, header, rows, output_format="csv"):
    """
    Write a table with a header row.

    The file suffix is replaced by the one of the output format. For json the
    table is written as {"columns": [...], "rows": [[...], ...]}.

    Args:
        filename (str | Path): The path of the table, suffix optional.
        header (list): Column names.
        rows (list): Rows of cells, each as long as the header.
        output_format (str): "csv" or "json".

    Returns:
        Path: the written file
    """
    rows = [list(row) for row in rows]
    for number, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"row {number} has {len(row)} cells, header has {len(header)}")

    path = Path(filename).with_suffix(f".{output_format}")
    if output_format == "json":
        return write_to_json(path, {"columns": list(header), "rows": rows})
    if output_format != "csv":
        raise ValueError(f"unknown table format {output_format!r}")

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])
    return path
