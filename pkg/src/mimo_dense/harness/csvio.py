"""Deterministic CSV emission: RFC-4180 rows, 12-significant-digit floats,
a leading comment line carrying the config hash and tool version, and an
atomic write (temp file then rename)."""

from __future__ import annotations

import csv
import os
import tempfile
from collections.abc import Iterable, Sequence


def format_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def write_csv(
    path: str,
    header: Sequence[str],
    rows: Iterable[Sequence],
    config_hash: str,
    version: str,
) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(f"# config_hash={config_hash} tool_version={version}\r\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(cell) for cell in row])
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def read_rows(path: str) -> tuple[list[str], list[dict[str, str]]]:
    """Read back an artifact, skipping comment lines; cells stay strings."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [dict(zip(header, row)) for row in reader]
