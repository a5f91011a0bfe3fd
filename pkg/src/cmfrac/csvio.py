"""Minimal CSV writer/reader shared by the result types and the CLI.

Every file starts with a ``# <version>,<schema>`` comment line followed by a
column header.  Floats are written with ``repr`` so files round-trip exactly
and two runs of the same computation produce identical bytes.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

from . import __version__

__all__ = ["write_csv", "read_csv", "format_csv"]


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def format_csv(schema: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# {__version__},{schema}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path, schema: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(schema, header, rows))
    return path


def read_csv(path) -> Tuple[str, List[str], List[List[str]]]:
    """Return ``(schema, header, rows)``; values are left as strings."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing '# version,schema' line")
    schema = lines[0][1:].strip().split(",", 1)[1]
    reader = csv.reader(lines[1:])
    header = next(reader)
    return schema, header, [row for row in reader]
