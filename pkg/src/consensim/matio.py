"""Plain-text key-matrix tables.

A file is a sequence of records.  Matrix records start with a header line
"name rows cols" followed by `rows` lines of `cols` whitespace-separated
values, written with 17 significant digits so doubles round-trip exactly.
Tag records are single "key = value" lines.  Lines starting with '#' and
blank lines are ignored.
"""

import numpy as np

from .errors import SchemaError


def format_float(value):
    return f"{float(value):.17g}"


def dump_entries(entries):
    """Serialize an ordered mapping of {name: ndarray | float | str}."""
    lines = []
    for name, value in entries.items():
        if isinstance(value, str):
            lines.append(f"{name} = {value}")
            continue
        matrix = np.atleast_2d(np.asarray(value, dtype=float))
        lines.append(f"{name} {matrix.shape[0]} {matrix.shape[1]}")
        for row in matrix:
            lines.append(" ".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_entries(text, source="<string>"):
    """Parse back into {name: ndarray | str}; scalars stay 1x1 arrays."""
    entries = {}
    lines = [ln.strip() for ln in text.splitlines()]
    i = 0
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 3:
            raise SchemaError(f"{source}: expected 'name rows cols', got {line!r}")
        name = parts[0]
        try:
            rows, cols = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise SchemaError(f"{source}: bad matrix header {line!r}") from exc
        data = []
        for r in range(rows):
            if i >= len(lines):
                raise SchemaError(f"{source}: matrix {name!r} truncated at row {r}")
            row_vals = lines[i].split()
            i += 1
            if len(row_vals) != cols:
                raise SchemaError(
                    f"{source}: matrix {name!r} row {r} has {len(row_vals)} values, expected {cols}"
                )
            try:
                data.append([float(v) for v in row_vals])
            except ValueError as exc:
                raise SchemaError(f"{source}: non-numeric entry in {name!r}") from exc
        entries[name] = np.array(data)
    return entries


def write_entries(path, entries):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_entries(entries))


def read_entries(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_entries(fh.read(), source=str(path))
