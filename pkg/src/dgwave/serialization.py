"""
Deterministic output formats.

Guarantees:
- Byte-identical JSON for identical inputs: keys sorted, no whitespace,
  floats in shortest round-trip form, non-finite floats written as null
- CSV numbers with 17 significant digits, header row always present
- Run histories written one row per executed step, flushed as they come
"""

import csv
import math
from pathlib import Path
from typing import IO, Any, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from .blowup_analysis import HISTORY_FIELDS, RunHistory


def to_canonical_json(value: Any) -> str:
    """
    Canonical JSON text of a value.

    Args:
        value: JSON-like value; pydantic models, enums and numpy scalars/arrays are converted

    Returns:
        Canonical JSON string
    """
    return _canonicalize_value(value)


def _canonicalize_value(value: Any) -> str:
    if isinstance(value, BaseModel):
        return _canonicalize_value(value.model_dump(mode="json"))

    if value is None:
        return "null"

    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"

    if isinstance(value, (int, float, np.integer, np.floating)):
        return _canonicalize_number(value)

    if isinstance(value, str):
        return _canonicalize_string(value)

    if isinstance(value, np.ndarray):
        return _canonicalize_value(value.tolist())

    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canonicalize_value(v) for v in value) + "]"

    if isinstance(value, Mapping):
        pairs = [
            _canonicalize_string(str(k)) + ":" + _canonicalize_value(value[k])
            for k in sorted(value, key=str)
        ]
        return "{" + ",".join(pairs) + "}"

    if hasattr(value, "value"):
        return _canonicalize_value(value.value)

    raise TypeError(f"Unsupported type: {type(value)}")


def _canonicalize_string(s: str) -> str:
    out = ['"']
    for char in s:
        code = ord(char)
        if char == '"':
            out.append('\\"')
        elif char == "\\":
            out.append("\\\\")
        elif char == "\n":
            out.append("\\n")
        elif char == "\t":
            out.append("\\t")
        elif code < 0x20:
            out.append(f"\\u{code:04x}")
        else:
            out.append(char)
    out.append('"')
    return "".join(out)


def _canonicalize_number(num: Union[int, float, np.integer, np.floating]) -> str:
    if isinstance(num, (int, np.integer)):
        return str(int(num))
    num = float(num)
    if not math.isfinite(num):
        return "null"
    if num == 0.0:
        return "0"
    s = repr(num)
    if s.endswith(".0"):
        s = s[:-2]
    return s


def format_number(value: Any) -> str:
    """CSV cell text: integers as-is, floats with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_rows_csv(
    path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> int:
    """Write a header and formatted rows; returns the number of data rows."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
            count += 1
    return count


class HistoryCsvWriter:
    """
    Observer streaming run-history rows to CSV as the run proceeds.

    The initial record (n = 0) is never written; each executed step is one row.
    """

    def __init__(self, handle: IO[str], scheme: Optional[str] = None) -> None:
        self._writer = csv.writer(handle, lineterminator="\n")
        self._handle = handle
        self.scheme = scheme
        self.rows_written = 0
        header: List[str] = list(HISTORY_FIELDS)
        if scheme is not None:
            header.append("scheme")
        self._writer.writerow(header)

    def __call__(self, state: Any, history: RunHistory) -> None:
        if len(history) < 2:
            return
        row = [format_number(v) for v in history.row(len(history) - 1)]
        if self.scheme is not None:
            row.append(self.scheme)
        self._writer.writerow(row)
        self.rows_written += 1
        self._handle.flush()
