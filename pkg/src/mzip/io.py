"""Text I/O: dataset ingestion and atomic file writes."""
from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgument
from .model import Dataset


def atomic_write_text(path, text: str) -> Path:
    """Write-temp-then-rename so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _sniff_delimiter(first_line: str) -> str:
    if "\t" in first_line:
        return "\t"
    if "," in first_line:
        return ","
    if ";" in first_line:
        return ";"
    return "\t"


def read_table(path):
    """Read a delimited table with a header row and subject IDs in column one.

    Returns (ids, column names, raw string cells, path).
    """
    path = Path(path)
    if not path.exists():
        raise InvalidArgument(f"{path}: file not found")
    with open(path, newline="") as fh:
        text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidArgument(f"{path}: empty file")
    rows = list(csv.reader(lines, delimiter=_sniff_delimiter(lines[0])))
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise InvalidArgument(f"{path}: need an ID column plus at least one data column")
    ids, cells = [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InvalidArgument(f"{path}: line {r} has {len(row)} fields, header has {len(header)}")
        ids.append(row[0].strip())
        cells.append([c.strip() for c in row[1:]])
    if len(set(ids)) != len(ids):
        raise InvalidArgument(f"{path}: duplicate subject IDs")
    return ids, header[1:], cells, path


def _parse_float(cell: str, path, line: int, col: str) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise InvalidArgument(f"{path}: line {line}, column {col!r}: {cell!r} is not a number") from None
    if not np.isfinite(v):
        raise InvalidArgument(f"{path}: line {line}, column {col!r}: non-finite value")
    return v


def _numeric(table, integral: bool = False) -> np.ndarray:
    ids, cols, cells, path = table
    out = np.empty((len(ids), len(cols)))
    for i, row in enumerate(cells):
        for j, c in enumerate(row):
            v = _parse_float(c, path, i + 2, cols[j])
            if integral and (v != np.floor(v) or v < 0):
                raise InvalidArgument(f"{path}: line {i + 2}, column {cols[j]!r}: count {c!r} is not a "
                                      "non-negative integer")
            out[i, j] = v
    return out


def _align(ids: Sequence[str], other, what: str):
    o_ids = other[0]
    if set(o_ids) != set(ids):
        extra = sorted(set(o_ids) - set(ids))[:5]
        missing = sorted(set(ids) - set(o_ids))[:5]
        raise InvalidArgument(f"{other[3]}: subject IDs do not match the count file "
                              f"(missing {missing}, unexpected {extra}) in {what}")
    pos = {s: i for i, s in enumerate(o_ids)}
    return [pos[s] for s in ids]


def ingest_dataset(count_path, covariate_path_x, covariate_path_z=None, offset: str = "rowsum",
                   offset_path=None) -> Dataset:
    """Build a :class:`Dataset` from delimited text files aligned by subject ID.

    ``offset`` is ``"rowsum"`` (total counts per subject), ``"one"``, or ``"file"``
    (then ``offset_path`` holds one positive value per subject).
    """
    counts = read_table(count_path)
    ids = counts[0]
    y = _numeric(counts, integral=True).astype(np.int64)
    tx = read_table(covariate_path_x)
    x = _numeric(tx)[_align(ids, tx, "x covariates")]
    if covariate_path_z is None:
        tz = tx
        z = x.copy()
    else:
        tz = read_table(covariate_path_z)
        z = _numeric(tz)[_align(ids, tz, "z covariates")]
    if offset == "rowsum":
        xi = y.sum(axis=1).astype(float)
        bad = np.flatnonzero(xi <= 0)
        if bad.size:
            raise InvalidArgument(f"{counts[3]}: subject {ids[bad[0]]!r} has zero total count; "
                                  "row-sum offset would be nonpositive")
    elif offset == "one":
        xi = np.ones(len(ids))
    elif offset == "file":
        if offset_path is None:
            raise InvalidArgument("offset 'file' requires an offset file")
        to = read_table(offset_path)
        vals = _numeric(to)
        if vals.shape[1] != 1:
            raise InvalidArgument(f"{to[3]}: offset file must have exactly one data column")
        xi = vals[_align(ids, to, "offsets"), 0]
        for i in np.flatnonzero(xi <= 0):
            raise InvalidArgument(f"{to[3]}: subject {ids[i]!r}: offset must be positive")
    else:
        raise InvalidArgument(f"offset must be 'rowsum', 'one' or 'file', got {offset!r}")
    return Dataset(y=y, x=x, z=z, offset=xi, outcome_names=tuple(counts[1]), covariate_names_x=tuple(tx[1]),
                   covariate_names_z=tuple(tz[1]), subject_ids=tuple(ids))


def format_table(header: Sequence[str], rows, delimiter: str = "\t") -> str:
    """Locale-independent delimited text; floats in shortest round-trip form, NaN/None as 'NA'."""
    def cell(v):
        if v is None:
            return "NA"
        if isinstance(v, (bool, np.bool_)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return "NA" if not np.isfinite(v) else repr(float(v))
        return str(v)

    lines = [delimiter.join(header)]
    lines += [delimiter.join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_table(path, header, rows, delimiter: str = "\t") -> Path:
    return atomic_write_text(path, format_table(header, rows, delimiter))


def read_numeric_column(path, column: Optional[str] = None):
    ids, cols, cells, p = read_table(path)
    j = 0 if column is None else cols.index(column)
    return ids, np.array([_parse_float(r[j], p, i + 2, cols[j]) for i, r in enumerate(cells)])
