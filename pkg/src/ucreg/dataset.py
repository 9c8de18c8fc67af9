"""Tabular ingestion, validation, and target decomposition.

A loaded table is split into numeric attributes (the only columns eligible
as explanatory variables) and non-numeric columns kept as candidate
categorical targets.  Missing cells are carried explicitly: NaN inside the
numeric vectors, ``None`` inside categorical columns.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateTargetError,
    DroppedRowsWarning,
    EmptyDatasetError,
    NamingError,
    ParseError,
    StatsUnavailableError,
    UnknownAttributeError,
)

DEFAULT_MISSING_TOKENS = ("", "NA", "null")


def _format_label(value) -> str:
    """Canonical label text for a target cell (numeric or string)."""
    if isinstance(value, str):
        return value
    v = float(value)
    if v == int(v):
        return str(int(v))
    return repr(v)


@dataclass(frozen=True)
class Dataset:
    """Immutable column-major table with named numeric attributes.

    ``columns`` maps every column name to either a read-only float array
    (NaN marks missing) or a tuple of ``str | None``.  ``attr_names`` lists
    the numeric columns in load order; the remaining names are candidate
    categorical targets.
    """

    column_order: tuple[str, ...]
    columns: dict = field(repr=False)
    target_name: str | None = None

    @property
    def attr_names(self) -> list[str]:
        return [c for c in self.column_order if isinstance(self.columns[c], np.ndarray)]

    @property
    def categorical_names(self) -> list[str]:
        return [c for c in self.column_order if not isinstance(self.columns[c], np.ndarray)]

    @property
    def n_rows(self) -> int:
        first = self.columns[self.column_order[0]]
        return len(first)

    @property
    def n_attrs(self) -> int:
        return len(self.attr_names)

    @property
    def row_ids(self) -> list[int]:
        return list(range(self.n_rows))

    def has_column(self, name: str) -> bool:
        return name in self.columns

    def values(self, name: str) -> np.ndarray:
        """Numeric vector of an attribute; NaN where missing."""
        col = self.columns.get(name)
        if col is None:
            raise UnknownAttributeError(name)
        if not isinstance(col, np.ndarray):
            raise UnknownAttributeError(f"{name} (not numeric)")
        return col

    def column(self, name: str):
        """Raw column, numeric array or categorical tuple."""
        if name not in self.columns:
            raise UnknownAttributeError(name)
        return self.columns[name]

    def missing_mask(self, name: str) -> np.ndarray:
        col = self.column(name)
        if isinstance(col, np.ndarray):
            return np.isnan(col)
        return np.array([v is None for v in col], dtype=bool)

    def with_target(self, name: str) -> "Dataset":
        if name not in self.columns:
            raise UnknownAttributeError(name)
        return Dataset(self.column_order, self.columns, target_name=name)

    def to_delimited(self, delimiter: str = ",") -> str:
        """Serialize back to delimited text; reloading round-trips exactly."""
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        writer.writerow(self.column_order)
        cols = [self.columns[c] for c in self.column_order]
        for i in range(self.n_rows):
            row = []
            for col in cols:
                if isinstance(col, np.ndarray):
                    v = col[i]
                    row.append("" if np.isnan(v) else repr(float(v)))
                else:
                    v = col[i]
                    row.append("" if v is None else v)
            writer.writerow(row)
        return buf.getvalue()


@dataclass(frozen=True)
class TargetDecomposition:
    """Per-label presence vectors for one categorical target.

    ``presence`` is (retained rows) x k with exactly one 1 per row;
    ``row_indices`` maps presence rows back to dataset rows.
    """

    target_name: str
    labels: tuple[str, ...]
    presence: np.ndarray
    row_indices: np.ndarray
    n_dropped: int = 0

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def counts(self) -> np.ndarray:
        return self.presence.sum(axis=0)

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownAttributeError(f"label {label!r}") from None

    def restricted(self, labels) -> "TargetDecomposition":
        """Decomposition over only the chosen labels; other rows drop out."""
        idx = [self.label_index(l) for l in labels]
        keep = self.presence[:, idx].sum(axis=1) > 0
        return TargetDecomposition(
            target_name=self.target_name,
            labels=tuple(labels),
            presence=self.presence[np.ix_(keep, idx)],
            row_indices=self.row_indices[keep],
            n_dropped=self.n_dropped,
        )

    def label_vs_rest(self, label: str) -> "TargetDecomposition":
        """Binary decomposition: the chosen label versus everything else."""
        j = self.label_index(label)
        pos = self.presence[:, j]
        presence = np.column_stack([pos, 1 - pos]).astype(np.int8)
        return TargetDecomposition(
            target_name=self.target_name,
            labels=(label, f"not {label}"),
            presence=presence,
            row_indices=self.row_indices,
            n_dropped=self.n_dropped,
        )

    def select_rows(self, positions: np.ndarray) -> "TargetDecomposition":
        """Keep only the given presence-row positions (not dataset indices)."""
        return TargetDecomposition(
            target_name=self.target_name,
            labels=self.labels,
            presence=self.presence[positions],
            row_indices=self.row_indices[positions],
            n_dropped=self.n_dropped,
        )


def _decode(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def load_table(
    source,
    delimiter: str = ",",
    header: bool = True,
    missing_tokens=DEFAULT_MISSING_TOKENS,
) -> Dataset:
    """Parse delimited text (bytes, str, or a file object) into a Dataset.

    Columns whose non-missing cells all parse as floats become numeric
    attributes; everything else is kept as a categorical candidate target.
    Raises ParseError (ragged rows, with 1-based line number),
    EmptyDatasetError (no data rows), or NamingError (bad header).
    """
    text = _decode(source)
    missing = {t.strip() for t in missing_tokens}
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    rows = [(lineno, row) for lineno, row in enumerate(reader, start=1) if row]
    if not rows:
        raise EmptyDatasetError("input contains no rows")

    if header:
        _, names = rows[0]
        names = [n.strip() for n in names]
        data_rows = rows[1:]
    else:
        width = len(rows[0][1])
        names = [f"col{i + 1}" for i in range(width)]
        data_rows = rows

    if any(not n for n in names):
        raise NamingError("empty column name in header")
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise NamingError("duplicate column name(s): " + ", ".join(dupes))
    if not data_rows:
        raise EmptyDatasetError("no data rows (header only)")

    width = len(names)
    cells: list[list[str]] = []
    for lineno, row in data_rows:
        if len(row) != width:
            raise ParseError(
                f"expected {width} fields, found {len(row)}", line=lineno
            )
        cells.append([c.strip() for c in row])

    columns: dict = {}
    for j, name in enumerate(names):
        raw = [r[j] for r in cells]
        parsed: list[float | None] = []
        numeric = True
        for tok in raw:
            if tok in missing:
                parsed.append(None)
                continue
            try:
                parsed.append(float(tok))
            except ValueError:
                numeric = False
                break
        if numeric:
            arr = np.array(
                [np.nan if v is None else v for v in parsed], dtype=float
            )
            arr.flags.writeable = False
            columns[name] = arr
        else:
            columns[name] = tuple(None if tok in missing else tok for tok in raw)

    return Dataset(column_order=tuple(names), columns=columns)


def decompose_target(ds: Dataset, target: str) -> TargetDecomposition:
    """Split one column's values into per-label binary presence vectors.

    Labels are ordered by first appearance among retained rows; rows with a
    missing target are dropped with a DroppedRowsWarning.
    """
    col = ds.column(target)
    if isinstance(col, np.ndarray):
        raw = [None if np.isnan(v) else v for v in col]
    else:
        raw = list(col)

    keep = [i for i, v in enumerate(raw) if v is not None]
    n_dropped = len(raw) - len(keep)
    if n_dropped:
        warnings.warn(
            f"dropped {n_dropped} row(s) with missing target {target!r}",
            DroppedRowsWarning,
            stacklevel=2,
        )
    if not keep:
        raise DegenerateTargetError(f"target {target!r} has no non-missing values")

    labels: list[str] = []
    assignments = []
    for i in keep:
        lab = _format_label(raw[i])
        if lab not in labels:
            labels.append(lab)
        assignments.append(labels.index(lab))

    if len(labels) < 2:
        raise DegenerateTargetError(
            f"target {target!r} has a single label {labels[0]!r}"
        )

    presence = np.zeros((len(keep), len(labels)), dtype=np.int8)
    presence[np.arange(len(keep)), assignments] = 1
    return TargetDecomposition(
        target_name=target,
        labels=tuple(labels),
        presence=presence,
        row_indices=np.array(keep, dtype=np.intp),
        n_dropped=n_dropped,
    )


def column_stats(ds: Dataset, name: str) -> dict:
    """Mean/std/min/max/missing over the non-missing cells of an attribute.

    std uses the population denominator n.
    """
    x = ds.values(name)
    ok = x[~np.isnan(x)]
    n_missing = int(len(x) - len(ok))
    if len(ok) == 0:
        raise StatsUnavailableError(f"attribute {name!r} is entirely missing")
    return {
        "mean": float(ok.mean()),
        "std": float(ok.std()),
        "min": float(ok.min()),
        "max": float(ok.max()),
        "missing": n_missing,
    }
