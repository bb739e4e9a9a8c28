"""In-memory column store: ingestion, per-column statistics, selectivity.

Tables are immutable after ingestion. Statistics (exact NDV, equi-width
histograms, top value frequencies, Gini impurity) back every cardinality
estimate the planner and the facet ranker make.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np

NULL_TOKENS = {"", r"\N"}
DEFAULT_BUCKET_COUNT = 32
TOP_VALUES_LIMIT = 50

# Fallback when a predicate cannot be estimated from the available stats
# (e.g. a range over a text column).
DEFAULT_SELECTIVITY = 1.0 / 3.0

KINDS = ("integer", "real", "date", "text")


class IngestError(ValueError):
    """Raised when a delimited source cannot be loaded as a table."""


class CatalogError(KeyError):
    """Raised when a table or column cannot be resolved."""


# ---------------------------------------------------------------------------
# Schema and predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TableSchema:
    table_name: str
    columns: tuple[tuple[str, str], ...]
    primary_key: Optional[str] = None

    def __post_init__(self) -> None:
        names = [c for c, _ in self.columns]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate column names in table {self.table_name!r}")

    def column_names(self) -> list[str]:
        return [c for c, _ in self.columns]

    def kind_of(self, column: str) -> str:
        for name, kind in self.columns:
            if name == column:
                return kind
        raise CatalogError(f"no column {column!r} in table {self.table_name!r}")


@dataclass(frozen=True)
class Predicate:
    """Single-column predicate: eq, in, range, or between.

    ``range``/``between`` use lo/hi bounds; None means unbounded. ``between``
    is the inclusive two-sided form the clarification loop injects.
    """

    column: str
    op: str  # eq | in | range | between
    value: Any = None
    values: tuple = ()
    lo: Any = None
    hi: Any = None
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self) -> None:
        if self.op not in ("eq", "in", "range", "between"):
            raise ValueError(f"unknown predicate op {self.op!r}")
        if self.op in ("range", "between") and self.lo is not None and self.hi is not None:
            if literal_key(self.lo) > literal_key(self.hi):
                raise ValueError(f"range bounds out of order on {self.column!r}")


def literal_key(v: Any) -> Any:
    """Sortable key for a literal (dates compare as ordinals)."""
    if isinstance(v, date):
        return v.toordinal()
    return v


# ---------------------------------------------------------------------------
# Histogram and statistics types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquiWidthHistogram:
    bucket_count: int
    lo: float
    hi: float
    counts: tuple[int, ...]

    @property
    def width(self) -> float:
        if self.bucket_count == 1:
            return 0.0 if self.hi == self.lo else self.hi - self.lo
        return (self.hi - self.lo) / self.bucket_count

    def total(self) -> int:
        return int(sum(self.counts))

    def mass_below(self, x: float, inclusive: bool = True) -> float:
        """Estimated count of values up to x, interpolating inside buckets.

        The model is continuous, so open vs closed bounds only matter for the
        degenerate single-value histogram, where the point mass is real.
        """
        if self.hi == self.lo:  # degenerate single bucket
            if x > self.lo or (inclusive and x == self.lo):
                return float(self.total())
            return 0.0
        if x < self.lo:
            return 0.0
        if x >= self.hi:
            return float(self.total())
        w = self.width
        b = min(int((x - self.lo) / w), self.bucket_count - 1)
        frac = min(1.0, (x - (self.lo + b * w)) / w)
        return float(sum(self.counts[:b])) + frac * self.counts[b]

    def mass_in(self, lo: Optional[float], hi: Optional[float],
                lo_open: bool = False, hi_open: bool = False) -> float:
        """Estimated count of values inside the interval."""
        upper = float(self.total()) if hi is None else self.mass_below(hi, inclusive=not hi_open)
        lower = 0.0 if lo is None else self.mass_below(lo, inclusive=lo_open)
        return max(0.0, upper - lower)

    def to_json(self) -> dict:
        return {
            "bucket_count": self.bucket_count,
            "lo": self.lo,
            "hi": self.hi,
            "counts": list(self.counts),
        }


@dataclass(frozen=True)
class ColumnStats:
    column_name: str
    kind: str
    row_count: int
    null_count: int
    ndv: int
    min: Any = None
    max: Any = None
    histogram: Optional[EquiWidthHistogram] = None
    top_values: tuple[tuple[Any, int], ...] = ()
    gini: Optional[float] = None

    def to_json(self) -> dict:
        def render(v: Any) -> Any:
            return v.isoformat() if isinstance(v, date) else v

        return {
            "column_name": self.column_name,
            "kind": self.kind,
            "row_count": self.row_count,
            "null_count": self.null_count,
            "ndv": self.ndv,
            "min": render(self.min),
            "max": render(self.max),
            "histogram": self.histogram.to_json() if self.histogram else None,
            "top_values": [[render(v), c] for v, c in self.top_values],
            "gini": self.gini,
        }


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


@dataclass
class Column:
    name: str
    kind: str
    values: list  # None marks NULL; dates are datetime.date

    _numeric: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def numeric(self) -> np.ndarray:
        """float64 view (NaN for NULL); dates become ordinals. Numeric kinds only."""
        if self.kind == "text":
            raise CatalogError(f"column {self.name!r} is text, no numeric view")
        if self._numeric is None:
            out = np.full(len(self.values), np.nan, dtype=np.float64)
            for i, v in enumerate(self.values):
                if v is not None:
                    out[i] = v.toordinal() if isinstance(v, date) else float(v)
            self._numeric = out
        return self._numeric

    def non_null(self) -> list:
        return [v for v in self.values if v is not None]


@dataclass
class Table:
    name: str
    schema: TableSchema
    columns: dict[str, Column]
    row_count: int

    def column(self, name: str) -> Column:
        try:
            return self.columns[name]
        except KeyError:
            raise CatalogError(f"no column {name!r} in table {self.name!r}") from None


class Catalog:
    """Registry of ingested tables plus cached per-column statistics."""

    def __init__(self, bucket_count: int = DEFAULT_BUCKET_COUNT) -> None:
        self.bucket_count = bucket_count
        self.tables: dict[str, Table] = {}
        self._stats: dict[tuple[str, int], dict[str, ColumnStats]] = {}

    def add(self, table: Table) -> None:
        self.tables[table.name] = table

    def table(self, name: str) -> Table:
        try:
            return self.tables[name]
        except KeyError:
            raise CatalogError(
                f"unknown table {name!r}; known: {sorted(self.tables)}"
            ) from None

    def table_names(self) -> list[str]:
        return sorted(self.tables)

    def stats(self, table_name: str, bucket_count: Optional[int] = None) -> dict[str, ColumnStats]:
        bc = bucket_count or self.bucket_count
        key = (table_name, bc)
        if key not in self._stats:
            table = self.table(table_name)
            self._stats[key] = {s.column_name: s for s in compute_stats(table, bc)}
        return self._stats[key]

    def column_stats(self, table_name: str, column: str) -> ColumnStats:
        stats = self.stats(table_name)
        if column not in stats:
            raise CatalogError(f"no column {column!r} in table {table_name!r}")
        return stats[column]


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


def _parse_int(tok: str) -> Optional[int]:
    try:
        return int(tok)
    except ValueError:
        return None


def _parse_real(tok: str) -> Optional[float]:
    try:
        v = float(tok)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _parse_date(tok: str) -> Optional[date]:
    try:
        return datetime.strptime(tok, "%Y-%m-%d").date()
    except ValueError:
        return None


def infer_kind(tokens: Iterable[str]) -> str:
    """Inference precedence: integer, real, date (YYYY-MM-DD), text."""
    saw_value = False
    could = {"integer": True, "real": True, "date": True}
    for tok in tokens:
        if tok in NULL_TOKENS:
            continue
        saw_value = True
        if could["integer"] and _parse_int(tok) is None:
            could["integer"] = False
        if could["real"] and _parse_real(tok) is None:
            could["real"] = False
        if could["date"] and _parse_date(tok) is None:
            could["date"] = False
        if not any(could.values()):
            return "text"
    if not saw_value:
        return "text"
    for kind in ("integer", "real", "date"):
        if could[kind]:
            return kind
    return "text"


def _convert(tok: str, kind: str) -> Any:
    if tok in NULL_TOKENS:
        return None
    if kind == "integer":
        v = _parse_int(tok)
        if v is None:
            raise IngestError(f"value {tok!r} is not an integer")
        return v
    if kind == "real":
        v = _parse_real(tok)
        if v is None:
            raise IngestError(f"value {tok!r} is not a real number")
        return v
    if kind == "date":
        v = _parse_date(tok)
        if v is None:
            raise IngestError(f"value {tok!r} is not a YYYY-MM-DD date")
        return v
    return tok


Source = Union[str, Path, io.TextIOBase]


def ingest_table(
    source: Source,
    schema_hint: Optional[TableSchema] = None,
    table_name: Optional[str] = None,
) -> Table:
    """Load a comma-delimited UTF-8 source (header row required) into memory.

    ``\\N`` and the empty string read as NULL. Column kinds come from the
    schema hint when given, otherwise from inference over all rows.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            raw = list(csv.reader(fh))
        default_name = Path(source).stem
    else:
        raw = list(csv.reader(source))
        default_name = "table"

    raw = [row for row in raw if row]  # csv yields [] for blank lines
    if not raw:
        raise IngestError("empty source: no header row")
    header, rows = raw[0], raw[1:]
    if not rows:
        raise IngestError("empty source: header but no data rows")

    ncols = len(header)
    for i, row in enumerate(rows):
        if len(row) != ncols:
            raise IngestError(
                f"ragged row {i}: expected {ncols} columns, found {len(row)}"
            )

    name = table_name or (schema_hint.table_name if schema_hint else default_name)

    if schema_hint is not None:
        hint_names = schema_hint.column_names()
        if hint_names != header:
            raise IngestError(
                f"schema hint columns {hint_names} do not match header {header}"
            )
        kinds = [schema_hint.kind_of(c) for c in header]
        schema = TableSchema(name, schema_hint.columns, schema_hint.primary_key)
    else:
        kinds = [infer_kind(row[i] for row in rows) for i in range(ncols)]
        schema = TableSchema(name, tuple(zip(header, kinds)))

    columns: dict[str, Column] = {}
    for i, (cname, kind) in enumerate(zip(header, kinds)):
        values = [_convert(row[i], kind) for row in rows]
        columns[cname] = Column(cname, kind, values)

    return Table(name=name, schema=schema, columns=columns, row_count=len(rows))


def table_from_columns(
    name: str,
    columns: Sequence[tuple[str, str, list]],
    primary_key: Optional[str] = None,
) -> Table:
    """Build a table directly from (name, kind, values) triples."""
    if not columns:
        raise IngestError("table needs at least one column")
    n = len(columns[0][2])
    for cname, _, values in columns:
        if len(values) != n:
            raise IngestError(f"column {cname!r} length {len(values)} != {n}")
    schema = TableSchema(name, tuple((c, k) for c, k, _ in columns), primary_key)
    cols = {c: Column(c, k, list(v)) for c, k, v in columns}
    return Table(name=name, schema=schema, columns=cols, row_count=n)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


def gini(frequencies: Sequence[int]) -> float:
    """Gini impurity 1 - sum(p_i^2) over the frequency vector."""
    total = sum(frequencies)
    if total <= 0:
        raise ValueError("gini needs at least one nonzero frequency")
    return 1.0 - sum((f / total) ** 2 for f in frequencies)


def _build_histogram(values: list, bucket_count: int) -> Optional[EquiWidthHistogram]:
    nums = [float(v.toordinal()) if isinstance(v, date) else float(v)
            for v in values if v is not None]
    if not nums:
        return None
    lo, hi = min(nums), max(nums)
    if lo == hi:
        return EquiWidthHistogram(1, lo, hi, (len(nums),))
    width = (hi - lo) / bucket_count
    counts = [0] * bucket_count
    for v in nums:
        b = min(int((v - lo) / width), bucket_count - 1)
        counts[b] += 1
    return EquiWidthHistogram(bucket_count, lo, hi, tuple(counts))


def compute_column_stats(column: Column, row_count: int, bucket_count: int) -> ColumnStats:
    values = column.non_null()
    null_count = row_count - len(values)
    freq = Counter(values)
    ndv = len(freq)

    if ndv == 0:
        return ColumnStats(column.name, column.kind, row_count, null_count, 0)

    g = gini(list(freq.values()))
    top: tuple[tuple[Any, int], ...] = ()
    histogram = None
    if column.kind == "text":
        ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
        top = tuple(ranked[:TOP_VALUES_LIMIT])
        mn = mx = None
    else:
        histogram = _build_histogram(values, bucket_count)
        mn, mx = min(values, key=literal_key), max(values, key=literal_key)

    return ColumnStats(
        column_name=column.name,
        kind=column.kind,
        row_count=row_count,
        null_count=null_count,
        ndv=ndv,
        min=mn,
        max=mx,
        histogram=histogram,
        top_values=top,
        gini=g,
    )


def compute_stats(table: Table, bucket_count: int = DEFAULT_BUCKET_COUNT) -> list[ColumnStats]:
    """Statistics for every column, in schema order. Deterministic."""
    if bucket_count < 1:
        raise ValueError("bucket_count must be >= 1")
    return [
        compute_column_stats(table.columns[name], table.row_count, bucket_count)
        for name in table.schema.column_names()
    ]


def stats_to_json(stats: Iterable[ColumnStats]) -> str:
    """Stable-key JSON dump of a stats list."""
    return json.dumps([s.to_json() for s in stats], sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# Selectivity
# ---------------------------------------------------------------------------


def _eq_selectivity(value: Any, stats: ColumnStats) -> float:
    if stats.ndv == 0:
        return 0.0
    for v, count in stats.top_values:
        if v == value:
            return count / stats.row_count
    return 1.0 / stats.ndv


def estimate_selectivity(predicate: Predicate, stats: ColumnStats) -> float:
    """Fraction of rows (including NULLs in the denominator) expected to match.

    eq uses top_values frequency when listed, else 1/NDV; in-lists sum and
    clamp; ranges take interpolated histogram mass. NULL rows never match.
    """
    if stats.ndv == 0:
        return 0.0

    if predicate.op == "eq":
        return min(1.0, _eq_selectivity(predicate.value, stats))

    if predicate.op == "in":
        total = sum(_eq_selectivity(v, stats) for v in predicate.values)
        return min(1.0, total)

    # range / between
    if stats.histogram is None:
        return DEFAULT_SELECTIVITY
    lo = None if predicate.lo is None else float(literal_key(predicate.lo))
    hi = None if predicate.hi is None else float(literal_key(predicate.hi))
    mass = stats.histogram.mass_in(lo, hi, predicate.lo_open, predicate.hi_open)
    return min(1.0, mass / stats.row_count)
