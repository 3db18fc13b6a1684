"""Tabular datasets and the visualization collections they induce.

A dataset is an immutable in-memory table loaded from CSV. A view
specification (x attribute, y attribute, group attribute) turns it into a
collection of series, one per group, which is what pattern matching and
recommendation operate on. Dynamic classes bucket rows by range constraints
and aggregate the bucket into a single series.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    AmbiguityError,
    EmptyClassError,
    NotFoundError,
    ParseError,
    SchemaError,
    ValidationError,
)
from .filters import FilterAst, eval_filter, validate_filter

MAX_ROWS = 5_000_000
MISSING_MARKERS = {"", "nan"}

CellValue = Union[float, str, None]


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_MARKERS


def _parse_number(cell: str) -> Optional[float]:
    """Parse a finite number, or None if the text is not one."""
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def format_group_key(value: CellValue) -> str:
    """Render a group cell as a stable series id."""
    if isinstance(value, float):
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "quantitative" or "categorical"
    inferred: bool = True


@dataclass
class Dataset:
    """An immutable table: typed columns plus rows keyed by column name.

    Quantitative cells are floats, categorical cells are strings, and
    missing cells are None. Every row has a slot for every column.
    """

    name: str
    columns: list[Column]
    rows: list[dict]

    def kinds(self) -> dict:
        return {c.name: c.kind for c in self.columns}

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise ValidationError(f"unknown attribute {name!r} in dataset {self.name!r}")

    def schema_summary(self) -> dict:
        return {
            "name": self.name,
            "rowCount": len(self.rows),
            "columns": [
                {"name": c.name, "kind": c.kind, "inferred": c.inferred}
                for c in self.columns
            ],
        }


def load_dataset(csv_bytes: bytes, name: str) -> Dataset:
    """Parse UTF-8 CSV with a header row into a typed Dataset.

    A column is quantitative iff every non-missing cell parses as a finite
    number; anything else makes it categorical. Empty cells and the literal
    "NaN" (any case) are missing.
    """
    if not name or not name.strip():
        raise ValidationError("dataset name must be nonempty")
    try:
        text = csv_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc.reason}") from None
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file: expected a header row") from None
    except csv.Error as exc:
        raise ParseError(str(exc)) from None
    header = [h.strip() for h in header]
    if any(not h for h in header):
        raise SchemaError("header has an empty column name")
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise SchemaError(f"duplicate column names: {', '.join(dupes)}")

    raw_rows: list[list[str]] = []
    try:
        for record in reader:
            if not record:
                continue  # tolerate blank lines
            if len(record) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(record)}",
                    line=reader.line_num,
                )
            raw_rows.append(record)
            if len(raw_rows) > MAX_ROWS:
                raise ValidationError(
                    f"dataset exceeds the {MAX_ROWS} row limit"
                )
    except csv.Error as exc:
        raise ParseError(str(exc), line=reader.line_num) from None
    if not raw_rows:
        raise ParseError("no data rows after the header")

    quantitative = [True] * len(header)
    for record in raw_rows:
        for j, cell in enumerate(record):
            if quantitative[j] and not _is_missing(cell):
                if _parse_number(cell) is None:
                    quantitative[j] = False

    columns = [
        Column(h, "quantitative" if q else "categorical")
        for h, q in zip(header, quantitative)
    ]
    rows = []
    for record in raw_rows:
        row = {}
        for col, cell in zip(columns, record):
            if _is_missing(cell):
                row[col.name] = None
            elif col.kind == "quantitative":
                row[col.name] = _parse_number(cell)
            else:
                row[col.name] = cell
        rows.append(row)
    return Dataset(name=name, columns=columns, rows=rows)


@dataclass(frozen=True)
class ViewSpec:
    """The (x, y, group) choice that induces a collection of series."""

    x_attr: str
    y_attr: str
    group_attr: str
    display: str = "line"  # "line" or "scatter"
    aggregate: str = "mean"  # duplicate-x rule: "none", "mean", or "median"

    def validate(self, ds: Dataset) -> None:
        names = {self.x_attr, self.y_attr, self.group_attr}
        if len(names) != 3:
            raise ValidationError("x, y, and group attributes must be distinct")
        for attr in (self.x_attr, self.y_attr):
            if ds.column(attr).kind != "quantitative":
                raise ValidationError(f"{attr!r} must be quantitative to plot")
        ds.column(self.group_attr)
        if self.display not in ("line", "scatter"):
            raise ValidationError(f"unknown display mode {self.display!r}")
        if self.aggregate not in ("none", "mean", "median"):
            raise ValidationError(f"unknown aggregate mode {self.aggregate!r}")


class Series:
    """One visualization: a group id and its x-sorted points."""

    def __init__(self, id: str, points: Sequence[tuple], source_count: int = 0):
        self.id = id
        self.points = [(float(x), float(y)) for x, y in points]
        self.source_count = source_count
        self._xs = None
        self._ys = None

    @property
    def xs(self) -> np.ndarray:
        if self._xs is None:
            self._xs = np.array([p[0] for p in self.points], dtype=float)
        return self._xs

    @property
    def ys(self) -> np.ndarray:
        if self._ys is None:
            self._ys = np.array([p[1] for p in self.points], dtype=float)
        return self._ys

    def __repr__(self):
        return f"Series({self.id!r}, {len(self.points)} points)"


@dataclass
class CollectionDiagnostics:
    rows_total: int = 0
    rows_filtered_out: int = 0
    rows_missing_excluded: int = 0
    dropped_group_ids: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "rowsTotal": self.rows_total,
            "rowsFilteredOut": self.rows_filtered_out,
            "rowsMissingExcluded": self.rows_missing_excluded,
            "droppedGroupIds": list(self.dropped_group_ids),
        }


@dataclass
class Collection:
    series: list
    diagnostics: CollectionDiagnostics

    def ids(self) -> list:
        return [s.id for s in self.series]

    def get(self, series_id: str) -> Series:
        for s in self.series:
            if s.id == series_id:
                return s
        raise NotFoundError(f"no series {series_id!r} in collection")


def _aggregate_duplicates(pairs, mode: str, group_id: str):
    """Collapse duplicate x within one group per the view's aggregate mode."""
    by_x: dict = {}
    for x, y in pairs:
        by_x.setdefault(x, []).append(y)
    out = []
    for x in sorted(by_x):
        ys = by_x[x]
        if len(ys) == 1:
            out.append((x, ys[0]))
        elif mode == "none":
            raise AmbiguityError(
                f"group {group_id!r} has {len(ys)} rows at x={x}; "
                "choose mean or median aggregation"
            )
        elif mode == "mean":
            out.append((x, sum(ys) / len(ys)))
        else:
            out.append((x, statistics.median(ys)))
    return out


def build_collection(
    ds: Dataset,
    view: ViewSpec,
    filter_ast: Optional[FilterAst] = None,
) -> Collection:
    """Materialize the collection of series induced by a view.

    Rows failing the filter are removed first; rows with a missing x, y, or
    group cell are then excluded and counted. Remaining rows are grouped by
    the group attribute, duplicate x collapsed per ``view.aggregate``, and
    groups with fewer than two points dropped into diagnostics. Series are
    ordered lexicographically by id.
    """
    view.validate(ds)
    if filter_ast is not None:
        validate_filter(filter_ast, ds)

    diags = CollectionDiagnostics(rows_total=len(ds.rows))
    groups: dict = {}
    counts: dict = {}
    for row in ds.rows:
        if filter_ast is not None and not eval_filter(filter_ast, row):
            diags.rows_filtered_out += 1
            continue
        x, y, g = row[view.x_attr], row[view.y_attr], row[view.group_attr]
        if x is None or y is None or g is None:
            diags.rows_missing_excluded += 1
            continue
        key = format_group_key(g)
        groups.setdefault(key, []).append((x, y))
        counts[key] = counts.get(key, 0) + 1

    series = []
    for key in sorted(groups):
        points = _aggregate_duplicates(groups[key], view.aggregate, key)
        if len(points) < 2:
            diags.dropped_group_ids.append(key)
            continue
        series.append(Series(key, points, source_count=counts[key]))
    return Collection(series=series, diagnostics=diags)


def restrict_series_by_y(
    collection: Collection,
    y_min: Optional[float] = None,
    y_max: Optional[float] = None,
) -> Collection:
    """Select the series whose y extremes stay inside [y_min, y_max].

    This is the series-level counterpart of a brushed y range: a series
    survives only if its minimum and maximum y both fall within the
    bounds. Dropped ids are appended to the diagnostics of the returned
    collection; the input collection is not modified.
    """
    if y_min is not None and y_max is not None and y_min > y_max:
        raise ValidationError(f"empty y range: {y_min} > {y_max}")
    kept = []
    dropped = []
    for s in collection.series:
        lo, hi = float(s.ys.min()), float(s.ys.max())
        if (y_min is not None and lo < y_min) or (y_max is not None and hi > y_max):
            dropped.append(s.id)
        else:
            kept.append(s)
    diags = CollectionDiagnostics(
        rows_total=collection.diagnostics.rows_total,
        rows_filtered_out=collection.diagnostics.rows_filtered_out,
        rows_missing_excluded=collection.diagnostics.rows_missing_excluded,
        dropped_group_ids=list(collection.diagnostics.dropped_group_ids) + dropped,
    )
    return Collection(series=kept, diagnostics=diags)


@dataclass(frozen=True)
class ClassConstraint:
    attr: str
    min: Optional[float] = None  # None means unbounded below
    max: Optional[float] = None

    def matches(self, value: CellValue) -> bool:
        if value is None or not isinstance(value, float):
            return False
        if self.min is not None and value < self.min:
            return False
        if self.max is not None and value > self.max:
            return False
        return True


@dataclass(frozen=True)
class DynamicClass:
    """A user-defined bucket of rows: the conjunction of range constraints."""

    name: str
    constraints: tuple
    aggregate: str = "mean"  # cross-member aggregation: "mean" or "median"

    def validate(self, ds: Dataset) -> None:
        if not self.name or not self.name.strip():
            raise ValidationError("dynamic class name must be nonempty")
        if not self.constraints:
            raise ValidationError(f"class {self.name!r} has no constraints")
        if self.aggregate not in ("mean", "median"):
            raise ValidationError(f"unknown aggregate mode {self.aggregate!r}")
        for c in self.constraints:
            if ds.column(c.attr).kind != "quantitative":
                raise ValidationError(
                    f"class constraint on {c.attr!r} needs a quantitative column"
                )
            if c.min is not None and c.max is not None and c.min > c.max:
                raise ValidationError(
                    f"class {self.name!r}: min > max on {c.attr!r}"
                )

    def member_row(self, row: dict) -> bool:
        return all(c.matches(row.get(c.attr)) for c in self.constraints)


def aggregate_class(
    ds: Dataset,
    cls: DynamicClass,
    view: ViewSpec,
    resample_n: Optional[int] = None,
) -> Series:
    """Aggregate one dynamic class into a single series.

    Member rows form series per the view's group attribute; each member
    series is resampled onto a common length so members with different x
    supports align, then y is aggregated per position (mean or median).
    The result uses a normalized [0, 1] x grid.
    """
    from .engine import DEFAULT_RESAMPLE_N, resample

    cls.validate(ds)
    view.validate(ds)
    n = DEFAULT_RESAMPLE_N if resample_n is None else int(resample_n)

    member = Dataset(
        name=ds.name,
        columns=ds.columns,
        rows=[r for r in ds.rows if cls.member_row(r)],
    )
    if not member.rows:
        raise EmptyClassError(f"class {cls.name!r} matched no rows")
    collection = build_collection(member, view)
    if not collection.series:
        raise EmptyClassError(
            f"class {cls.name!r} matched rows but produced no series "
            "with at least two points"
        )

    stack = np.stack([resample(s.points, n) for s in collection.series])
    if cls.aggregate == "mean":
        ys = stack.mean(axis=0)
    else:
        ys = np.median(stack, axis=0)
    grid = np.linspace(0.0, 1.0, n)
    contributing = sum(s.source_count for s in collection.series)
    return Series(cls.name, list(zip(grid, ys)), source_count=contributing)


def export_results(payload, collection=None, fmt: str = "csv") -> bytes:
    """Serialize ranked matches or a recommendation as CSV bytes.

    Ranked matches export as (rank, seriesId, distance). Recommendations
    export in long form as (kind, index, x, y): one row per centroid point
    per representative, then one row per point of each outlier series,
    which requires the source ``collection`` to resolve outlier points.
    Row order is deterministic.
    """
    if fmt != "csv":
        raise ValidationError(f"unsupported export format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")

    if isinstance(payload, (list, tuple)):
        if not payload:
            raise ValidationError("nothing to export: empty match list")
        writer.writerow(["rank", "seriesId", "distance"])
        for m in payload:
            writer.writerow([m.rank, m.series_id, repr(m.distance)])
        return buf.getvalue().encode("utf-8")

    rec = payload  # Recommendation
    if not rec.representatives and not rec.outliers:
        raise ValidationError("nothing to export: empty recommendation")
    writer.writerow(["kind", "index", "x", "y"])
    for i, rep in enumerate(rec.representatives):
        grid = np.linspace(0.0, 1.0, len(rep.centroid))
        for x, y in zip(grid, rep.centroid):
            writer.writerow(["representative", i, repr(float(x)), repr(float(y))])
    if rec.outliers and collection is None:
        raise ValidationError("exporting outliers requires the source collection")
    for i, out in enumerate(rec.outliers):
        series = (
            collection.get(out.series_id)
            if isinstance(collection, Collection)
            else next(s for s in collection if s.id == out.series_id)
        )
        for x, y in series.points:
            writer.writerow(["outlier", i, repr(x), repr(y)])
    return buf.getvalue().encode("utf-8")


class DatasetRegistry:
    """Named datasets; registration is serialized, reads are lock-free."""

    def __init__(self):
        self._lock = threading.Lock()
        self._datasets: dict = {}

    def register(self, ds: Dataset) -> None:
        with self._lock:
            self._datasets[ds.name] = ds

    def get(self, name: str) -> Dataset:
        ds = self._datasets.get(name)
        if ds is None:
            raise NotFoundError(f"no dataset named {name!r}")
        return ds

    def names(self) -> list:
        return sorted(self._datasets)

    def __contains__(self, name: str) -> bool:
        return name in self._datasets
