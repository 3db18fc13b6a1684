"""Pattern matching over collections of series.

Every query, however it was authored (sketch, equation, uploaded
pattern, existing series), reduces to a polyline with strictly
ascending x. Matching runs the same pipeline on the query and on every
candidate series:

    restrict to the x range -> resample to a fixed length -> smooth
    -> normalize -> distance

and returns candidates ranked by ascending distance, ties broken by
ascending series id. Candidates that cannot complete the pipeline
(fewer than two points after restriction) are skipped and reported in
diagnostics rather than raising.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .equations import ExprAst, eval_expr, parse_equation, to_text
from .errors import (
    DegenerateSketchError,
    DomainError,
    NotFoundError,
    ParseError,
    ValidationError,
)

DEFAULT_RESAMPLE_N = 50

METRICS = ("euclidean", "slope")
NORMALIZE_MODES = ("zscore", "minmax", "none")
SMOOTH_METHODS = ("none", "movingAverage", "exponential")


def _window_size(param) -> int:
    """Validate a moving-average window: an odd integer >= 1."""
    w = int(param)
    if w != param or w < 1:
        raise ValidationError("moving-average window must be an integer >= 1")
    if w % 2 == 0:
        raise ValidationError(f"moving-average window must be odd, got {w}")
    return w


@dataclass(frozen=True)
class MatchSpec:
    """All knobs governing how a query is compared against candidates.

    smooth_param is the moving-average window (odd integer) or the
    exponential weight alpha in (0, 1], depending on smooth_method.
    When x_normalize is set, each polyline's x extent is mapped onto
    [0, 1] and x_range is read in those coordinates; otherwise x_range
    is in raw x units.
    """

    metric: str = "euclidean"
    normalize: str = "zscore"
    smooth_method: str = "none"
    smooth_param: float = 1
    resample_n: int = DEFAULT_RESAMPLE_N
    x_range: Optional[tuple] = None
    x_normalize: bool = True

    def validate(self) -> None:
        if self.metric not in METRICS:
            raise ValidationError(f"unknown metric {self.metric!r}")
        if self.normalize not in NORMALIZE_MODES:
            raise ValidationError(f"unknown normalize mode {self.normalize!r}")
        if self.smooth_method not in SMOOTH_METHODS:
            raise ValidationError(f"unknown smoothing method {self.smooth_method!r}")
        if self.smooth_method == "movingAverage":
            if _window_size(self.smooth_param) > self.resample_n:
                raise ValidationError(
                    f"window {int(self.smooth_param)} exceeds the resample "
                    f"length {self.resample_n}"
                )
        if self.smooth_method == "exponential":
            if not (0.0 < self.smooth_param <= 1.0):
                raise ValidationError("exponential alpha must be in (0, 1]")
        floor = 3 if self.metric == "slope" else 2
        if not isinstance(self.resample_n, int) or self.resample_n < floor:
            raise ValidationError(
                f"resample length must be an integer >= {floor} for {self.metric}"
            )
        if self.x_range is not None:
            lo, hi = self.x_range
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise ValidationError("x range must be a finite (lo, hi) with lo < hi")


@dataclass(frozen=True)
class PatternQuery:
    """A query polyline plus where it came from.

    origin_id is set when the query was lifted from a series;
    origin_text carries the equation text or upload filename.
    """

    source: str  # sketch | equation | upload | series
    points: tuple
    origin_id: Optional[str] = None
    origin_text: Optional[str] = None


@dataclass(frozen=True)
class RankedMatch:
    series_id: str
    distance: float
    rank: int


@dataclass
class RankDiagnostics:
    skipped: list = field(default_factory=list)  # {"seriesId", "reason"} dicts
    constant_ids: list = field(default_factory=list)  # flattened by normalize
    query_constant: bool = False

    def as_dict(self) -> dict:
        return {
            "skipped": list(self.skipped),
            "constantIds": list(self.constant_ids),
            "queryConstant": self.query_constant,
        }


@dataclass
class RankResult:
    matches: list
    diagnostics: RankDiagnostics


def _validated_points(points, what: str) -> tuple:
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValidationError(f"{what} needs at least 2 points")
    for (x, y) in pts:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError(f"{what} points must be finite")
    for (x1, _), (x2, _) in zip(pts, pts[1:]):
        if x1 >= x2:
            raise ValidationError(f"{what} x values must be strictly ascending")
    return tuple(pts)


def query_from_sketch(canvas_points, canvas_w: float, canvas_h: float) -> PatternQuery:
    """Turn a freehand canvas stroke into a query.

    Screen y grows downward, so y is flipped; both axes are scaled to
    [0, 1]. Backtracking strokes are cleaned up by keeping the last y
    drawn at each x, then sorting ascending.
    """
    if canvas_w <= 0 or canvas_h <= 0:
        raise ValidationError("canvas dimensions must be positive")
    pts = list(canvas_points)
    if len(pts) < 2:
        raise DegenerateSketchError("a sketch needs at least 2 points")
    by_x: dict = {}
    for px, py in pts:
        x = float(px) / canvas_w
        y = 1.0 - float(py) / canvas_h
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError("sketch points must be finite")
        by_x[x] = y  # last write wins
    cleaned = sorted(by_x.items())
    if len(cleaned) < 2:
        raise DegenerateSketchError(
            "sketch collapses to fewer than 2 distinct x positions"
        )
    return PatternQuery(source="sketch", points=tuple(cleaned))


def query_from_equation(
    ast: Union[ExprAst, str],
    xmin: float = 0.0,
    xmax: float = 1.0,
    n: int = DEFAULT_RESAMPLE_N,
) -> PatternQuery:
    """Sample y = f(x) at n evenly spaced x in [xmin, xmax].

    Accepts a parsed expression or equation text. Evaluation that fails
    or produces a non-finite value raises DomainError naming the x.
    """
    if isinstance(ast, str):
        ast = parse_equation(ast)
    if not (math.isfinite(xmin) and math.isfinite(xmax)) or xmin >= xmax:
        raise ValidationError("equation range must satisfy xmin < xmax")
    if n < 2:
        raise ValidationError("equation sampling needs n >= 2")
    pts = []
    for x in np.linspace(xmin, xmax, n):
        y = eval_expr(ast, float(x))
        if not math.isfinite(y):
            raise DomainError(f"equation produced a non-finite value at x={float(x)}")
        pts.append((float(x), y))
    return PatternQuery(
        source="equation", points=tuple(pts), origin_text=to_text(ast)
    )


def query_from_upload(csv_bytes: bytes, filename: Optional[str] = None) -> PatternQuery:
    """Parse an uploaded two-column x,y CSV into a query.

    A non-numeric first row is treated as a header. Duplicate x values
    are a format error; rows are sorted by x.
    """
    try:
        text = csv_bytes.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError("pattern upload must be UTF-8 CSV") from None
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1) if r]
    if not rows:
        raise ParseError("pattern upload is empty")
    if len(rows[0][1]) >= 2:
        try:
            float(rows[0][1][0]), float(rows[0][1][1])
        except ValueError:
            rows = rows[1:]  # header row
    pts = []
    for i, r in rows:
        if len(r) != 2:
            raise ParseError(f"expected 2 fields, got {len(r)}", line=i)
        try:
            pts.append((float(r[0]), float(r[1])))
        except ValueError:
            raise ParseError("non-numeric cell", line=i) from None
    pts.sort()
    for (x1, _), (x2, _) in zip(pts, pts[1:]):
        if x1 == x2:
            raise ParseError(f"duplicate x value {x1}")
    return PatternQuery(
        source="upload",
        points=_validated_points(pts, "pattern upload"),
        origin_text=filename,
    )


def query_from_series(series_id: str, collection) -> PatternQuery:
    """Use an existing series as the query (drag-and-drop matching)."""
    if hasattr(collection, "get"):
        series = collection.get(series_id)
    else:
        series = next((s for s in collection if s.id == series_id), None)
        if series is None:
            raise NotFoundError(f"no series {series_id!r} in collection")
    return PatternQuery(
        source="series",
        points=_validated_points(series.points, f"series {series_id!r}"),
        origin_id=series_id,
    )


def resample(points, n: int) -> np.ndarray:
    """Piecewise-linear resample of a polyline onto n even x positions.

    The grid spans the polyline's own x extent with exact endpoints, so
    two series resampled to the same n are positionally comparable
    regardless of their units.
    """
    if n < 2:
        raise ValidationError("resample needs n >= 2")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if len(xs) < 2:
        raise ValidationError("resample needs at least 2 points")
    grid = np.linspace(xs[0], xs[-1], n)
    return np.interp(grid, xs, ys)


def _smooth_matrix(mat: np.ndarray, method: str, param) -> np.ndarray:
    if method == "none":
        return mat
    n = mat.shape[1]
    if method == "movingAverage":
        w = _window_size(param)
        if w > n:
            raise ValidationError(f"window {w} exceeds the vector length {n}")
        if w == 1:
            return mat
        half = (w - 1) // 2
        # mean over [max(0, i-half), min(n-1, i+half)] via prefix sums
        prefix = np.zeros((mat.shape[0], n + 1))
        np.cumsum(mat, axis=1, out=prefix[:, 1:])
        idx = np.arange(n)
        lo = np.maximum(0, idx - half)
        hi = np.minimum(n - 1, idx + half)
        return (prefix[:, hi + 1] - prefix[:, lo]) / (hi - lo + 1)
    if method == "exponential":
        a = float(param)
        if not (0.0 < a <= 1.0):
            raise ValidationError("exponential alpha must be in (0, 1]")
        out = np.empty_like(mat)
        out[:, 0] = mat[:, 0]
        for i in range(1, n):
            out[:, i] = a * mat[:, i] + (1.0 - a) * out[:, i - 1]
        return out
    raise ValidationError(f"unknown smoothing method {method!r}")


def _normalize_matrix(mat: np.ndarray, mode: str):
    """Normalize each row; returns (matrix, boolean mask of constant rows)."""
    if mode == "none":
        return mat, np.zeros(mat.shape[0], dtype=bool)
    if mode == "zscore":
        mean = mat.mean(axis=1, keepdims=True)
        std = mat.std(axis=1, keepdims=True)  # population std
        flat = std[:, 0] == 0.0
        std[flat] = 1.0
        return (mat - mean) / std, flat
    if mode == "minmax":
        lo = mat.min(axis=1, keepdims=True)
        hi = mat.max(axis=1, keepdims=True)
        span = hi - lo
        flat = span[:, 0] == 0.0
        span[flat] = 1.0
        return (mat - lo) / span, flat
    raise ValidationError(f"unknown normalize mode {mode!r}")


def smooth(values, method: str, param=1) -> np.ndarray:
    """Smooth one vector.

    movingAverage: mean over a centered window of odd width, shrunk
    symmetrically where it would overrun the ends. exponential:
    s1 = v1, si = param * vi + (1 - param) * s(i-1). Length preserved.
    """
    v = np.asarray(values, dtype=float)
    return _smooth_matrix(v[None, :], method, param)[0]


def normalize(values, mode: str) -> np.ndarray:
    """Normalize one vector; a constant vector maps to all zeros."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValidationError("normalize needs a nonempty vector")
    return _normalize_matrix(v[None, :], mode)[0][0]


def distance(a, b, metric: str = "euclidean") -> float:
    """Distance between two equal-length vectors.

    euclidean is the L2 distance; slope is the L2 distance between
    first-difference vectors, which ignores vertical offsets entirely.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    floor = 3 if metric == "slope" else 2
    if a.shape[0] < floor:
        raise ValidationError(f"{metric} distance needs vectors of length >= {floor}")
    if metric == "slope":
        a, b = np.diff(a), np.diff(b)
    elif metric != "euclidean":
        raise ValidationError(f"unknown metric {metric!r}")
    return float(np.sqrt(((a - b) ** 2).sum()))


def _restrict(xs: np.ndarray, ys: np.ndarray, lo: float, hi: float, x_normalize: bool):
    """Keep the points whose (possibly extent-normalized) x lies in [lo, hi]."""
    if x_normalize:
        span = xs[-1] - xs[0]
        pos = (xs - xs[0]) / span if span > 0 else np.zeros_like(xs)
    else:
        pos = xs
    keep = (pos >= lo) & (pos <= hi)
    return xs[keep], ys[keep]


def rank(
    query: PatternQuery,
    collection: Sequence,
    spec: Optional[MatchSpec] = None,
    top_k: Optional[int] = None,
) -> RankResult:
    """Rank candidate series by distance to the query, ascending.

    Ties are broken by ascending series id and ranks run 1..K with no
    gaps, so identical state always yields identical output. top_k=None
    returns all candidates that completed the pipeline.
    """
    spec = spec or MatchSpec()
    spec.validate()
    collection = list(getattr(collection, "series", collection))
    if not collection:
        raise ValidationError("collection is empty")
    if top_k is not None and top_k < 1:
        raise ValidationError("topK must be >= 1")
    diags = RankDiagnostics()

    q_xs = np.array([p[0] for p in query.points], dtype=float)
    q_ys = np.array([p[1] for p in query.points], dtype=float)
    if spec.x_range is not None:
        lo, hi = spec.x_range
        q_xs, q_ys = _restrict(q_xs, q_ys, lo, hi, spec.x_normalize)
        if len(q_xs) < 2 or q_xs[0] == q_xs[-1]:
            raise ValidationError(
                "x range leaves fewer than 2 query points; it must overlap "
                "the query's x extent"
            )

    kept: list = []
    rows: list = []
    for s in collection:
        xs = np.array([p[0] for p in s.points], dtype=float)
        ys = np.array([p[1] for p in s.points], dtype=float)
        if spec.x_range is not None:
            xs, ys = _restrict(xs, ys, spec.x_range[0], spec.x_range[1], spec.x_normalize)
        if len(xs) < 2 or xs[0] == xs[-1]:
            diags.skipped.append(
                {"seriesId": s.id, "reason": "fewer than 2 points in range"}
            )
            continue
        grid = np.linspace(xs[0], xs[-1], spec.resample_n)
        rows.append(np.interp(grid, xs, ys))
        kept.append(s.id)

    if not rows:
        raise ValidationError("the x range excluded every series in the collection")

    q_grid = np.linspace(q_xs[0], q_xs[-1], spec.resample_n)
    q_vec = np.interp(q_grid, q_xs, q_ys)
    q_vec = _smooth_matrix(q_vec[None, :], spec.smooth_method, spec.smooth_param)
    q_vec, q_flat = _normalize_matrix(q_vec, spec.normalize)
    diags.query_constant = bool(q_flat[0])

    mat = np.stack(rows)
    mat = _smooth_matrix(mat, spec.smooth_method, spec.smooth_param)
    mat, flat = _normalize_matrix(mat, spec.normalize)
    diags.constant_ids = [sid for sid, f in zip(kept, flat) if f]

    q_row = q_vec[0]
    if spec.metric == "slope":
        dist = np.sqrt(((np.diff(mat, axis=1) - np.diff(q_row)) ** 2).sum(axis=1))
    else:
        dist = np.sqrt(((mat - q_row) ** 2).sum(axis=1))
    ids = np.array(kept)
    order = np.lexsort((ids, dist))
    if top_k is not None:
        order = order[:top_k]
    matches = [
        RankedMatch(series_id=str(ids[j]), distance=float(dist[j]), rank=i + 1)
        for i, j in enumerate(order)
    ]
    return RankResult(matches=matches, diagnostics=diags)
