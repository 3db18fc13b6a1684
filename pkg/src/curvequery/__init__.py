"""curvequery: pattern search, recommendation, and usage analytics for
collections of line charts."""

from .analytics import MarkovSummary, analyze, centrality, count_transitions, to_dot
from .dataset import (
    ClassConstraint,
    Collection,
    Dataset,
    DatasetRegistry,
    DynamicClass,
    Series,
    ViewSpec,
    aggregate_class,
    build_collection,
    export_results,
    load_dataset,
    restrict_series_by_y,
)
from .engine import (
    MatchSpec,
    PatternQuery,
    RankedMatch,
    RankResult,
    distance,
    normalize,
    query_from_equation,
    query_from_series,
    query_from_sketch,
    query_from_upload,
    rank,
    resample,
    smooth,
)
from .equations import eval_expr, parse_equation
from .equations import to_text as equation_to_text
from .errors import (
    AmbiguityError,
    CurveQueryError,
    DegenerateSketchError,
    DomainError,
    EmptyClassError,
    NoDataError,
    NotFoundError,
    ParseError,
    SchemaError,
    ValidationError,
    VocabularyError,
)
from .filters import eval_filter, parse_filter, validate_filter
from .filters import to_text as filter_to_text
from .recommend import (
    KMeansResult,
    OutlierRef,
    Recommendation,
    RepresentativeTrend,
    kmeans,
    recommend,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "ClassConstraint",
    "Collection",
    "CurveQueryError",
    "Dataset",
    "DatasetRegistry",
    "DegenerateSketchError",
    "DomainError",
    "DynamicClass",
    "EmptyClassError",
    "KMeansResult",
    "MarkovSummary",
    "MatchSpec",
    "NoDataError",
    "NotFoundError",
    "OutlierRef",
    "ParseError",
    "PatternQuery",
    "RankResult",
    "RankedMatch",
    "Recommendation",
    "RepresentativeTrend",
    "SchemaError",
    "Series",
    "ValidationError",
    "ViewSpec",
    "VocabularyError",
    "aggregate_class",
    "analyze",
    "build_collection",
    "centrality",
    "count_transitions",
    "distance",
    "equation_to_text",
    "eval_expr",
    "eval_filter",
    "export_results",
    "filter_to_text",
    "kmeans",
    "load_dataset",
    "normalize",
    "parse_equation",
    "parse_filter",
    "query_from_equation",
    "query_from_series",
    "query_from_sketch",
    "query_from_upload",
    "rank",
    "recommend",
    "resample",
    "restrict_series_by_y",
    "smooth",
    "to_dot",
    "validate_filter",
]
