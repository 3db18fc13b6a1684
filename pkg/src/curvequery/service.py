"""HTTP/JSON service binding datasets, matching, recommendations,
dynamic classes, export, and interaction-event ingestion.

Sessions are in-memory with an idle TTL; datasets and event logs are
persisted under the data directory (CSV files and newline-delimited
JSON respectively), so event logs outlive the sessions that wrote them.
Endpoints are synchronous and run on the server's worker threads;
nothing here blocks on another session's work.
"""

from __future__ import annotations

import json
import re
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, ConfigDict

from . import analytics
from .dataset import (
    ClassConstraint,
    Collection,
    Dataset,
    DatasetRegistry,
    DynamicClass,
    ViewSpec,
    aggregate_class,
    build_collection,
    export_results,
    load_dataset,
)
from .engine import (
    MatchSpec,
    query_from_equation,
    query_from_series,
    query_from_sketch,
    query_from_upload,
    rank,
)
from .errors import CurveQueryError, NoDataError, NotFoundError, ValidationError
from .filters import parse_filter, to_text as filter_to_text, validate_filter
from .recommend import recommend

DISPLAY_POINT_CAP = 200
DEFAULT_SESSION_TTL = 3600.0

_STATUS_BY_CODE = {"not_found": 404}  # everything else client-fault -> 422

# dataset names double as file stems under data_dir/datasets
_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


def downsample_points(points, cap: int = DISPLAY_POINT_CAP) -> list:
    """Thin a polyline to at most cap points for transport, keeping the
    endpoints; full resolution stays server-side."""
    pts = list(points)
    if len(pts) <= cap:
        return [[float(x), float(y)] for x, y in pts]
    idx = np.linspace(0, len(pts) - 1, cap).round().astype(int)
    return [[float(pts[i][0]), float(pts[i][1])] for i in np.unique(idx)]


class ViewBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    x: str
    y: str
    group: str
    display: str = "line"
    aggregate: str = "mean"


class FilterBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    filter: Optional[str] = None  # null clears the filter


class MatchSpecBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    metric: str = "euclidean"
    normalize: str = "zscore"
    smoothMethod: str = "none"
    smoothParam: float = 1
    resampleN: int = 50
    xNormalize: bool = True
    xRange: Optional[list] = None
    topK: int = 10

    def to_spec(self) -> MatchSpec:
        x_range = tuple(self.xRange) if self.xRange else None
        if x_range is not None and len(x_range) != 2:
            raise ValidationError("xRange must be [lo, hi]")
        spec = MatchSpec(
            metric=self.metric,
            normalize=self.normalize,
            smooth_method=self.smoothMethod,
            smooth_param=self.smoothParam,
            resample_n=self.resampleN,
            x_normalize=self.xNormalize,
            x_range=x_range,
        )
        spec.validate()
        if self.topK < 1:
            raise ValidationError("topK must be >= 1")
        return spec


class SessionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    dataset: str


class QueryBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    source: str  # sketch | equation | upload | series
    payload: dict


class ConstraintBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    attr: str
    min: Optional[float] = None
    max: Optional[float] = None


class ClassBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    name: str
    constraints: list
    aggregate: str = "mean"


class EventBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    sessionId: str
    feature: str
    timestamp: Optional[int] = None  # ms epoch; server time when omitted
    breakMarker: bool = False
    domain: Optional[str] = None


class Session:
    def __init__(self, session_id: str, dataset: str):
        self.id = session_id
        self.dataset = dataset
        self.view: Optional[ViewSpec] = None
        self.filter_text: Optional[str] = None
        self.filter_ast = None
        self.match_spec = MatchSpec()
        self.top_k = 10
        self.classes: dict = {}
        self.last_matches = None
        self.last_recommendation = None
        self.last_collection: Optional[Collection] = None
        self._collection_key = None
        self.lock = threading.Lock()
        self.touched = time.monotonic()


class AppState:
    """Everything the endpoints share: registry, sessions, event log."""

    def __init__(self, data_dir, max_upload_mb: float, session_ttl: float):
        self.data_dir = Path(data_dir)
        self.max_upload_bytes = int(max_upload_mb * 1024 * 1024)
        self.session_ttl = session_ttl
        self.registry = DatasetRegistry()
        self.sessions: dict = {}
        self.sessions_lock = threading.Lock()
        self.events_lock = threading.Lock()
        (self.data_dir / "datasets").mkdir(parents=True, exist_ok=True)
        (self.data_dir / "events").mkdir(parents=True, exist_ok=True)
        for path in sorted((self.data_dir / "datasets").glob("*.csv")):
            self.registry.register(load_dataset(path.read_bytes(), path.stem))

    def persist_dataset(self, name: str, csv_bytes: bytes) -> None:
        (self.data_dir / "datasets" / f"{name}.csv").write_bytes(csv_bytes)

    def events_path(self, session_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in session_id)
        return self.data_dir / "events" / f"{safe}.ndjson"

    def append_event(self, event: dict) -> None:
        line = json.dumps(event, sort_keys=True)
        with self.events_lock:
            with self.events_path(event["sessionId"]).open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def read_events(self, session_id: str) -> list:
        path = self.events_path(session_id)
        if not path.exists():
            raise NotFoundError(f"no events recorded for session {session_id!r}")
        return [json.loads(line) for line in path.read_text("utf-8").splitlines() if line]

    def new_session(self, dataset: str) -> Session:
        self.registry.get(dataset)  # 404 on unknown name
        session = Session(uuid.uuid4().hex, dataset)
        with self.sessions_lock:
            self._prune()
            self.sessions[session.id] = session
        return session

    def session(self, session_id: str) -> Session:
        with self.sessions_lock:
            self._prune()
            session = self.sessions.get(session_id)
            if session is None:
                raise NotFoundError(f"no session {session_id!r}")
            session.touched = time.monotonic()
            return session

    def _prune(self) -> None:
        cutoff = time.monotonic() - self.session_ttl
        for sid in [s for s, sess in self.sessions.items() if sess.touched < cutoff]:
            del self.sessions[sid]


def _collection_for(state: AppState, session: Session) -> Collection:
    """The session's current collection, cached until view/filter change."""
    if session.view is None:
        raise ValidationError("set a view before querying")
    ds = state.registry.get(session.dataset)
    key = (session.dataset, session.view, session.filter_text)
    if session.last_collection is None or session._collection_key != key:
        session.last_collection = build_collection(ds, session.view, session.filter_ast)
        session._collection_key = key
    return session.last_collection


def _build_query(session: Session, collection: Collection, body: QueryBody):
    payload = body.payload
    if body.source == "sketch":
        points = payload.get("points")
        if not isinstance(points, list):
            raise ValidationError("sketch payload needs a points list")
        try:
            w = float(payload["canvasW"])
            h = float(payload["canvasH"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError(
                "sketch payload needs numeric canvasW and canvasH"
            ) from None
        return query_from_sketch([(p[0], p[1]) for p in points], w, h)
    if body.source == "equation":
        text = payload.get("text")
        if not isinstance(text, str):
            raise ValidationError("equation payload needs text")
        x_range = payload.get("xRange") or session.match_spec.x_range or (0.0, 1.0)
        if len(x_range) != 2:
            raise ValidationError("equation xRange must be [lo, hi]")
        return query_from_equation(
            text, float(x_range[0]), float(x_range[1]),
            n=session.match_spec.resample_n,
        )
    if body.source == "upload":
        csv_text = payload.get("csv")
        if not isinstance(csv_text, str):
            raise ValidationError("upload payload needs csv text")
        return query_from_upload(
            csv_text.encode("utf-8"), filename=payload.get("filename")
        )
    if body.source == "series":
        series_id = payload.get("seriesId")
        if not isinstance(series_id, str):
            raise ValidationError("series payload needs seriesId")
        return query_from_series(series_id, collection)
    raise ValidationError(f"unknown query source {body.source!r}")


def create_app(
    data_dir,
    max_upload_mb: float = 64.0,
    session_ttl: float = DEFAULT_SESSION_TTL,
) -> FastAPI:
    app = FastAPI(title="curvequery", docs_url=None, redoc_url=None)
    # the browser UI is served from its own origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = AppState(data_dir, max_upload_mb, session_ttl)
    app.state.curvequery = state

    @app.exception_handler(CurveQueryError)
    def _domain_error(request: Request, exc: CurveQueryError):
        body = {"code": exc.code, "message": exc.message}
        position = getattr(exc, "position", None)
        if position is not None:
            body["position"] = position  # "line:col"
        return JSONResponse(status_code=_STATUS_BY_CODE.get(exc.code, 422), content=body)

    @app.exception_handler(RequestValidationError)
    def _schema_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = ".".join(str(p) for p in first.get("loc", ()))
        msg = f"{loc}: {first.get('msg', 'invalid request body')}"
        return JSONResponse(status_code=422, content={"code": "validation", "message": msg})

    @app.post("/datasets", status_code=201)
    async def upload_dataset(request: Request, name: str = Query(...)):
        ctype = request.headers.get("content-type", "").split(";")[0].strip()
        if ctype != "text/csv":
            return JSONResponse(
                status_code=415,
                content={"code": "unsupported_media_type",
                         "message": f"expected text/csv, got {ctype or 'none'}"},
            )
        if not _NAME_RE.match(name):
            raise ValidationError(
                "dataset name must be alphanumeric with ._- separators"
            )
        body = await request.body()
        if len(body) > state.max_upload_bytes:
            return JSONResponse(
                status_code=413,
                content={"code": "too_large",
                         "message": f"upload exceeds {state.max_upload_bytes} bytes"},
            )
        ds = load_dataset(body, name)
        state.registry.register(ds)
        state.persist_dataset(name, body)
        return ds.schema_summary()

    @app.get("/datasets")
    def list_datasets():
        return {"datasets": state.registry.names()}

    @app.get("/datasets/{name}/schema")
    def dataset_schema(name: str):
        return state.registry.get(name).schema_summary()

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionBody):
        session = state.new_session(body.dataset)
        return {"sessionId": session.id, "dataset": session.dataset}

    @app.put("/session/{sid}/view")
    def put_view(sid: str, body: ViewBody):
        session = state.session(sid)
        ds = state.registry.get(session.dataset)
        view = ViewSpec(
            x_attr=body.x, y_attr=body.y, group_attr=body.group,
            display=body.display, aggregate=body.aggregate,
        )
        view.validate(ds)
        with session.lock:
            session.view = view
        return {"x": view.x_attr, "y": view.y_attr, "group": view.group_attr,
                "display": view.display, "aggregate": view.aggregate}

    @app.put("/session/{sid}/filter")
    def put_filter(sid: str, body: FilterBody):
        session = state.session(sid)
        ds = state.registry.get(session.dataset)
        if body.filter is None:
            with session.lock:
                session.filter_text = None
                session.filter_ast = None
            return {"filter": None}
        ast = parse_filter(body.filter)
        validate_filter(ast, ds)
        with session.lock:
            session.filter_text = body.filter
            session.filter_ast = ast
        return {"filter": filter_to_text(ast)}

    @app.put("/session/{sid}/matchspec")
    def put_matchspec(sid: str, body: MatchSpecBody):
        session = state.session(sid)
        spec = body.to_spec()
        with session.lock:
            session.match_spec = spec
            session.top_k = body.topK
        return body.model_dump()

    @app.get("/session/{sid}/collection")
    def get_collection(sid: str):
        """Debug view of the series the session currently matches against."""
        session = state.session(sid)
        with session.lock:
            collection = _collection_for(state, session)
        return {
            "seriesIds": collection.ids(),
            "series": [
                {"seriesId": s.id, "pointCount": len(s.points),
                 "points": downsample_points(s.points)}
                for s in collection.series
            ],
            "diagnostics": collection.diagnostics.as_dict(),
        }

    @app.post("/session/{sid}/query")
    def post_query(sid: str, body: QueryBody):
        session = state.session(sid)
        with session.lock:
            collection = _collection_for(state, session)
            query = _build_query(session, collection, body)
            result = rank(query, collection.series, session.match_spec, session.top_k)
            session.last_matches = result.matches
        return {
            "query": {"source": query.source, "points": downsample_points(query.points)},
            "matches": [
                {
                    "rank": m.rank,
                    "seriesId": m.series_id,
                    "distance": m.distance,
                    "points": downsample_points(collection.get(m.series_id).points),
                }
                for m in result.matches
            ],
            "diagnostics": result.diagnostics.as_dict(),
        }

    @app.get("/session/{sid}/recommendations")
    def get_recommendations(sid: str, k: int = 3, m: int = 3, seed: int = 7):
        session = state.session(sid)
        with session.lock:
            collection = _collection_for(state, session)
            rec = recommend(collection.series, session.match_spec, k=k, m=m, seed=seed)
            session.last_recommendation = rec
        payload = rec.as_dict()
        for entry in payload["outliers"]:
            entry["points"] = downsample_points(collection.get(entry["seriesId"]).points)
        for entry in payload["representatives"]:
            entry["points"] = downsample_points(
                collection.get(entry["nearestMemberId"]).points
            )
        return payload

    @app.post("/session/{sid}/classes", status_code=201)
    def post_class(sid: str, body: ClassBody):
        session = state.session(sid)
        ds = state.registry.get(session.dataset)
        constraints = tuple(
            ClassConstraint(attr=c.attr, min=c.min, max=c.max)
            for c in (ConstraintBody(**raw) for raw in body.constraints)
        )
        cls = DynamicClass(name=body.name, constraints=constraints, aggregate=body.aggregate)
        cls.validate(ds)
        with session.lock:
            session.classes[cls.name] = cls
        return {"name": cls.name, "classCount": len(session.classes)}

    @app.get("/session/{sid}/classes/aggregates")
    def class_aggregates(sid: str):
        session = state.session(sid)
        if session.view is None:
            raise ValidationError("set a view before aggregating classes")
        ds = state.registry.get(session.dataset)
        with session.lock:
            classes = sorted(session.classes.values(), key=lambda c: c.name)
            out = []
            for cls in classes:
                series = aggregate_class(ds, cls, session.view)
                out.append({
                    "name": cls.name,
                    "aggregate": cls.aggregate,
                    "memberRows": series.source_count,
                    "points": downsample_points(series.points),
                })
        return {"aggregates": out}

    @app.get("/session/{sid}/export")
    def export(sid: str, what: str = Query(...)):
        session = state.session(sid)
        with session.lock:
            if what == "matches":
                if not session.last_matches:
                    raise ValidationError("no matches to export; run a query first")
                data = export_results(session.last_matches)
            elif what == "recommendations":
                if session.last_recommendation is None:
                    raise ValidationError(
                        "no recommendation to export; request one first"
                    )
                data = export_results(session.last_recommendation, session.last_collection)
            else:
                raise ValidationError(
                    f"what must be 'matches' or 'recommendations', got {what!r}"
                )
        return Response(content=data, media_type="text/csv")

    @app.post("/events", status_code=204)
    def post_event(body: EventBody):
        feature = analytics.BREAK_MARKER if body.breakMarker else body.feature
        if feature != analytics.BREAK_MARKER:
            analytics.classify(feature)  # vocabulary check
        event = {
            "sessionId": body.sessionId,
            "feature": feature,
            "timestamp": body.timestamp if body.timestamp is not None
            else int(time.time() * 1000),
        }
        if body.domain:
            event["domain"] = body.domain
        state.append_event(event)
        return Response(status_code=204)

    @app.get("/analytics/{session_id}/markov")
    def markov(session_id: str):
        events = state.read_events(session_id)
        features = analytics.features_from_events(events)
        counts = analytics.count_transitions(features)
        probs, zero_rows = analytics.transition_probabilities(counts)
        try:
            central = analytics.centrality(counts)
        except NoDataError:
            central = None  # events logged, but no within-segment transitions
        return {
            "states": list(analytics.STATES),
            "counts": [[int(v) for v in row] for row in counts],
            "probabilities": [[float(v) for v in row] for row in probs],
            "centrality": central,
            "zeroRows": zero_rows,
            "eventCount": sum(1 for f in features if f != analytics.BREAK_MARKER),
            "segmentCount": len(analytics.segment_features(features)),
        }

    return app
