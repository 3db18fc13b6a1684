// Application state and actions. Panels subscribe and re-render; every user
// interaction runs through exactly one action here, and every action logs
// exactly one interaction event. Server refreshes triggered by a state
// change (results/recommendations re-fetch) do not log events of their own.

import { ApiError, type Api } from "./api.js";
import {
  centroidToCanvas,
  cleanStroke,
  dataToCanvas,
  mergeStroke,
  type Pt,
} from "./geometry.js";
import {
  DEFAULT_SPEC,
  type ClassAggregate,
  type ClassConstraintInput,
  type Feature,
  type MatchSpecState,
  type QueryResponse,
  type Recommendations,
  type SchemaSummary,
  type ViewState,
} from "./types.js";

export const CANVAS_W = 480;
export const CANVAS_H = 220;

export interface InlineError {
  where: "filter" | "equation" | "upload" | "sketch" | "view" | "class" | "spec";
  message: string;
  position: string | null;
}

export interface AppState {
  datasets: string[];
  dataset: string | null;
  sessionId: string | null;
  schema: SchemaSummary | null;
  view: ViewState | null;
  filterText: string;
  spec: MatchSpecState;
  pattern: Pt[];
  rawStroke: Pt[];
  originId: string | null;
  querySource: string | null;
  result: QueryResponse | null;
  recs: Recommendations | null;
  recParams: { k: number; m: number };
  classes: ClassAggregate[];
  classRanges: Record<string, string>;
  inlineError: InlineError | null;
  status: string | null;
}

function initialState(): AppState {
  return {
    datasets: [],
    dataset: null,
    sessionId: null,
    schema: null,
    view: null,
    filterText: "",
    spec: { ...DEFAULT_SPEC },
    pattern: [],
    rawStroke: [],
    originId: null,
    querySource: null,
    result: null,
    recs: null,
    recParams: { k: 3, m: 3 },
    classes: [],
    classRanges: {},
    inlineError: null,
    status: null,
  };
}

/** Human-readable summary of a class's attribute ranges, shown on hover. */
export function describeConstraints(constraints: ClassConstraintInput[]): string {
  return constraints
    .map((c) => {
      if (c.min !== null && c.max !== null) return `${c.attr} in [${c.min}, ${c.max}]`;
      if (c.min !== null) return `${c.attr} >= ${c.min}`;
      if (c.max !== null) return `${c.attr} <= ${c.max}`;
      return `${c.attr}: any`;
    })
    .join(", ");
}

/** Which vocabulary feature a match-settings edit counts as. */
export function specEditFeature(prev: MatchSpecState, next: MatchSpecState): Feature {
  if (prev.smoothMethod !== next.smoothMethod || prev.smoothParam !== next.smoothParam) {
    return "smoothing";
  }
  if (JSON.stringify(prev.xRange) !== JSON.stringify(next.xRange)) {
    return "rangeSelection";
  }
  return "rangeInvariance";
}

type Listener = (state: AppState) => void;

export class AppStore {
  state: AppState;
  private api: Api;
  private listeners: Set<Listener> = new Set();
  private querySeq = 0;
  private recSeq = 0;

  constructor(api: Api) {
    this.api = api;
    this.state = initialState();
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private commit(patch: Partial<AppState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  private async track(feature: Feature | "breakMarker", breakMarker = false): Promise<void> {
    const sid = this.state.sessionId ?? "anonymous";
    try {
      await this.api.postEvent(sid, feature, breakMarker);
    } catch (err) {
      this.commit({ status: `event log unreachable: ${(err as Error).message}` });
    }
  }

  private fail(where: InlineError["where"], err: unknown): void {
    if (err instanceof ApiError) {
      this.commit({
        inlineError: { where, message: err.message, position: err.position },
      });
    } else {
      this.commit({ status: (err as Error).message });
    }
  }

  async init(): Promise<void> {
    const { datasets } = await this.api.listDatasets();
    this.commit({ datasets });
  }

  async selectDataset(name: string): Promise<void> {
    try {
      const session = await this.api.createSession(name);
      const schema = await this.api.datasetSchema(name);
      this.commit({
        ...initialState(),
        datasets: this.state.datasets,
        dataset: name,
        sessionId: session.sessionId,
        schema,
      });
      // logged after the session exists so the event lands in its log
      await this.track("dataSelection");
    } catch (err) {
      this.fail("view", err);
    }
  }

  async applyView(x: string, y: string, group: string): Promise<void> {
    await this.track("dataSelection");
    const prev = this.state.view;
    const view: ViewState = {
      x,
      y,
      group,
      display: prev?.display ?? "line",
      aggregate: prev?.aggregate ?? "mean",
    };
    await this.putView(view);
  }

  async applyDisplay(
    display: ViewState["display"],
    aggregate: ViewState["aggregate"],
  ): Promise<void> {
    if (this.state.view === null) {
      this.commit({
        inlineError: { where: "view", message: "choose x, y, and group first", position: null },
      });
      return;
    }
    await this.track("displayControl");
    await this.putView({ ...this.state.view, display, aggregate });
  }

  private async putView(view: ViewState): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    try {
      const stored = await this.api.putView(sid, view);
      this.commit({ view: stored, inlineError: null });
      await this.refreshPanels();
    } catch (err) {
      this.fail("view", err);
    }
  }

  async applyFilter(text: string): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    await this.track("filter");
    try {
      const body = text.trim() === "" ? null : text;
      const res = await this.api.putFilter(sid, body);
      this.commit({ filterText: res.filter ?? "", inlineError: null });
      await this.refreshPanels();
    } catch (err) {
      this.fail("filter", err);
    }
  }

  async applyMatchSpec(next: MatchSpecState): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    await this.track(specEditFeature(this.state.spec, next));
    try {
      await this.api.putMatchSpec(sid, next);
      this.commit({ spec: next, inlineError: null });
      await this.refreshPanels();
    } catch (err) {
      this.fail("spec", err);
    }
  }

  /** A finished canvas stroke. Merges into the current pattern
   * (sketch-to-modify) and queries; a sub-two-point stroke on an empty
   * canvas is rejected inline without any request. */
  async commitStroke(stroke: Pt[]): Promise<void> {
    const cleaned = cleanStroke(stroke);
    if (cleaned.length < 2 && this.state.pattern.length === 0) {
      this.commit({
        inlineError: {
          where: "sketch",
          message: "draw at least two points",
          position: null,
        },
      });
      return;
    }
    await this.track("sketch");
    const pattern = mergeStroke(this.state.pattern, stroke);
    this.commit({ pattern, rawStroke: stroke, inlineError: null });
    await this.submitPattern();
  }

  async submitEquation(text: string): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    await this.track("equation");
    const seq = ++this.querySeq;
    try {
      const res = await this.api.query(sid, "equation", { text });
      if (seq !== this.querySeq) return;
      this.commit({
        result: res,
        querySource: "equation",
        originId: null,
        pattern: dataToCanvas(res.query.points, CANVAS_W, CANVAS_H),
        rawStroke: [],
        inlineError: null,
      });
    } catch (err) {
      this.fail("equation", err);
    }
  }

  async uploadPattern(csv: string, filename?: string): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    await this.track("patternUpload");
    const seq = ++this.querySeq;
    try {
      const res = await this.api.query(sid, "upload", { csv, filename });
      if (seq !== this.querySeq) return;
      this.commit({
        result: res,
        querySource: "upload",
        originId: null,
        pattern: dataToCanvas(res.query.points, CANVAS_W, CANVAS_H),
        rawStroke: [],
        inlineError: null,
      });
    } catch (err) {
      this.fail("upload", err);
    }
  }

  /** Drop a result series onto the query canvas and re-query. */
  async dropSeries(seriesId: string, points: [number, number][]): Promise<void> {
    await this.track("dragAndDrop");
    this.commit({
      pattern: dataToCanvas(points, CANVAS_W, CANVAS_H),
      rawStroke: [],
      originId: seriesId,
      inlineError: null,
    });
    await this.submitPattern();
  }

  /** Drop a representative centroid onto the query canvas and re-query. */
  async dropCentroid(centroid: number[], label: string): Promise<void> {
    await this.track("dragAndDrop");
    this.commit({
      pattern: centroidToCanvas(centroid, CANVAS_W, CANVAS_H),
      rawStroke: [],
      originId: label,
      inlineError: null,
    });
    await this.submitPattern();
  }

  async refreshRecommendations(k: number, m: number): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    await this.track("recommendations");
    this.commit({ recParams: { k, m } });
    await this.fetchRecommendations();
  }

  async createClass(
    name: string,
    constraints: ClassConstraintInput[],
    aggregate: string,
  ): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    await this.track("dynamicClass");
    try {
      await this.api.createClass(sid, name, constraints, aggregate);
      const res = await this.api.classAggregates(sid);
      this.commit({
        classes: res.aggregates,
        classRanges: {
          ...this.state.classRanges,
          [name]: describeConstraints(constraints),
        },
        inlineError: null,
      });
    } catch (err) {
      this.fail("class", err);
    }
  }

  /** Fresh line of inquiry: clears the query state and logs a break marker. */
  async newInquiry(): Promise<void> {
    await this.track("breakMarker", true);
    this.querySeq++; // a query still in flight must not repopulate the canvas
    this.commit({
      pattern: [],
      rawStroke: [],
      originId: null,
      querySource: null,
      result: null,
      inlineError: null,
      status: null,
    });
  }

  // --- internals ---------------------------------------------------------

  private requireSession(): string | null {
    if (this.state.sessionId === null) {
      this.commit({ status: "select a dataset first" });
      return null;
    }
    return this.state.sessionId;
  }

  /** Submit the canvas pattern as a sketch query. Stale responses (an older
   * request resolving after a newer one) are discarded by sequence number. */
  private async submitPattern(): Promise<void> {
    const sid = this.requireSession();
    if (sid === null || this.state.pattern.length < 2) return;
    const seq = ++this.querySeq;
    try {
      const res = await this.api.query(sid, "sketch", {
        points: this.state.pattern.map((p) => [p.x, p.y]),
        canvasW: CANVAS_W,
        canvasH: CANVAS_H,
      });
      if (seq !== this.querySeq) return;
      this.commit({ result: res, querySource: "sketch", inlineError: null });
    } catch (err) {
      if (seq !== this.querySeq) return;
      this.fail("sketch", err);
    }
  }

  private async fetchRecommendations(): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    const seq = ++this.recSeq;
    try {
      const { k, m } = this.state.recParams;
      const recs = await this.api.recommendations(sid, k, m);
      if (seq !== this.recSeq) return;
      this.commit({ recs, inlineError: null });
    } catch (err) {
      if (seq !== this.recSeq) return;
      this.fail("spec", err);
    }
  }

  /** After a collection-changing edit, re-fetch whatever panels have
   * content. System-driven: logs no events. */
  private async refreshPanels(): Promise<void> {
    const jobs: Promise<void>[] = [];
    if (this.state.pattern.length >= 2) jobs.push(this.submitPattern());
    if (this.state.recs !== null) jobs.push(this.fetchRecommendations());
    await Promise.all(jobs);
  }
}
