// Thin typed client for the curvequery HTTP API. All state lives server
// side; this module only shapes requests and surfaces error bodies.

import type {
  ClassConstraintInput,
  CollectionDebug,
  Feature,
  MarkovSummary,
  MatchSpecState,
  QueryPayload,
  QueryResponse,
  Recommendations,
  SchemaSummary,
  ViewState,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  status: number;
  position: string | null;

  constructor(status: number, code: string, message: string, position?: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.position = position ?? null;
  }
}

/** The surface the store and panels program against; tests substitute
 * fakes for it. */
export type Api = Pick<
  ApiClient,
  | "listDatasets"
  | "datasetSchema"
  | "uploadDataset"
  | "createSession"
  | "putView"
  | "putFilter"
  | "putMatchSpec"
  | "query"
  | "recommendations"
  | "createClass"
  | "classAggregates"
  | "collection"
  | "exportUrl"
  | "postEvent"
  | "markov"
>;

export class ApiClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.baseUrl + path, init);
    if (res.status === 204) return undefined as T;
    const ctype = res.headers.get("content-type") ?? "";
    const body = ctype.includes("application/json")
      ? await res.json()
      : await res.text();
    if (!res.ok) {
      if (typeof body === "object" && body !== null && "code" in body) {
        throw new ApiError(res.status, body.code, body.message, body.position);
      }
      throw new ApiError(res.status, "http", String(body));
    }
    return body as T;
  }

  private json(method: string, payload: unknown): RequestInit {
    return {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    };
  }

  listDatasets(): Promise<{ datasets: string[] }> {
    return this.request("/datasets");
  }

  datasetSchema(name: string): Promise<SchemaSummary> {
    return this.request(`/datasets/${encodeURIComponent(name)}/schema`);
  }

  uploadDataset(name: string, csv: string): Promise<SchemaSummary> {
    return this.request(`/datasets?name=${encodeURIComponent(name)}`, {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
  }

  createSession(dataset: string): Promise<{ sessionId: string; dataset: string }> {
    return this.request("/sessions", this.json("POST", { dataset }));
  }

  putView(sid: string, view: ViewState): Promise<ViewState> {
    return this.request(`/session/${sid}/view`, this.json("PUT", view));
  }

  putFilter(sid: string, filter: string | null): Promise<{ filter: string | null }> {
    return this.request(`/session/${sid}/filter`, this.json("PUT", { filter }));
  }

  putMatchSpec(sid: string, spec: MatchSpecState): Promise<MatchSpecState> {
    return this.request(`/session/${sid}/matchspec`, this.json("PUT", spec));
  }

  query(sid: string, source: string, payload: QueryPayload): Promise<QueryResponse> {
    return this.request(
      `/session/${sid}/query`,
      this.json("POST", { source, payload }),
    );
  }

  recommendations(sid: string, k: number, m: number): Promise<Recommendations> {
    return this.request(`/session/${sid}/recommendations?k=${k}&m=${m}`);
  }

  createClass(
    sid: string,
    name: string,
    constraints: ClassConstraintInput[],
    aggregate: string,
  ): Promise<{ name: string; classCount: number }> {
    return this.request(
      `/session/${sid}/classes`,
      this.json("POST", { name, constraints, aggregate }),
    );
  }

  classAggregates(sid: string): Promise<{ aggregates: import("./types.js").ClassAggregate[] }> {
    return this.request(`/session/${sid}/classes/aggregates`);
  }

  collection(sid: string): Promise<CollectionDebug> {
    return this.request(`/session/${sid}/collection`);
  }

  exportUrl(sid: string, what: "matches" | "recommendations"): string {
    return `${this.baseUrl}/session/${sid}/export?what=${what}`;
  }

  postEvent(sessionId: string, feature: Feature | "breakMarker", breakMarker = false): Promise<void> {
    return this.request(
      "/events",
      this.json("POST", { sessionId, feature, breakMarker }),
    );
  }

  markov(sessionId: string): Promise<MarkovSummary> {
    return this.request(`/analytics/${sessionId}/markov`);
  }
}
