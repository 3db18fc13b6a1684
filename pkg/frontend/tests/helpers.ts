// Shared fake API for store and DOM tests. Records every request and
// serves small canned responses.

import type { Api } from "../src/api.js";
import type {
  QueryPayload,
  QueryResponse,
  Recommendations,
  SchemaSummary,
} from "../src/types.js";

export interface EventRecord {
  sessionId: string;
  feature: string;
  breakMarker: boolean;
}

export interface Fake {
  api: Api;
  events: EventRecord[];
  calls: string[];
  queries: { source: string; payload: QueryPayload }[];
}

export function queryResponse(): QueryResponse {
  return {
    query: { source: "sketch", points: [[0, 0], [1, 1]] },
    matches: [
      { rank: 1, seriesId: "a", distance: 0.25, points: [[0, 0], [1, 1]] },
      { rank: 2, seriesId: "b", distance: 0.5, points: [[0, 1], [1, 0]] },
    ],
    diagnostics: { skipped: [], constantIds: [], queryConstant: false },
  };
}

export function recommendations(): Recommendations {
  return {
    k: 1,
    m: 1,
    seed: 0,
    reseeds: 0,
    sseHistory: [1],
    representatives: [
      {
        centroid: [0, 1, 0],
        memberIds: ["a"],
        nearestMemberId: "a",
        points: [[0, 0], [0.5, 1], [1, 0]],
      },
    ],
    outliers: [{ seriesId: "b", distanceToCentroid: 2.5, points: [[0, 1], [1, 0]] }],
  };
}

export function makeFake(): Fake {
  const events: EventRecord[] = [];
  const calls: string[] = [];
  const queries: { source: string; payload: QueryPayload }[] = [];
  const created: string[] = [];
  const schema: SchemaSummary = {
    name: "demo",
    rowCount: 4,
    columns: [
      { name: "t", kind: "quantitative", inferred: true },
      { name: "v", kind: "quantitative", inferred: true },
      { name: "series", kind: "categorical", inferred: true },
    ],
  };
  const api: Api = {
    listDatasets: async () => {
      calls.push("listDatasets");
      return { datasets: ["demo"] };
    },
    datasetSchema: async () => {
      calls.push("datasetSchema");
      return schema;
    },
    uploadDataset: async () => {
      calls.push("uploadDataset");
      return schema;
    },
    createSession: async (dataset: string) => {
      calls.push("createSession");
      return { sessionId: "s-1", dataset };
    },
    putView: async (_sid, view) => {
      calls.push("putView");
      return view;
    },
    putFilter: async (_sid, filter) => {
      calls.push("putFilter");
      return { filter };
    },
    putMatchSpec: async (_sid, spec) => {
      calls.push("putMatchSpec");
      return spec;
    },
    query: async (_sid, source, payload) => {
      calls.push(`query:${source}`);
      queries.push({ source, payload });
      return queryResponse();
    },
    recommendations: async () => {
      calls.push("recommendations");
      return recommendations();
    },
    createClass: async (_sid, name) => {
      calls.push("createClass");
      created.push(name);
      return { name, classCount: created.length };
    },
    classAggregates: async () => {
      calls.push("classAggregates");
      return {
        aggregates: created.map((name) => ({
          name,
          aggregate: "mean",
          memberRows: 2,
          points: [[0, 0], [1, 1]] as [number, number][],
        })),
      };
    },
    collection: async () => {
      calls.push("collection");
      return { seriesIds: ["a", "b"], series: [], diagnostics: {} };
    },
    exportUrl: (sid, what) => `http://fake/session/${sid}/export?what=${what}`,
    postEvent: async (sessionId, feature, breakMarker = false) => {
      events.push({ sessionId, feature, breakMarker });
    },
    markov: async () => {
      throw new Error("not used by the UI");
    },
  };
  return { api, events, calls, queries };
}

/** Poll until `fn` is truthy; fails loudly on timeout. */
export async function until<T>(
  fn: () => T,
  what: string,
  timeoutMs = 10_000,
): Promise<NonNullable<T>> {
  const start = Date.now();
  for (;;) {
    const value = fn();
    if (value) return value as NonNullable<T>;
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}
