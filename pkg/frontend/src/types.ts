// Wire types for the curvequery JSON API.

export interface ColumnInfo {
  name: string;
  kind: "quantitative" | "categorical";
  inferred: boolean;
}

export interface SchemaSummary {
  name: string;
  rowCount: number;
  columns: ColumnInfo[];
}

export interface ViewState {
  x: string;
  y: string;
  group: string;
  display: "line" | "scatter";
  aggregate: "none" | "mean" | "median";
}

export interface MatchSpecState {
  metric: "euclidean" | "slope";
  normalize: "zscore" | "minmax" | "none";
  smoothMethod: "none" | "movingAverage" | "exponential";
  smoothParam: number;
  resampleN: number;
  xNormalize: boolean;
  xRange: [number, number] | null;
  topK: number;
}

export const DEFAULT_SPEC: MatchSpecState = {
  metric: "euclidean",
  normalize: "zscore",
  smoothMethod: "none",
  smoothParam: 1,
  resampleN: 50,
  xNormalize: true,
  xRange: null,
  topK: 10,
};

export type XY = [number, number];

export interface Match {
  rank: number;
  seriesId: string;
  distance: number;
  points: XY[];
}

export interface QueryDiagnostics {
  skipped: { seriesId: string; reason: string }[];
  constantIds: string[];
  queryConstant: boolean;
}

export interface QueryResponse {
  query: { source: string; points: XY[] };
  matches: Match[];
  diagnostics: QueryDiagnostics;
}

export type QueryPayload =
  | { points: number[][]; canvasW: number; canvasH: number }
  | { text: string; xRange?: [number, number] }
  | { csv: string; filename?: string }
  | { seriesId: string };

export interface Representative {
  centroid: number[];
  memberIds: string[];
  nearestMemberId: string;
  points: XY[];
}

export interface Outlier {
  seriesId: string;
  distanceToCentroid: number;
  points: XY[];
}

export interface Recommendations {
  k: number;
  m: number;
  seed: number;
  representatives: Representative[];
  outliers: Outlier[];
  sseHistory: number[];
  reseeds: number;
}

export interface ClassConstraintInput {
  attr: string;
  min: number | null;
  max: number | null;
}

export interface ClassAggregate {
  name: string;
  aggregate: string;
  memberRows: number;
  points: XY[];
}

export interface CollectionDebug {
  seriesIds: string[];
  series: { seriesId: string; pointCount: number; points: XY[] }[];
  diagnostics: Record<string, unknown>;
}

export interface MarkovSummary {
  states: string[];
  counts: number[][];
  probabilities: number[][];
  centrality: Record<string, number> | null;
  zeroRows: string[];
  eventCount: number;
  segmentCount: number;
}

// The interaction vocabulary the analytics endpoint understands.
export type Feature =
  | "sketch"
  | "equation"
  | "patternUpload"
  | "smoothing"
  | "rangeSelection"
  | "rangeInvariance"
  | "dragAndDrop"
  | "recommendations"
  | "dataSelection"
  | "displayControl"
  | "filter"
  | "dynamicClass";
