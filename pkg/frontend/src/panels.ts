// The five-panel layout: data selection, query canvas, results, control
// panel, recommendations. Plain DOM; every panel re-renders from the store.

import type { Api } from "./api.js";
import { pointsToPath, type Pt } from "./geometry.js";
import { AppStore, CANVAS_W, CANVAS_H, type AppState } from "./store.js";
import type { MatchSpecState, Representative } from "./types.js";

const THUMB_W = 120;
const THUMB_H = 48;
const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function thumbnail(points: [number, number][]): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(THUMB_W));
  svg.setAttribute("height", String(THUMB_H));
  svg.setAttribute("class", "thumb");
  const path = document.createElementNS(SVG_NS, "path");
  path.setAttribute("d", pointsToPath(points, THUMB_W, THUMB_H));
  path.setAttribute("fill", "none");
  path.setAttribute("stroke", "#3566b0");
  path.setAttribute("stroke-width", "1.5");
  svg.append(path);
  return svg;
}

function option(value: string, label = value): HTMLOptionElement {
  const o = el("option", { value }, label);
  return o;
}

export function buildApp(root: HTMLElement, store: AppStore, api: Api): void {
  root.innerHTML = "";
  const grid = el("div", { class: "grid" });
  root.append(grid);

  const panels = {
    dataSelection: panel(grid, "data-selection", "Data selection"),
    queryCanvas: panel(grid, "query-canvas", "Query canvas"),
    results: panel(grid, "results", "Results"),
    controlPanel: panel(grid, "control-panel", "Control panel"),
    recommendations: panel(grid, "recommendations", "Recommendations"),
  };

  const status = el("div", { id: "status", role: "status" });
  root.append(status);

  buildDataSelection(panels.dataSelection, store);
  buildQueryCanvas(panels.queryCanvas, store);
  buildResults(panels.results, store, api);
  buildControlPanel(panels.controlPanel, store);
  buildRecommendations(panels.recommendations, store);

  store.subscribe((state) => {
    status.textContent = state.status ?? "";
  });
}

function panel(grid: HTMLElement, id: string, title: string): HTMLElement {
  const section = el("section", { id, class: "panel" });
  section.append(el("h2", {}, title));
  const body = el("div", { class: "panel-body" });
  section.append(body);
  grid.append(section);
  return body;
}

// --- A: data selection ---------------------------------------------------

function buildDataSelection(body: HTMLElement, store: AppStore): void {
  const datasetSel = el("select", { id: "dataset-select" });
  const xSel = el("select", { id: "x-select" });
  const ySel = el("select", { id: "y-select" });
  const groupSel = el("select", { id: "group-select" });
  const applyView = el("button", { id: "apply-view" }, "Apply view");
  const displaySel = el("select", { id: "display-select" });
  displaySel.append(option("line"), option("scatter"));
  const aggSel = el("select", { id: "aggregate-select" });
  aggSel.append(option("mean"), option("median"), option("none"));
  const applyDisplay = el("button", { id: "apply-display" }, "Apply display");
  const newInquiry = el("button", { id: "new-inquiry" }, "New inquiry");
  const viewError = el("div", { class: "inline-error", id: "view-error" });

  body.append(
    labeled("Dataset", datasetSel),
    labeled("x", xSel),
    labeled("y", ySel),
    labeled("group", groupSel),
    applyView,
    labeled("display", displaySel),
    labeled("aggregate", aggSel),
    applyDisplay,
    newInquiry,
    viewError,
  );

  datasetSel.addEventListener("change", () => {
    if (datasetSel.value) void store.selectDataset(datasetSel.value);
  });
  applyView.addEventListener("click", () => {
    void store.applyView(xSel.value, ySel.value, groupSel.value);
  });
  applyDisplay.addEventListener("click", () => {
    void store.applyDisplay(
      displaySel.value as "line" | "scatter",
      aggSel.value as "none" | "mean" | "median",
    );
  });
  newInquiry.addEventListener("click", () => void store.newInquiry());

  let lastDatasets = "";
  let lastSchema = "";
  store.subscribe((state) => {
    const names = state.datasets.join(",");
    if (names !== lastDatasets) {
      lastDatasets = names;
      datasetSel.innerHTML = "";
      datasetSel.append(option("", "choose..."));
      for (const name of state.datasets) datasetSel.append(option(name));
    }
    if (state.dataset) datasetSel.value = state.dataset;

    const schemaKey = state.schema ? state.schema.name : "";
    if (schemaKey !== lastSchema) {
      lastSchema = schemaKey;
      for (const sel of [xSel, ySel, groupSel]) sel.innerHTML = "";
      if (state.schema) {
        const quant = state.schema.columns.filter((c) => c.kind === "quantitative");
        for (const c of quant) {
          xSel.append(option(c.name));
          ySel.append(option(c.name));
        }
        for (const c of state.schema.columns) groupSel.append(option(c.name));
      }
    }
    if (state.view) {
      xSel.value = state.view.x;
      ySel.value = state.view.y;
      groupSel.value = state.view.group;
      displaySel.value = state.view.display;
      aggSel.value = state.view.aggregate;
    }
    viewError.textContent =
      state.inlineError?.where === "view" ? state.inlineError.message : "";
  });
}

function labeled(text: string, control: HTMLElement): HTMLLabelElement {
  const label = el("label", {}, text + " ");
  label.append(control);
  return label;
}

// --- B: query canvas -----------------------------------------------------

function buildQueryCanvas(body: HTMLElement, store: AppStore): void {
  const canvas = el("canvas", {
    id: "sketch-canvas",
    width: String(CANVAS_W),
    height: String(CANVAS_H),
  });
  const origin = el("div", { id: "query-origin" });
  const eqInput = el("input", { id: "equation-input", placeholder: "y = x^2" });
  const eqGo = el("button", { id: "equation-go" }, "Query equation");
  const fileInput = el("input", { id: "pattern-file", type: "file", accept: ".csv,text/csv" });
  const sketchError = el("div", { class: "inline-error", id: "sketch-error" });

  body.append(canvas, origin, labeled("Equation", eqInput), eqGo,
    labeled("Upload pattern", fileInput), sketchError);

  let stroke: Pt[] | null = null;
  const toCanvasXY = (ev: MouseEvent): Pt => {
    const rect = canvas.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  };
  canvas.addEventListener("pointerdown", (ev) => {
    stroke = [toCanvasXY(ev as MouseEvent)];
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (stroke) stroke.push(toCanvasXY(ev as MouseEvent));
  });
  canvas.addEventListener("pointerup", () => {
    if (stroke) {
      const done = stroke;
      stroke = null;
      void store.commitStroke(done);
    }
  });

  // drop target for results / representatives
  canvas.addEventListener("dragover", (ev) => ev.preventDefault());
  canvas.addEventListener("drop", (ev) => {
    ev.preventDefault();
    const raw = (ev as DragEvent).dataTransfer?.getData("application/json");
    if (raw) handleDrop(store, raw);
  });

  eqGo.addEventListener("click", () => {
    if ((eqInput as HTMLInputElement).value.trim()) {
      void store.submitEquation((eqInput as HTMLInputElement).value);
    }
  });
  fileInput.addEventListener("change", async () => {
    const file = (fileInput as HTMLInputElement).files?.[0];
    if (file) void store.uploadPattern(await file.text(), file.name);
  });

  store.subscribe((state) => {
    drawCanvas(canvas as HTMLCanvasElement, state);
    origin.textContent = state.originId ? `from: ${state.originId}` : "";
    const err = state.inlineError;
    sketchError.textContent =
      err && (err.where === "sketch" || err.where === "equation" || err.where === "upload")
        ? err.position
          ? `${err.message}`
          : err.message
        : "";
  });
}

export function handleDrop(store: AppStore, raw: string): void {
  const data = JSON.parse(raw);
  if (data.kind === "series") {
    void store.dropSeries(data.seriesId, data.points);
  } else if (data.kind === "centroid") {
    void store.dropCentroid(data.centroid, data.label);
  }
}

function drawCanvas(canvas: HTMLCanvasElement, state: AppState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return; // headless test environments have no 2d context
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  strokePath(ctx, state.rawStroke, "#bbbbbb", 1);
  strokePath(ctx, state.pattern, "#2255aa", 2);
}

function strokePath(
  ctx: CanvasRenderingContext2D,
  pts: Pt[],
  color: string,
  width: number,
): void {
  if (pts.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(pts[0].x, pts[0].y);
  for (let i = 1; i < pts.length; i++) ctx.lineTo(pts[i].x, pts[i].y);
  ctx.stroke();
}

// --- C: results ----------------------------------------------------------

function buildResults(body: HTMLElement, store: AppStore, api: Api): void {
  const list = el("ol", { id: "results-list" });
  const diag = el("div", { id: "results-diagnostics" });
  const exportLink = el("a", { id: "export-matches" }, "Export matches (CSV)");
  body.append(list, diag, exportLink);

  store.subscribe((state) => {
    list.innerHTML = "";
    if (state.result) {
      for (const m of state.result.matches) {
        const item = el("li", {
          class: "result-item",
          draggable: "true",
          "data-series-id": m.seriesId,
          "data-distance": String(m.distance),
        });
        item.append(thumbnail(m.points));
        // the distance shown is exactly the API's number, only formatted
        item.append(
          el("span", { class: "result-label" },
            `#${m.rank} ${m.seriesId} d=${m.distance.toFixed(4)}`),
        );
        const payload = JSON.stringify({
          kind: "series",
          seriesId: m.seriesId,
          points: m.points,
        });
        item.addEventListener("dragstart", (ev) => {
          (ev as DragEvent).dataTransfer?.setData("application/json", payload);
        });
        item.addEventListener("dblclick", () => handleDrop(store, payload));
        list.append(item);
      }
      const d = state.result.diagnostics;
      const bits: string[] = [];
      if (d.skipped.length > 0) bits.push(`skipped: ${d.skipped.length}`);
      if (d.constantIds.length > 0) bits.push(`constant: ${d.constantIds.join(", ")}`);
      if (d.queryConstant) bits.push("query is constant");
      diag.textContent = bits.join(" | ");
    } else {
      diag.textContent = "";
    }
    if (state.sessionId) {
      exportLink.setAttribute("href", api.exportUrl(state.sessionId, "matches"));
    }
  });
}

// --- D: control panel ----------------------------------------------------

function buildControlPanel(body: HTMLElement, store: AppStore): void {
  const metricSel = el("select", { id: "metric-select" });
  metricSel.append(option("euclidean"), option("slope"));
  const normSel = el("select", { id: "normalize-select" });
  normSel.append(option("zscore"), option("minmax"), option("none"));
  const smoothSel = el("select", { id: "smooth-method" });
  smoothSel.append(option("none"), option("movingAverage"), option("exponential"));
  const smoothParam = el("input", { id: "smooth-param", type: "number", value: "1", step: "any" });
  const resampleN = el("input", { id: "resample-n", type: "number", value: "50" });
  const topK = el("input", { id: "top-k", type: "number", value: "10" });
  const xLo = el("input", { id: "x-range-lo", type: "number", step: "any", placeholder: "lo" });
  const xHi = el("input", { id: "x-range-hi", type: "number", step: "any", placeholder: "hi" });
  const xNorm = el("input", { id: "x-normalize", type: "checkbox", checked: "checked" });
  const applySpec = el("button", { id: "apply-spec" }, "Apply match settings");
  const specError = el("div", { class: "inline-error", id: "spec-error" });

  const filterInput = el("input", { id: "filter-input", placeholder: 'flux > 10 AND star = 1' });
  const applyFilter = el("button", { id: "apply-filter" }, "Apply filter");
  const filterError = el("div", { class: "inline-error", id: "filter-error" });

  const className = el("input", { id: "class-name", placeholder: "class name" });
  const classAttr = el("input", { id: "class-attr", placeholder: "attribute" });
  const classMin = el("input", { id: "class-min", type: "number", step: "any", placeholder: "min" });
  const classMax = el("input", { id: "class-max", type: "number", step: "any", placeholder: "max" });
  const classAgg = el("select", { id: "class-aggregate" });
  classAgg.append(option("mean"), option("median"));
  const createClass = el("button", { id: "create-class" }, "Create class");
  const classError = el("div", { class: "inline-error", id: "class-error" });
  const classList = el("div", { id: "class-list" });

  body.append(
    el("h3", {}, "Match settings"),
    labeled("metric", metricSel), labeled("normalize", normSel),
    labeled("smoothing", smoothSel), labeled("window / alpha", smoothParam),
    labeled("resample", resampleN), labeled("top-k", topK),
    labeled("x from", xLo), labeled("x to", xHi),
    labeled("normalize x extent", xNorm),
    applySpec, specError,
    el("h3", {}, "Filter"),
    filterInput, applyFilter, filterError,
    el("h3", {}, "Dynamic classes"),
    className, classAttr, classMin, classMax,
    labeled("aggregate", classAgg), createClass, classError, classList,
  );

  applySpec.addEventListener("click", () => {
    const lo = (xLo as HTMLInputElement).value;
    const hi = (xHi as HTMLInputElement).value;
    const spec: MatchSpecState = {
      metric: metricSel.value as MatchSpecState["metric"],
      normalize: normSel.value as MatchSpecState["normalize"],
      smoothMethod: smoothSel.value as MatchSpecState["smoothMethod"],
      smoothParam: Number((smoothParam as HTMLInputElement).value),
      resampleN: Number((resampleN as HTMLInputElement).value),
      xNormalize: (xNorm as HTMLInputElement).checked,
      xRange: lo !== "" && hi !== "" ? [Number(lo), Number(hi)] : null,
      topK: Number((topK as HTMLInputElement).value),
    };
    void store.applyMatchSpec(spec);
  });

  applyFilter.addEventListener("click", () => {
    void store.applyFilter((filterInput as HTMLInputElement).value);
  });

  createClass.addEventListener("click", () => {
    const min = (classMin as HTMLInputElement).value;
    const max = (classMax as HTMLInputElement).value;
    void store.createClass(
      (className as HTMLInputElement).value,
      [{
        attr: (classAttr as HTMLInputElement).value,
        min: min === "" ? null : Number(min),
        max: max === "" ? null : Number(max),
      }],
      classAgg.value,
    );
  });

  store.subscribe((state) => {
    const err = state.inlineError;
    specError.textContent = err?.where === "spec" ? err.message : "";
    filterError.textContent =
      err?.where === "filter"
        ? err.position
          ? `${err.message} (at ${err.position})`
          : err.message
        : "";
    classError.textContent = err?.where === "class" ? err.message : "";

    classList.innerHTML = "";
    for (const cls of state.classes) {
      const row = el("div", {
        class: "class-row",
        "data-class-name": cls.name,
        title: state.classRanges[cls.name] ?? "",
      });
      row.append(thumbnail(cls.points));
      row.append(el("span", {}, `${cls.name} (${cls.aggregate}, ${cls.memberRows} rows)`));
      classList.append(row);
    }
  });
}

// --- E: recommendations --------------------------------------------------

function buildRecommendations(body: HTMLElement, store: AppStore): void {
  const kInput = el("input", { id: "rec-k", type: "number", value: "3" });
  const mInput = el("input", { id: "rec-m", type: "number", value: "3" });
  const refresh = el("button", { id: "rec-refresh" }, "Refresh recommendations");
  const reps = el("div", { id: "rep-list" });
  const outliers = el("div", { id: "outlier-list" });
  body.append(labeled("k", kInput), labeled("m", mInput), refresh,
    el("h3", {}, "Representative trends"), reps,
    el("h3", {}, "Outliers"), outliers);

  refresh.addEventListener("click", () => {
    void store.refreshRecommendations(
      Number((kInput as HTMLInputElement).value),
      Number((mInput as HTMLInputElement).value),
    );
  });

  store.subscribe((state) => {
    reps.innerHTML = "";
    outliers.innerHTML = "";
    if (!state.recs) return;
    state.recs.representatives.forEach((rep: Representative, i: number) => {
      const label = `representative-${i + 1}`;
      const row = el("div", {
        class: "rep-item",
        draggable: "true",
        "data-label": label,
      });
      row.append(thumbnail(rep.points));
      row.append(
        el("span", {}, `${label}: ${rep.memberIds.length} members, near ${rep.nearestMemberId}`),
      );
      const payload = JSON.stringify({ kind: "centroid", centroid: rep.centroid, label });
      row.addEventListener("dragstart", (ev) => {
        (ev as DragEvent).dataTransfer?.setData("application/json", payload);
      });
      row.addEventListener("dblclick", () => handleDrop(store, payload));
      reps.append(row);
    });
    for (const o of state.recs.outliers) {
      const row = el("div", {
        class: "outlier-item",
        "data-series-id": o.seriesId,
        "data-distance": String(o.distanceToCentroid),
      });
      row.append(thumbnail(o.points));
      row.append(el("span", {}, `${o.seriesId} d=${o.distanceToCentroid.toFixed(4)}`));
      const payload = JSON.stringify({
        kind: "series",
        seriesId: o.seriesId,
        points: o.points,
      });
      row.addEventListener("dblclick", () => handleDrop(store, payload));
      outliers.append(row);
    }
  });
}
