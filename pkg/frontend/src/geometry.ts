// Pure geometry helpers for the query canvas and thumbnails.

export interface Pt {
  x: number;
  y: number;
}

/** Collapse a raw stroke to one point per x, later samples winning, sorted
 * ascending. This mirrors the server's sketch cleanup so the overlay shows
 * what the query will actually be. */
export function cleanStroke(points: Pt[]): Pt[] {
  const byX = new Map<number, number>();
  for (const p of points) byX.set(p.x, p.y);
  return [...byX.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([x, y]) => ({ x, y }));
}

/** Sketch-to-modify: the stroke replaces the pattern's points inside the
 * stroke's x-span; the pattern survives outside it. Both inputs are canvas
 * pixels; the result is cleaned and x-sorted. */
export function mergeStroke(pattern: Pt[], stroke: Pt[]): Pt[] {
  const cleaned = cleanStroke(stroke);
  if (cleaned.length === 0) return pattern.slice();
  if (pattern.length === 0) return cleaned;
  const lo = cleaned[0].x;
  const hi = cleaned[cleaned.length - 1].x;
  const kept = pattern.filter((p) => p.x < lo || p.x > hi);
  return cleanStroke([...kept, ...cleaned]);
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

/** Fit data-space points into a w x h pixel box, y flipped so larger values
 * sit higher. Constant extents center the line. */
export function dataToCanvas(points: [number, number][], w: number, h: number): Pt[] {
  const [x0, x1] = extent(points.map((p) => p[0]));
  const [y0, y1] = extent(points.map((p) => p[1]));
  const xs = x1 - x0;
  const ys = y1 - y0;
  return points.map(([x, y]) => ({
    x: xs > 0 ? ((x - x0) / xs) * w : w / 2,
    y: ys > 0 ? h - ((y - y0) / ys) * h : h / 2,
  }));
}

/** Place a centroid vector (shape-space y values on an implicit even grid)
 * onto the canvas. */
export function centroidToCanvas(centroid: number[], w: number, h: number): Pt[] {
  const n = centroid.length;
  const pts: [number, number][] = centroid.map((y, i) => [
    n > 1 ? i / (n - 1) : 0,
    y,
  ]);
  return dataToCanvas(pts, w, h);
}

/** SVG path for a thumbnail of data-space points, fitted to the box with a
 * little padding so strokes are not clipped. */
export function pointsToPath(
  points: [number, number][],
  w: number,
  h: number,
  pad = 2,
): string {
  if (points.length === 0) return "";
  const fitted = dataToCanvas(points, w - 2 * pad, h - 2 * pad);
  return fitted
    .map((p, i) => `${i === 0 ? "M" : "L"}${(p.x + pad).toFixed(2)} ${(p.y + pad).toFixed(2)}`)
    .join(" ");
}
