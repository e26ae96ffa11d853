/** Pure pixel-buffer rendering. Everything here is a deterministic function
 * of the API payload, so the canvas tests can hash buffers without a DOM.
 */

import type { CalibrationPoint } from "./api.js";

export const DISPLAY_SCALE = 8;

/** Grade colors, index 0..3. */
export const GRADE_COLORS: ReadonlyArray<readonly [number, number, number]> = [
  [56, 132, 255], // 0: blue
  [64, 190, 140], // 1: green
  [245, 166, 35], // 2: orange
  [229, 57, 53], // 3: red
];

export function gradeColor(grade: number): readonly [number, number, number] {
  const idx = Math.min(GRADE_COLORS.length - 1, Math.max(0, Math.round(grade)));
  return GRADE_COLORS[idx];
}

/** Grayscale image in [0,1] -> RGBA buffer upscaled with lossless
 * nearest-neighbor (no smoothing). */
export function renderPixels(
  image: number[],
  dims: number[],
  scale: number = DISPLAY_SCALE,
): { data: Uint8ClampedArray<ArrayBuffer>; width: number; height: number } {
  const [h, w] = dims;
  if (image.length !== h * w) {
    throw new Error(`image length ${image.length} does not match dims ${dims}`);
  }
  const width = w * scale;
  const height = h * scale;
  const data = new Uint8ClampedArray(width * height * 4);
  for (let y = 0; y < height; y++) {
    const sy = Math.floor(y / scale);
    for (let x = 0; x < width; x++) {
      const sx = Math.floor(x / scale);
      const v = Math.round(Math.min(1, Math.max(0, image[sy * w + sx])) * 255);
      const o = (y * width + x) * 4;
      data[o] = v;
      data[o + 1] = v;
      data[o + 2] = v;
      data[o + 3] = 255;
    }
  }
  return { data, width, height };
}

function fill(data: Uint8ClampedArray, width: number, x: number, y: number, rgb: readonly [number, number, number]): void {
  const o = (y * width + x) * 4;
  data[o] = rgb[0];
  data[o + 1] = rgb[1];
  data[o + 2] = rgb[2];
  data[o + 3] = 255;
}

function drawSquare(
  data: Uint8ClampedArray,
  width: number,
  height: number,
  cx: number,
  cy: number,
  half: number,
  rgb: readonly [number, number, number],
): void {
  for (let y = cy - half; y <= cy + half; y++) {
    for (let x = cx - half; x <= cx + half; x++) {
      if (x >= 0 && x < width && y >= 0 && y < height) {
        fill(data, width, x, y, rgb);
      }
    }
  }
}

export interface ScatterHighlight {
  coord: [number, number];
  rgb: readonly [number, number, number];
}

/** 2-D latent scatter colored by grade; coordinates come straight from the
 * projection endpoint. Highlights (selected sample, CE positions) are drawn
 * last as larger squares. */
export function renderScatter(
  coords: number[][],
  grades: number[],
  width: number,
  height: number,
  highlights: ScatterHighlight[] = [],
): Uint8ClampedArray<ArrayBuffer> {
  const data = new Uint8ClampedArray(width * height * 4);
  for (let i = 3; i < data.length; i += 4) data[i] = 255;
  const all = coords.concat(highlights.map((hl) => hl.coord));
  if (all.length === 0) return data;
  const xs = all.map((c) => c[0]);
  const ys = all.map((c) => c[1]);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const sx = (v: number) =>
    Math.round(((v - xMin) / (xMax - xMin || 1)) * (width - 9)) + 4;
  const sy = (v: number) =>
    height - 5 - Math.round(((v - yMin) / (yMax - yMin || 1)) * (height - 9));
  coords.forEach((c, i) => {
    drawSquare(data, width, height, sx(c[0]), sy(c[1]), 1, gradeColor(grades[i]));
  });
  for (const hl of highlights) {
    drawSquare(data, width, height, sx(hl.coord[0]), sy(hl.coord[1]), 3, hl.rgb);
  }
  return data;
}

/** Calibration curve (distance vs score) as a polyline, with an optional
 * vertical marker at the current sample's distance. */
export function renderCurve(
  curve: CalibrationPoint[],
  width: number,
  height: number,
  markDistance: number | null = null,
): Uint8ClampedArray<ArrayBuffer> {
  const data = new Uint8ClampedArray(width * height * 4);
  for (let i = 3; i < data.length; i += 4) data[i] = 255;
  if (curve.length === 0) return data;
  const ds = curve.map((p) => p.d);
  const scores = curve.map((p) => p.score);
  const dMin = Math.min(...ds);
  const dMax = Math.max(...ds);
  const sMin = Math.min(...scores);
  const sMax = Math.max(...scores);
  const px = (d: number) => Math.round(((d - dMin) / (dMax - dMin || 1)) * (width - 1));
  const py = (s: number) =>
    height - 1 - Math.round(((s - sMin) / (sMax - sMin || 1)) * (height - 1));
  if (markDistance !== null && markDistance >= dMin && markDistance <= dMax) {
    const x = px(markDistance);
    for (let y = 0; y < height; y++) fill(data, width, x, y, [220, 220, 220]);
  }
  for (let i = 1; i < curve.length; i++) {
    // integer line walk between consecutive curve points
    const x0 = px(curve[i - 1].d);
    const y0 = py(curve[i - 1].score);
    const x1 = px(curve[i].d);
    const y1 = py(curve[i].score);
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1);
    for (let s = 0; s <= steps; s++) {
      const x = Math.round(x0 + ((x1 - x0) * s) / steps);
      const y = Math.round(y0 + ((y1 - y0) * s) / steps);
      fill(data, width, x, y, [56, 132, 255]);
    }
  }
  return data;
}

/** FNV-1a hash of a pixel buffer; the determinism tests compare these. */
export function hashPixels(data: Uint8ClampedArray): string {
  let hash = 0x811c9dc5;
  for (let i = 0; i < data.length; i++) {
    hash ^= data[i];
    hash = Math.imul(hash, 0x01000193);
  }
  return (hash >>> 0).toString(16).padStart(8, "0");
}
