/** DOM wiring for the explorer. All model math happens server-side; this file
 * only moves API payloads into canvases and readouts.
 */

import { ApiClient, ApiError, type CounterfactualResponse, type PixelPayload } from "./api.js";
import { hashPixels, gradeColor, renderCurve, renderPixels, renderScatter } from "./render.js";
import { clampSlider, CoalescingRunner, initialState, sliderBounds, type UiState } from "./state.js";
import { detailReadout, formatSigned, galleryBadges } from "./viewmodel.js";

const BASE_URL = (window as unknown as { LATENTCE_BASE_URL?: string }).LATENTCE_BASE_URL ?? "";
const api = new ApiClient(BASE_URL);
const state: UiState = initialState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showBanner(message: string): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = message;
  banner.hidden = false;
}

function errorChip(message: string): void {
  const chip = el<HTMLSpanElement>("error-chip");
  chip.textContent = message;
  chip.hidden = false;
  window.setTimeout(() => {
    chip.hidden = true;
  }, 4000);
}

function paint(canvas: HTMLCanvasElement, payload: PixelPayload): void {
  const { data, width, height } = renderPixels(payload.image, payload.dims);
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.putImageData(new ImageData(data, width, height), 0, 0);
  canvas.dataset.pixelHash = hashPixels(data);
}

function renderReadouts(result: CounterfactualResponse): void {
  const readout = detailReadout(result);
  el("original-distance").textContent = formatSigned(readout.originalDistance);
  el("original-score").textContent = readout.originalScore.toFixed(3);
  el("edited-distance").textContent = formatSigned(readout.editedDistance);
  el("edited-score").textContent = readout.editedScore.toFixed(3);
  el("requested-grade").textContent = readout.requestedGrade.toFixed(1);
  el("mirror-note").hidden = !(state.mode === "reflect" && readout.distancesMirror);
}

function pushHistory(grade: number, result: CounterfactualResponse): void {
  state.history.push({ grade, result });
  const strip = el<HTMLDivElement>("history");
  const cell = document.createElement("div");
  cell.className = "history-cell";
  const canvas = document.createElement("canvas");
  paint(canvas, result.frames[result.frames.length - 1]);
  const label = document.createElement("span");
  label.textContent = `g=${grade.toFixed(1)} score=${result.edited_scores[
    result.edited_scores.length - 1
  ].toFixed(2)}`;
  cell.append(canvas, label);
  strip.append(cell);
}

const generator = new CoalescingRunner<number, CounterfactualResponse>(
  (grade) => {
    if (state.selectedId === null) return Promise.reject(new Error("no sample selected"));
    el<HTMLInputElement>("grade-slider").disabled = true;
    return api.counterfactual({
      id: state.selectedId,
      mode: state.mode,
      target_grade: state.mode === "target-grade" ? grade : undefined,
      allow_extrapolation: state.allowExtrapolation,
    });
  },
  (grade, result) => {
    el<HTMLInputElement>("grade-slider").disabled = false;
    state.lastResult = result;
    paint(el<HTMLCanvasElement>("recon-canvas"), result.reconstruction);
    paint(el<HTMLCanvasElement>("ce-canvas"), result.frames[result.frames.length - 1]);
    renderReadouts(result);
    pushHistory(grade, result);
    void refreshGeometry(result);
  },
  (_grade, error) => {
    el<HTMLInputElement>("grade-slider").disabled = false;
    errorChip(error instanceof ApiError ? error.body.message : String(error));
  },
);

async function refreshGeometry(result: CounterfactualResponse | null): Promise<void> {
  try {
    state.projectionCache ??= await api.projection("test");
    state.calibrationCache ??= await api.calibration();
  } catch {
    el("geometry-placeholder").hidden = false;
    return;
  }
  el("geometry-placeholder").hidden = true;
  const proj = state.projectionCache;
  const highlights = [];
  if (result) {
    // the projection plot only positions catalogued samples; latent-space
    // positions of edits come from the API's edited_latents verbatim
    const idx = state.selectedId === null ? -1 : proj.ids.indexOf(state.selectedId);
    if (idx >= 0) {
      highlights.push({ coord: proj.coords[idx] as [number, number], rgb: [0, 0, 0] as const });
    }
  }
  const scatter = renderScatter(proj.coords, proj.grades, 320, 320, highlights);
  const scatterCanvas = el<HTMLCanvasElement>("scatter-canvas");
  scatterCanvas.width = 320;
  scatterCanvas.height = 320;
  scatterCanvas.getContext("2d")?.putImageData(new ImageData(scatter, 320, 320), 0, 0);

  const mark = result ? result.original_distance : null;
  const curve = renderCurve(state.calibrationCache.curve, 320, 160, mark);
  const curveCanvas = el<HTMLCanvasElement>("curve-canvas");
  curveCanvas.width = 320;
  curveCanvas.height = 160;
  curveCanvas.getContext("2d")?.putImageData(new ImageData(curve, 320, 160), 0, 0);

  const legend = el<HTMLDivElement>("legend");
  legend.replaceChildren(
    ...[0, 1, 2, 3].map((g) => {
      const item = document.createElement("span");
      const [r, gg, b] = gradeColor(g);
      item.style.color = `rgb(${r},${gg},${b})`;
      item.textContent = `grade ${g}`;
      return item;
    }),
  );
}

async function selectSample(id: number): Promise<void> {
  state.selectedId = id;
  state.history = [];
  el<HTMLDivElement>("history").replaceChildren();
  try {
    const detail = await api.sample(id);
    paint(el<HTMLCanvasElement>("original-canvas"), detail);
    el("selected-label").textContent = `sample ${detail.id} (grade ${detail.grade}, g=${detail.g.toFixed(3)})`;
    generator.submit(state.sliderGrade);
  } catch (error) {
    errorChip(error instanceof ApiError ? error.body.message : String(error));
  }
}

async function buildGallery(): Promise<void> {
  let samples;
  try {
    samples = await api.samples("test");
  } catch {
    showBanner("service unreachable — is `latentce serve` running?");
    el<HTMLButtonElement>("retry").hidden = false;
    return;
  }
  el<HTMLDivElement>("banner").hidden = true;
  const gallery = el<HTMLDivElement>("gallery");
  gallery.replaceChildren();
  if (samples.length === 0) {
    gallery.textContent = "no samples in the test split";
    return;
  }
  for (const badge of galleryBadges(samples)) {
    const button = document.createElement("button");
    button.className = "thumb";
    const [r, g, b] = gradeColor(badge.gradeBadge);
    button.style.borderColor = `rgb(${r},${g},${b})`;
    button.textContent = `#${badge.id} · G${badge.gradeBadge}`;
    button.addEventListener("click", () => void selectSample(badge.id));
    gallery.append(button);
  }
}

function wireControls(): void {
  const slider = el<HTMLInputElement>("grade-slider");
  const applyBounds = () => {
    const { min, max } = sliderBounds(state);
    slider.min = String(min);
    slider.max = String(max);
    state.sliderGrade = clampSlider(state, state.sliderGrade);
    slider.value = String(state.sliderGrade);
  };
  applyBounds();
  slider.addEventListener("input", () => {
    state.sliderGrade = clampSlider(state, Number(slider.value));
    el("slider-value").textContent = state.sliderGrade.toFixed(1);
    if (state.selectedId !== null && state.mode === "target-grade") {
      generator.submit(state.sliderGrade);
    }
  });
  el<HTMLInputElement>("extrapolate").addEventListener("change", (event) => {
    state.allowExtrapolation = (event.target as HTMLInputElement).checked;
    applyBounds();
  });
  el<HTMLSelectElement>("mode").addEventListener("change", (event) => {
    state.mode = (event.target as HTMLSelectElement).value as UiState["mode"];
    if (state.selectedId !== null) generator.submit(state.sliderGrade);
  });
  el<HTMLButtonElement>("retry").addEventListener("click", () => void buildGallery());
}

wireControls();
void buildGallery();
void refreshGeometry(null);
