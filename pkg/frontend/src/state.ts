/** UI state and the single-request coalescing gate.
 *
 * The service does the heavy lifting, so the explorer only ever keeps one
 * generation request in flight; slider input arriving meanwhile replaces the
 * pending value instead of queueing (latest-wins).
 */

import type { CalibrationResponse, CounterfactualResponse, ProjectionResponse } from "./api.js";

export const GRADE_MAX = 3;
export const SLIDER_STEP = 0.1;

export type Mode = "reflect" | "target-grade" | "sweep";

export interface HistoryEntry {
  grade: number;
  result: CounterfactualResponse;
}

export interface UiState {
  selectedId: number | null;
  mode: Mode;
  sliderGrade: number;
  allowExtrapolation: boolean;
  lastResult: CounterfactualResponse | null;
  history: HistoryEntry[];
  calibrationCache: CalibrationResponse | null;
  projectionCache: ProjectionResponse | null;
}

export function initialState(): UiState {
  return {
    selectedId: null,
    mode: "target-grade",
    sliderGrade: 0,
    allowExtrapolation: false,
    lastResult: null,
    history: [],
    calibrationCache: null,
    projectionCache: null,
  };
}

export function sliderBounds(state: UiState): { min: number; max: number } {
  return state.allowExtrapolation
    ? { min: -1, max: GRADE_MAX + 1 }
    : { min: 0, max: GRADE_MAX };
}

export function clampSlider(state: UiState, grade: number): number {
  const { min, max } = sliderBounds(state);
  const snapped = Math.round(grade / SLIDER_STEP) * SLIDER_STEP;
  return Math.min(max, Math.max(min, Number(snapped.toFixed(1))));
}

/** Latest-wins scheduler: at most one task in flight, newer submissions
 * overwrite the pending value while a task runs. */
export class CoalescingRunner<T, R> {
  private pending: T | null = null;
  private running = false;
  inFlightCount = 0;
  maxObservedInFlight = 0;

  constructor(
    private readonly task: (value: T) => Promise<R>,
    private readonly onResult: (value: T, result: R) => void,
    private readonly onError: (value: T, error: unknown) => void = () => {},
  ) {}

  submit(value: T): void {
    this.pending = value;
    if (!this.running) {
      void this.drain();
    }
  }

  get busy(): boolean {
    return this.running;
  }

  private async drain(): Promise<void> {
    this.running = true;
    while (this.pending !== null) {
      const value = this.pending;
      this.pending = null;
      this.inFlightCount += 1;
      this.maxObservedInFlight = Math.max(this.maxObservedInFlight, this.inFlightCount);
      try {
        const result = await this.task(value);
        this.onResult(value, result);
      } catch (error) {
        this.onError(value, error);
      } finally {
        this.inFlightCount -= 1;
      }
    }
    this.running = false;
  }
}
