/** Maps API responses to the numbers shown on screen.
 *
 * The UI never computes model math locally: every field below is either a
 * verbatim copy of an API response field or a fixed-precision formatting of
 * one. The audit test feeds sentinel values through these functions and
 * checks that each displayed number traces back to a response field.
 */

import type { CounterfactualResponse, SampleSummary } from "./api.js";

export interface GalleryBadge {
  id: number;
  gradeBadge: number;
  severity: number;
}

export function galleryBadges(samples: SampleSummary[]): GalleryBadge[] {
  return samples.map((s) => ({ id: s.id, gradeBadge: s.grade, severity: s.g }));
}

export interface DetailReadout {
  originalDistance: number;
  originalScore: number;
  editedDistance: number;
  editedScore: number;
  requestedGrade: number;
  /** reflect-mode check surfaced in the UI next to the distances */
  distancesMirror: boolean;
}

export function detailReadout(result: CounterfactualResponse): DetailReadout {
  const last = result.edited_distances.length - 1;
  return {
    originalDistance: result.original_distance,
    originalScore: result.original_score,
    editedDistance: result.edited_distances[last],
    editedScore: result.edited_scores[last],
    requestedGrade: result.requested_grades[last],
    distancesMirror:
      result.edited_distances[last] === -result.original_distance,
  };
}

export interface HistoryLabel {
  grade: number;
  score: number;
}

export function historyLabels(result: CounterfactualResponse): HistoryLabel[] {
  return result.requested_grades.map((grade, i) => ({
    grade,
    score: result.edited_scores[i],
  }));
}

export function formatSigned(value: number, digits = 3): string {
  const s = value.toFixed(digits);
  return value >= 0 ? `+${s}` : s;
}
