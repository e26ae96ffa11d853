/** Typed client for the latentce HTTP API.
 *
 * Every number the UI shows comes out of one of these response shapes; the
 * client never post-processes values beyond JSON parsing.
 */

export interface SampleSummary {
  id: number;
  grade: number;
  g: number;
}

export interface PixelPayload {
  image: number[];
  dims: number[];
}

export interface SampleDetail extends SampleSummary, PixelPayload {}

export interface EncodeResponse {
  z_sem: number[];
  distance: number;
  score: number;
  grade: number;
}

export interface CounterfactualResponse {
  requested_grades: number[];
  original_distance: number;
  original_score: number;
  edited_distances: number[];
  edited_scores: number[];
  original_latent: number[];
  edited_latents: number[][];
  frames: PixelPayload[];
  reconstruction: PixelPayload;
}

export interface CalibrationPoint {
  d: number;
  score: number;
}

export interface CalibrationResponse {
  mode: string;
  degree: number;
  gmax: number;
  curve: CalibrationPoint[];
}

export interface ProjectionResponse {
  split: string;
  ids: number[];
  grades: number[];
  coords: number[][];
  explained_variance_ratio: number[];
  warning: string | null;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

export interface CounterfactualRequestBody {
  id: number;
  mode: "reflect" | "target-grade" | "sweep";
  target_grade?: number;
  sweep_grades?: number[];
  allow_extrapolation?: boolean;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload as ApiErrorBody);
    }
    return payload as T;
  }

  health(): Promise<{ status: string; model_loaded: boolean }> {
    return this.request("/api/health");
  }

  samples(split = "test"): Promise<SampleSummary[]> {
    return this.request(`/api/samples?split=${encodeURIComponent(split)}`);
  }

  sample(id: number): Promise<SampleDetail> {
    return this.request(`/api/sample/${id}`);
  }

  counterfactual(body: CounterfactualRequestBody): Promise<CounterfactualResponse> {
    return this.request("/api/counterfactual", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  calibration(): Promise<CalibrationResponse> {
    return this.request("/api/calibration");
  }

  projection(split = "test"): Promise<ProjectionResponse> {
    return this.request(`/api/projection?split=${encodeURIComponent(split)}`);
  }
}
