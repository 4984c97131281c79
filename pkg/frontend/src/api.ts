// Thin fetch wrapper around the scoring service. Stale responses are
// discarded by per-topic sequence numbers so a slow earlier request can
// never overwrite a newer view.

import type {
  CohortDetail,
  CohortSummary,
  ComparePayload,
  CurvePayload,
  FitResponse,
  ModelStatus,
  ServiceError,
  SubjectReport,
} from "./types.js";

export class ApiFailure extends Error {
  readonly code: string;
  readonly detail: unknown;
  readonly status: number;

  constructor(status: number, body: ServiceError) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

async function asFailure(response: Response): Promise<ApiFailure> {
  let body: ServiceError;
  try {
    body = (await response.json()) as ServiceError;
  } catch {
    body = { code: "http_error", message: `HTTP ${response.status}`, detail: null };
  }
  return new ApiFailure(response.status, body);
}

export class ApiClient {
  readonly baseUrl: string;
  private seq: Map<string, number> = new Map();

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) throw await asFailure(response);
    return (await response.json()) as T;
  }

  /** GET that resolves to null when a newer request on `topic` started since. */
  async getLatest<T>(topic: string, path: string): Promise<T | null> {
    const ticket = (this.seq.get(topic) ?? 0) + 1;
    this.seq.set(topic, ticket);
    const value = await this.get<T>(path);
    return this.seq.get(topic) === ticket ? value : null;
  }

  async uploadCohort(cohortFile: File, metadataFile?: File): Promise<CohortSummary> {
    const form = new FormData();
    form.append("cohort", cohortFile);
    if (metadataFile) form.append("metadata", metadataFile);
    const response = await fetch(this.baseUrl + "/cohorts", { method: "POST", body: form });
    if (!response.ok) throw await asFailure(response);
    return (await response.json()) as CohortSummary;
  }

  cohortDetail(cohortId: string): Promise<CohortDetail> {
    return this.get(`/cohorts/${cohortId}`);
  }

  async fit(cohortId: string, modes: string[], omega: number,
            pelvisSide: string): Promise<FitResponse> {
    const response = await fetch(this.baseUrl + `/cohorts/${cohortId}/fit`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ modes, omega, pelvis_side: pelvisSide, wait: true }),
    });
    if (!response.ok) throw await asFailure(response);
    return (await response.json()) as FitResponse;
  }

  modelStatus(modelId: string): Promise<ModelStatus> {
    return this.get(`/models/${modelId}`);
  }

  subjectReport(modelId: string, subjectId: string, mode: string,
                indices = "fgdi,gps"): Promise<SubjectReport> {
    const q = new URLSearchParams({ mode, indices });
    return this.get(`/models/${modelId}/subjects/${subjectId}/report?${q}`);
  }

  subjectCurves(modelId: string, subjectId: string, variable: string,
                withReconstruction: boolean): Promise<CurvePayload> {
    const q = new URLSearchParams({
      variable,
      with_reconstruction: String(withReconstruction),
    });
    return this.get(`/models/${modelId}/subjects/${subjectId}/curves?${q}`);
  }

  compare(modelId: string, sidA: string, sidB: string, mode: string): Promise<ComparePayload> {
    const q = new URLSearchParams({ sid_a: sidA, sid_b: sidB, mode });
    return this.get(`/models/${modelId}/compare?${q}`);
  }
}
