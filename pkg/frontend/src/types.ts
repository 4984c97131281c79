// Payload shapes of the scoring service JSON API. The UI renders these
// verbatim; every displayed number comes from one of these fields.

export interface CohortSummary {
  cohort_id: string;
  n_subjects: number;
  n_healthy: number;
  T: number;
}

export interface SubjectEntry {
  subject_id: string;
  healthy: boolean;
  metadata: Record<string, unknown>;
}

export interface CohortDetail extends CohortSummary {
  subjects: SubjectEntry[];
  variables: string[];
}

export interface ModeCounts {
  K_u: Record<string, number>;
  K_plus: number;
  W: number | null;
}

export interface FitResponse {
  model_id: string;
  status: "ready" | "pending";
  counts?: Record<string, ModeCounts>;
}

export interface ModelStatus {
  model_id: string;
  status: "pending" | "ready" | "failed";
  cohort_id: string;
  counts: Record<string, ModeCounts> | null;
  error: string | null;
}

export interface SubjectReport {
  subject_id: string;
  mode: string;
  healthy: boolean;
  fgdi?: number;
  sfgdi?: number;
  gps?: number;
  gdi?: number;
  sgdi?: number;
  oa?: number;
  map_profile: Record<string, number>;
  gvs?: Record<string, number>;
  flags: string[];
  metadata: Record<string, unknown>;
}

export interface HealthyBand {
  kind: string;
  lower: number[];
  upper: number[];
}

export interface CurvePayload {
  subject_id: string;
  variable: string;
  label: string;
  grid: number[];
  observed: number[];
  healthy_mean: number[];
  healthy_band: HealthyBand;
  reconstruction?: number[];
}

export interface CompareSide {
  subject_id: string;
  healthy: boolean;
  metadata: Record<string, unknown>;
  map: number[];
}

export interface ComparePayload {
  mode: string;
  variables: string[];
  labels: string[];
  a: CompareSide;
  b: CompareSide;
}

export interface ServiceError {
  code: string;
  message: string;
  detail: unknown;
}
