// DOM wiring: reads controls, calls the service, renders view strings.
// All numbers shown on screen come from service payloads held in ViewState.

import { ApiClient, ApiFailure } from "./api.js";
import type { CohortDetail, CurvePayload, SubjectReport } from "./types.js";
import {
  compareView,
  errorBanner,
  fitCounts,
  subjectDashboard,
  subjectOptions,
  uploadSummaryCard,
} from "./views.js";

interface ViewState {
  cohortId: string | null;
  cohortDetail: CohortDetail | null;
  modelId: string | null;
  mode: string;
  subjectId: string | null;
  variable: string;
  showReconstruction: boolean;
  report: SubjectReport | null;
  curves: CurvePayload | null;
}

declare global {
  interface Window {
    FGDI_BASE_URL?: string;
  }
}

const api = new ApiClient(window.FGDI_BASE_URL ?? "");
const state: ViewState = {
  cohortId: null,
  cohortDetail: null,
  modelId: null,
  mode: "combined",
  subjectId: null,
  variable: "L_knee_flexion",
  showReconstruction: false,
  report: null,
  curves: null,
};

const el = (id: string) => document.getElementById(id) as HTMLElement;

function showError(target: HTMLElement, error: unknown): void {
  const message = error instanceof ApiFailure ? error.message
    : error instanceof Error ? error.message : String(error);
  target.innerHTML = errorBanner(message);
}

async function refreshDashboard(): Promise<void> {
  if (!state.modelId || !state.subjectId) return;
  const target = el("dashboard");
  try {
    const key = `${state.modelId}/${state.subjectId}/${state.mode}/${state.variable}`;
    const report = await api.getLatest<SubjectReport>(
      "report", `/models/${state.modelId}/subjects/${state.subjectId}/report?` +
      new URLSearchParams({ mode: state.mode, indices: "fgdi,gps" }));
    if (!report) return; // a newer request superseded this one
    const curves = await api.getLatest<CurvePayload>(
      "curves", `/models/${state.modelId}/subjects/${state.subjectId}/curves?` +
      new URLSearchParams({ variable: state.variable, with_reconstruction: "true" }));
    if (!curves) return;
    state.report = report;
    state.curves = curves;
    void key;
    target.innerHTML = subjectDashboard(report, curves, state.showReconstruction);
  } catch (error) {
    showError(target, error);
  }
}

function wireUpload(): void {
  const form = el("upload-form") as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const target = el("upload-result");
    const cohortInput = el("cohort-file") as HTMLInputElement;
    const metadataInput = el("metadata-file") as HTMLInputElement;
    const file = cohortInput.files?.[0];
    if (!file) {
      target.innerHTML = errorBanner("choose a cohort CSV first");
      return;
    }
    try {
      const summary = await api.uploadCohort(file, metadataInput.files?.[0]);
      state.cohortId = summary.cohort_id;
      state.cohortDetail = await api.cohortDetail(summary.cohort_id);
      target.innerHTML = uploadSummaryCard(summary);
      (el("fit-form") as HTMLFormElement).hidden = false;
    } catch (error) {
      showError(target, error);
    }
  });
}

function wireFit(): void {
  const form = el("fit-form") as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!state.cohortId) return;
    const target = el("fit-result");
    const omega = parseFloat((el("omega") as HTMLInputElement).value);
    const pelvis = (el("pelvis-side") as HTMLSelectElement).value;
    const modes = Array.from(
      form.querySelectorAll<HTMLInputElement>("input[name=mode]:checked"),
    ).map((box) => box.value);
    try {
      const fit = await api.fit(state.cohortId, modes, omega, pelvis);
      state.modelId = fit.model_id;
      state.mode = modes[0] ?? "combined";
      target.innerHTML = fitCounts(fit.counts ?? {});
      const picker = el("subject-select") as HTMLSelectElement;
      picker.innerHTML = subjectOptions(state.cohortDetail!);
      const variablePicker = el("variable-select") as HTMLSelectElement;
      variablePicker.innerHTML = state.cohortDetail!.variables
        .map((v) => `<option value="${v}">${v}</option>`).join("");
      variablePicker.value = state.variable;
      (el("subject-panel") as HTMLElement).hidden = false;
      state.subjectId = state.cohortDetail!.subjects[0]?.subject_id ?? null;
      picker.value = state.subjectId ?? "";
      await refreshDashboard();
    } catch (error) {
      showError(target, error);
    }
  });
}

function wireDashboard(): void {
  (el("subject-select") as HTMLSelectElement).addEventListener("change", (event) => {
    state.subjectId = (event.target as HTMLSelectElement).value;
    void refreshDashboard();
  });
  (el("variable-select") as HTMLSelectElement).addEventListener("change", (event) => {
    state.variable = (event.target as HTMLSelectElement).value;
    void refreshDashboard();
  });
  (el("mode-select") as HTMLSelectElement).addEventListener("change", (event) => {
    state.mode = (event.target as HTMLSelectElement).value;
    void refreshDashboard();
  });
  (el("reconstruction-toggle") as HTMLInputElement).addEventListener("change", (event) => {
    state.showReconstruction = (event.target as HTMLInputElement).checked;
    if (state.report && state.curves) {
      el("dashboard").innerHTML = subjectDashboard(
        state.report, state.curves, state.showReconstruction);
    }
  });
}

function wireCompare(): void {
  (el("compare-form") as HTMLFormElement).addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!state.modelId) return;
    const target = el("compare-result");
    const sidA = (el("compare-a") as HTMLInputElement).value.trim();
    const sidB = (el("compare-b") as HTMLInputElement).value.trim();
    try {
      const payload = await api.compare(state.modelId, sidA, sidB, state.mode);
      target.innerHTML = compareView(payload);
    } catch (error) {
      showError(target, error);
    }
  });
}

export function start(): void {
  wireUpload();
  wireFit();
  wireDashboard();
  wireCompare();
}

if (typeof document !== "undefined" && document.getElementById("upload-form")) {
  start();
}
