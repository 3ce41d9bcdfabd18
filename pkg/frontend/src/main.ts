/** Application shell: hash router, event delegation, API wiring.

All rendering goes through the pure functions in render.ts; this file
owns the mutable state, the fetch lifecycle and the job pollers. The
pollers live only while the run view is mounted and are cancelled the
moment the user navigates away.
*/

import { Api, ApiError } from "./api.js";
import { pollJob, PollHandle } from "./poll.js";
import {
  renderErrorBox,
  renderExploreView,
  renderHistogram,
  renderJobResult,
  renderRunView,
  renderUploadView,
  TestSort,
} from "./render.js";
import {
  buildJobPayload,
  initialState,
  setDatasets,
  setJobKind,
  setParamEdit,
  toggleAlgorithm,
  upsertJob,
  UiState,
} from "./state.js";
import type { AlgorithmInfo, DatasetKind, DatasetRecord, JobKind, JobRecord, JobResult } from "./types.js";

type Route = "#/upload" | "#/run" | "#/explore";

const api = new Api();

let state: UiState = initialState();
let catalog: AlgorithmInfo[] = [];
let route: Route = "#/upload";
let uploadErrorHtml = "";
let runErrorHtml = "";
let exploreErrorHtml = "";
let histogramHtml = '<p class="empty">choose a dataset to plot</p>';
let draftErrors: Record<string, string> = {};
let lastResult: JobResult | null = null;
let resultSort: TestSort = "feature";
let histogramToken = 0;
const pollers = new Map<string, PollHandle>();

function appRoot(): HTMLElement {
  const el = document.getElementById("app");
  if (!el) {
    throw new Error("missing #app container");
  }
  return el;
}

function normalizeRoute(hash: string): Route {
  if (hash === "#/run" || hash === "#/explore") {
    return hash;
  }
  return "#/upload";
}

function errorHtml(err: unknown): string {
  if (err instanceof ApiError) {
    return renderErrorBox(err.message, err.detail ?? undefined);
  }
  return renderErrorBox(String(err));
}

/* -------------------------------------------------------------- render */

function render(): void {
  const nav = (target: Route, label: string) =>
    `<a href="${target}" class="nav-link${route === target ? " active" : ""}">${label}</a>`;
  let view = "";
  if (route === "#/upload") {
    view = renderUploadView(state, uploadErrorHtml);
  } else if (route === "#/run") {
    const resultHtml = lastResult ? renderJobResult(lastResult, resultSort) : "";
    view = renderRunView(state, catalog, draftErrors, runErrorHtml + resultHtml);
  } else {
    view = renderExploreView(state, exploreSelectors(), histogramHtml, exploreErrorHtml);
  }
  appRoot().innerHTML =
    `<nav class="top-nav">${nav("#/upload", "upload")}${nav("#/run", "run")}${nav("#/explore", "explore")}</nav>` +
    view;
}

/* ------------------------------------------------------------- uploads */

async function uploadFile(file: File): Promise<void> {
  const kindSelect = document.getElementById("upload-kind") as HTMLSelectElement | null;
  const nameInput = document.getElementById("upload-name") as HTMLInputElement | null;
  const kind = (kindSelect?.value ?? "features") as DatasetKind;
  const name = nameInput?.value.trim() || file.name.replace(/\.csv$/i, "");
  try {
    await api.uploadDataset(file, kind, name);
    uploadErrorHtml = "";
    await refreshDatasets();
  } catch (err) {
    uploadErrorHtml = errorHtml(err);
  }
  render();
}

async function refreshDatasets(): Promise<void> {
  const { datasets } = await api.datasets();
  state = setDatasets(state, datasets);
}

/* ---------------------------------------------------------------- jobs */

function startPolling(job: JobRecord): void {
  if (pollers.has(job.id) || job.status === "done" || job.status === "error") {
    return;
  }
  const handle = pollJob(
    (id) => api.job(id),
    job.id,
    (record) => {
      state = upsertJob(state, record);
      if (record.status === "done" || record.status === "error") {
        pollers.delete(job.id);
        if (record.status === "done" && record.result) {
          lastResult = record.result;
        }
      }
      if (route === "#/run") {
        render();
      }
    },
    (err) => {
      pollers.delete(job.id);
      runErrorHtml = errorHtml(err);
      if (route === "#/run") {
        render();
      }
    },
  );
  pollers.set(job.id, handle);
}

function cancelPollers(): void {
  for (const handle of pollers.values()) {
    handle.cancel();
  }
  pollers.clear();
}

async function enterRunView(): Promise<void> {
  try {
    const { jobs } = await api.jobs();
    const ordered = [...jobs].sort((a, b) => (a.created_at < b.created_at ? 1 : -1));
    state = { ...state, jobs: ordered };
    runErrorHtml = "";
    for (const job of ordered) {
      startPolling(job);
    }
  } catch (err) {
    runErrorHtml = errorHtml(err);
  }
  render();
}

async function submitJob(): Promise<void> {
  const draft = buildJobPayload(state, catalog);
  if (!draft.payload) {
    draftErrors = draft.errors;
    render();
    return;
  }
  draftErrors = {};
  try {
    const record = await api.createJob(draft.payload);
    state = upsertJob(state, record);
    runErrorHtml = "";
    startPolling(record);
  } catch (err) {
    runErrorHtml = errorHtml(err);
  }
  render();
}

async function showResult(jobId: string): Promise<void> {
  try {
    const record = await api.job(jobId);
    if (record.result) {
      lastResult = record.result;
      runErrorHtml = "";
    }
  } catch (err) {
    runErrorHtml = errorHtml(err);
  }
  render();
}

/* ------------------------------------------------------------- explore */

function exploreSelectors(): string[] {
  const byId = new Map(state.datasets.map((record) => [record.id, record]));
  const primary = state.explore.datasetId ? byId.get(state.explore.datasetId) : undefined;
  if (!primary) {
    return [];
  }
  const selectorsOf = (record: DatasetRecord): string[] => {
    const names = [...record.columns];
    if (record.kind === "predictions" && record.has_labels) {
      names.push("p_positive split by label");
    }
    return names;
  };
  const options = selectorsOf(primary);
  const compare = state.explore.compareId ? byId.get(state.explore.compareId) : undefined;
  if (!compare) {
    return options;
  }
  const both = new Set(selectorsOf(compare));
  return options.filter((name) => both.has(name));
}

function refetchHistogram(): void {
  const { datasetId, compareId, selector, bins, normalized } = state.explore;
  if (!datasetId || !selector) {
    histogramHtml = '<p class="empty">choose a dataset to plot</p>';
    exploreErrorHtml = "";
    render();
    return;
  }
  const token = ++histogramToken;
  api
    .histogram(datasetId, selector, bins, compareId, normalized)
    .then((summary) => {
      if (token !== histogramToken) {
        return; // a newer request superseded this one
      }
      histogramHtml = renderHistogram(summary);
      exploreErrorHtml = "";
      render();
    })
    .catch((err) => {
      if (token !== histogramToken) {
        return;
      }
      histogramHtml = "";
      exploreErrorHtml = errorHtml(err);
      render();
    });
}

function setExplore(patch: Partial<UiState["explore"]>): void {
  state = { ...state, explore: { ...state.explore, ...patch } };
  const options = exploreSelectors();
  if (!options.includes(state.explore.selector)) {
    state = { ...state, explore: { ...state.explore, selector: options[0] ?? "" } };
  }
  refetchHistogram();
}

/* -------------------------------------------------------------- events */

function onClick(event: MouseEvent): void {
  const target = event.target instanceof Element ? event.target : null;
  const actionEl = target?.closest("[data-action]");
  if (actionEl instanceof HTMLElement) {
    const action = actionEl.dataset.action;
    if (action === "delete-dataset") {
      const id = actionEl.dataset.id ?? "";
      api
        .deleteDataset(id)
        .then(refreshDatasets)
        .catch((err) => {
          uploadErrorHtml = errorHtml(err);
        })
        .finally(render);
      return;
    }
    if (action === "set-kind") {
      event.preventDefault();
      state = setJobKind(state, actionEl.dataset.kind as JobKind, catalog);
      draftErrors = {};
      render();
      return;
    }
    if (action === "run") {
      void submitJob();
      return;
    }
    if (action === "show-result") {
      void showResult(actionEl.dataset.id ?? "");
      return;
    }
  }
  const sortHeader = target?.closest("th[data-sort]");
  if (sortHeader instanceof HTMLElement && lastResult) {
    resultSort = sortHeader.dataset.sort === "corrected_p" ? "corrected_p" : "feature";
    render();
  }
}

function onChange(event: Event): void {
  const target = event.target;
  if (target instanceof HTMLInputElement && target.id === "upload-file") {
    const file = target.files?.[0];
    if (file) {
      void uploadFile(file);
    }
    return;
  }
  if (target instanceof HTMLSelectElement && target.dataset.action === "set-slot") {
    const field = target.dataset.field as
      | "referenceId"
      | "targetId"
      | "referencePredictionsId"
      | "targetPredictionsId";
    state = { ...state, [field]: target.value || null };
    render();
    return;
  }
  if (target instanceof HTMLInputElement && target.dataset.action === "toggle-algo") {
    state = toggleAlgorithm(state, target.dataset.id ?? "");
    render();
    return;
  }
  if (target instanceof HTMLInputElement && target.dataset.algo && target.dataset.param) {
    state = setParamEdit(state, target.dataset.algo, target.dataset.param, target.value);
    delete draftErrors[`${target.dataset.algo}.${target.dataset.param}`];
    render();
    return;
  }
  if (target instanceof HTMLInputElement && target.id === "run-seed") {
    const value = Number(target.value);
    if (Number.isInteger(value)) {
      state = { ...state, seed: value };
    }
    return;
  }
  if (target instanceof HTMLInputElement && target.id === "run-batches") {
    const value = Number(target.value);
    if (Number.isInteger(value) && value > 0) {
      state = { ...state, nBatches: value };
    }
    return;
  }
  if (target instanceof HTMLInputElement && target.id === "run-batch-size") {
    const value = Number(target.value);
    if (Number.isInteger(value) && value > 0) {
      state = { ...state, batchSize: value };
    }
    return;
  }
  if (target instanceof HTMLSelectElement && target.id === "explore-dataset") {
    setExplore({ datasetId: target.value || null });
    return;
  }
  if (target instanceof HTMLSelectElement && target.id === "explore-compare") {
    setExplore({ compareId: target.value || null });
    return;
  }
  if (target instanceof HTMLSelectElement && target.id === "explore-selector") {
    setExplore({ selector: target.value });
    return;
  }
  if (target instanceof HTMLInputElement && target.id === "explore-bins") {
    setExplore({ bins: Number(target.value) });
    return;
  }
  if (target instanceof HTMLInputElement && target.id === "explore-normalized") {
    setExplore({ normalized: target.checked });
    return;
  }
}

function onInput(event: Event): void {
  const target = event.target;
  if (target instanceof HTMLInputElement && target.id === "explore-bins") {
    const label = document.getElementById("bins-value");
    if (label) {
      label.textContent = target.value;
    }
  }
}

function onSubmit(event: Event): void {
  const target = event.target;
  if (target instanceof HTMLFormElement && target.id === "upload-form") {
    event.preventDefault();
    const fileInput = document.getElementById("upload-file") as HTMLInputElement | null;
    const file = fileInput?.files?.[0];
    if (file) {
      void uploadFile(file);
    } else {
      uploadErrorHtml = renderErrorBox("choose or drop a CSV file first");
      render();
    }
  }
}

function onDragOver(event: DragEvent): void {
  const target = event.target instanceof Element ? event.target : null;
  if (target?.closest("#drop-zone")) {
    event.preventDefault();
  }
}

function onDrop(event: DragEvent): void {
  const target = event.target instanceof Element ? event.target : null;
  if (!target?.closest("#drop-zone")) {
    return;
  }
  event.preventDefault();
  const file = event.dataTransfer?.files?.[0];
  if (file) {
    void uploadFile(file);
  }
}

/* ---------------------------------------------------------------- boot */

function onRouteChange(): void {
  const next = normalizeRoute(location.hash);
  if (next === route) {
    render();
    return;
  }
  if (route === "#/run") {
    cancelPollers(); // leaving the run view stops all job polling
  }
  route = next;
  if (route === "#/run") {
    void enterRunView();
    return;
  }
  if (route === "#/explore") {
    refetchHistogram();
    return;
  }
  render();
}

async function boot(): Promise<void> {
  const root = appRoot();
  root.addEventListener("click", onClick);
  root.addEventListener("change", onChange);
  root.addEventListener("input", onInput);
  root.addEventListener("submit", onSubmit);
  root.addEventListener("dragover", onDragOver);
  root.addEventListener("drop", onDrop);
  window.addEventListener("hashchange", onRouteChange);
  route = normalizeRoute(location.hash);
  try {
    const [algoResponse] = await Promise.all([api.algorithms(), refreshDatasets()]);
    catalog = algoResponse.algorithms;
  } catch (err) {
    uploadErrorHtml = errorHtml(err);
  }
  if (route === "#/run") {
    await enterRunView();
  } else {
    render();
  }
}

void boot();
