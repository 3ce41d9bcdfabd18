/** UI state and the pure transitions the views share.

Everything here is plain data in, plain data out, so the invariants
(run gating, selection cleanup after deletes, parameter validation
before submission) are directly unit-testable.
*/

import { algorithmsForKind, buildConfig } from "./catalog.js";
import type { AlgorithmInfo, DatasetRecord, JobKind, JobRecord } from "./types.js";

export interface ExploreState {
  datasetId: string | null;
  compareId: string | null;
  selector: string;
  bins: number;
  normalized: boolean;
}

export interface UiState {
  datasets: DatasetRecord[];
  jobKind: JobKind;
  referenceId: string | null;
  targetId: string | null;
  referencePredictionsId: string | null;
  targetPredictionsId: string | null;
  selectedAlgorithms: string[];
  /** raw text box contents per algorithm id, per parameter name */
  paramEdits: Record<string, Record<string, string>>;
  seed: number;
  nBatches: number;
  batchSize: number;
  jobs: JobRecord[];
  explore: ExploreState;
}

export function initialState(): UiState {
  return {
    datasets: [],
    jobKind: "detect",
    referenceId: null,
    targetId: null,
    referencePredictionsId: null,
    targetPredictionsId: null,
    selectedAlgorithms: [],
    paramEdits: {},
    seed: 0,
    nBatches: 20,
    batchSize: 5000,
    jobs: [],
    explore: { datasetId: null, compareId: null, selector: "", bins: 50, normalized: false },
  };
}

/** Dataset slots a job kind fills, with the dataset kind each expects. */
export const KIND_SLOTS: Record<
  JobKind,
  { field: keyof UiState; label: string; dataset: "features" | "predictions" }[]
> = {
  detect: [
    { field: "referenceId", label: "reference features", dataset: "features" },
    { field: "targetId", label: "target features", dataset: "features" },
  ],
  baseline: [{ field: "referenceId", label: "reference features", dataset: "features" }],
  cdi: [
    { field: "referenceId", label: "reference predictions", dataset: "predictions" },
    { field: "targetId", label: "target predictions", dataset: "predictions" },
  ],
  study: [
    { field: "referenceId", label: "reference features", dataset: "features" },
    { field: "targetId", label: "target features", dataset: "features" },
    { field: "referencePredictionsId", label: "reference predictions", dataset: "predictions" },
    { field: "targetPredictionsId", label: "target predictions", dataset: "predictions" },
  ],
};

/** Replace the dataset list, dropping any selection that disappeared. */
export function setDatasets(state: UiState, datasets: DatasetRecord[]): UiState {
  const ids = new Set(datasets.map((record) => record.id));
  const keep = (id: string | null) => (id !== null && ids.has(id) ? id : null);
  return {
    ...state,
    datasets,
    referenceId: keep(state.referenceId),
    targetId: keep(state.targetId),
    referencePredictionsId: keep(state.referencePredictionsId),
    targetPredictionsId: keep(state.targetPredictionsId),
    explore: {
      ...state.explore,
      datasetId: keep(state.explore.datasetId),
      compareId: keep(state.explore.compareId),
    },
  };
}

export function toggleAlgorithm(state: UiState, id: string): UiState {
  const selected = state.selectedAlgorithms.includes(id)
    ? state.selectedAlgorithms.filter((existing) => existing !== id)
    : [...state.selectedAlgorithms, id];
  return { ...state, selectedAlgorithms: selected };
}

export function setParamEdit(
  state: UiState,
  algoId: string,
  param: string,
  raw: string,
): UiState {
  const forAlgo = { ...(state.paramEdits[algoId] ?? {}), [param]: raw };
  return { ...state, paramEdits: { ...state.paramEdits, [algoId]: forAlgo } };
}

/** Switching kinds clears algorithm picks that the kind cannot use. */
export function setJobKind(state: UiState, kind: JobKind, catalog: AlgorithmInfo[]): UiState {
  const usable = new Set(algorithmsForKind(catalog, kind).map((algo) => algo.id));
  return {
    ...state,
    jobKind: kind,
    selectedAlgorithms: state.selectedAlgorithms.filter((id) => usable.has(id)),
  };
}

/**
 * The run gate: every dataset slot of the kind is filled with a dataset
 * of the right kind, and at least one algorithm is picked whenever the
 * kind offers a choice.
 */
export function canRun(state: UiState, catalog: AlgorithmInfo[]): boolean {
  const byId = new Map(state.datasets.map((record) => [record.id, record]));
  for (const slot of KIND_SLOTS[state.jobKind]) {
    const id = state[slot.field];
    if (typeof id !== "string") {
      return false;
    }
    const record = byId.get(id);
    if (!record || record.kind !== slot.dataset) {
      return false;
    }
  }
  const offersChoice = algorithmsForKind(catalog, state.jobKind).length > 0;
  if (offersChoice && state.selectedAlgorithms.length === 0) {
    return false;
  }
  return true;
}

export interface JobDraft {
  payload?: Record<string, unknown>;
  errors: Record<string, string>;
}

/**
 * Validate the parameter edits and assemble the POST /api/jobs body.
 * Returns errors instead of a payload when anything fails validation.
 */
export function buildJobPayload(state: UiState, catalog: AlgorithmInfo[]): JobDraft {
  if (!canRun(state, catalog)) {
    return { errors: { form: "select datasets and at least one algorithm" } };
  }
  const { config, errors } = buildConfig(
    catalog,
    state.selectedAlgorithms,
    state.paramEdits,
  );
  if (Object.keys(errors).length > 0) {
    return { errors };
  }
  const payload: Record<string, unknown> = {
    kind: state.jobKind,
    reference_id: state.referenceId,
    seed: state.seed,
    config,
  };
  if (state.jobKind !== "baseline") {
    payload.target_id = state.targetId;
  }
  if (state.jobKind === "study") {
    payload.reference_predictions_id = state.referencePredictionsId;
    payload.target_predictions_id = state.targetPredictionsId;
  }
  if (state.jobKind !== "cdi") {
    payload.algorithms = state.selectedAlgorithms;
  }
  if (state.jobKind === "baseline" || state.jobKind === "study") {
    payload.n_batches = state.nBatches;
    payload.batch_size = state.batchSize;
  }
  return { payload, errors: {} };
}

/** Insert or refresh one job record, newest first. */
export function upsertJob(state: UiState, record: JobRecord): UiState {
  const rest = state.jobs.filter((job) => job.id !== record.id);
  return { ...state, jobs: [record, ...rest] };
}
