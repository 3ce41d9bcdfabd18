/** Shapes of the JSON payloads the service sends and receives. */

export type DatasetKind = "features" | "predictions";
export type JobKind = "detect" | "baseline" | "cdi" | "study";
export type JobStatus = "pending" | "running" | "done" | "error";

export interface DatasetRecord {
  id: string;
  name: string;
  kind: DatasetKind;
  n: number;
  d: number;
  columns: string[];
  has_labels: boolean;
  uploaded_at: string;
}

export interface AlgorithmParam {
  name: string;
  type: string;
  default: unknown;
  description: string;
  minimum?: number;
  maximum?: number;
  nullable?: boolean;
  choices?: string[];
}

export interface AlgorithmInfo {
  id: string;
  category: string;
  summary: string;
  params: AlgorithmParam[];
}

export interface JobRequest {
  kind: JobKind;
  reference_id: string;
  target_id: string | null;
  reference_predictions_id: string | null;
  target_predictions_id: string | null;
  algorithms: string[] | null;
  config: Record<string, unknown>;
  seed: number;
  n_batches: number;
  batch_size: number;
}

export interface JobRecord {
  id: string;
  kind: JobKind;
  status: JobStatus;
  request: JobRequest;
  error: string | null;
  created_at: string;
  finished_at: string | null;
  result?: JobResult | null;
  has_result?: boolean;
}

export interface ShiftScore {
  metric_name: string;
  raw_value: number;
  fold_value: number | null;
  detail: Record<string, number> | null;
}

export interface FeatureTest {
  feature: string;
  statistic: number;
  p_value: number;
  corrected_p: number;
  tie_flag: boolean;
}

export interface TestResult {
  test_name: string;
  statistic: number;
  p_value: number;
  per_feature: FeatureTest[];
  alarm: boolean;
  alpha: number;
}

export interface DetectorResult {
  detector_name: string;
  score: number;
  n_train: number;
  n_test: number;
  seed: number;
  detail: Record<string, number> | null;
}

export interface BaselineResult {
  kind: "baseline";
  values: Record<string, number>;
  n_batches: number;
  batch_size: number;
  seed: number;
  stratified: boolean;
}

export interface ShiftReport {
  kind: "shift";
  version: string;
  seed: number;
  config: Record<string, unknown>;
  results: {
    scores: ShiftScore[];
    tests: TestResult[];
    detectors: DetectorResult[];
    alarm: boolean;
    baseline: BaselineResult | null;
    errors: Record<string, string>;
  };
}

export interface CdiReport {
  kind: "cdi";
  version: string;
  seed: number;
  config: { boundary: number; alarm_threshold: number };
  results: {
    cdi_m_ref: number;
    cdi_m_target: number;
    delta_cdi_m: number;
    cdi_h_ref: number;
    cdi_h_target: number;
    delta_cdi_h: number;
    auc_ref: number | null;
    auc_target: number | null;
    delta_auc: number | null;
    alarm: boolean;
  };
}

export interface BatchRecord {
  batch_index: number;
  folds: Record<string, number>;
  delta_cdi_m: number;
  delta_cdi_h: number;
  delta_auc: number | null;
}

export interface StudyReport {
  kind: "study";
  version: string;
  seed: number;
  config: Record<string, unknown>;
  results: {
    records: BatchRecord[];
    aggregates: Record<string, { mean: number; std: number }>;
    reference: Record<string, number | null>;
    baseline: BaselineResult;
    alarm: boolean;
  };
}

export type JobResult = ShiftReport | CdiReport | StudyReport | BaselineResult;

export interface HistogramSummary {
  kind: "histogram";
  selector: string;
  bin_edges: number[];
  counts_per_group: Record<string, number[]>;
  normalized: boolean;
}

export interface ErrorEnvelope {
  error: { code: string; message: string; detail: unknown };
}
