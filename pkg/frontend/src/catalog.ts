/** Client-side view of the /api/algorithms catalog.

The parameter form is generated from the catalog entries, so a new
server-side algorithm shows up here with zero UI changes. Edits are
plain strings from text inputs; `validateParams` turns them into typed
values against the schema before anything is submitted.
*/

import type { AlgorithmInfo, AlgorithmParam, JobKind } from "./types.js";

/** Algorithm categories each job kind accepts. A cdi job always runs
 * both confidence indices, so it offers no algorithm choice. */
export const KIND_CATEGORIES: Record<JobKind, string[]> = {
  detect: ["distance", "statistic", "ml"],
  baseline: ["distance", "ml"],
  study: ["distance", "ml"],
  cdi: [],
};

export function algorithmsForKind(
  catalog: AlgorithmInfo[],
  kind: JobKind,
): AlgorithmInfo[] {
  const allowed = KIND_CATEGORIES[kind];
  return catalog.filter((algo) => allowed.includes(algo.category));
}

export interface ValidationOutcome {
  /** typed values for edited parameters, keyed by parameter name */
  values: Record<string, unknown>;
  /** human-readable problems, keyed by parameter name */
  errors: Record<string, string>;
}

function parseOne(param: AlgorithmParam, raw: string): { value?: unknown; error?: string } {
  const text = raw.trim();
  if (text === "") {
    return {}; // untouched, server default applies
  }
  if (param.nullable && (text === "null" || text === "none")) {
    return { value: null };
  }
  if (param.choices && param.choices.length > 0) {
    if (!param.choices.includes(text)) {
      return { error: `must be one of ${param.choices.join(", ")}` };
    }
    return { value: text };
  }
  if (param.type === "boolean") {
    if (text === "true") return { value: true };
    if (text === "false") return { value: false };
    return { error: "must be true or false" };
  }
  if (param.type === "integer") {
    if (!/^[+-]?\d+$/.test(text)) {
      return { error: "must be an integer" };
    }
    const value = Number(text);
    return checkRange(param, value);
  }
  if (param.type === "number") {
    const value = Number(text);
    if (!isFinite(value)) {
      return { error: "must be a number" };
    }
    return checkRange(param, value);
  }
  return { value: text };
}

function checkRange(param: AlgorithmParam, value: number): { value?: unknown; error?: string } {
  if (param.minimum !== undefined && param.minimum !== null && value < param.minimum) {
    return { error: `must be >= ${param.minimum}` };
  }
  if (param.maximum !== undefined && param.maximum !== null && value > param.maximum) {
    return { error: `must be <= ${param.maximum}` };
  }
  return { value };
}

/**
 * Validate raw text edits for one algorithm against its schema.
 * Unknown parameter names are rejected rather than passed through.
 */
export function validateParams(
  algo: AlgorithmInfo,
  edits: Record<string, string>,
): ValidationOutcome {
  const byName = new Map(algo.params.map((p) => [p.name, p]));
  const values: Record<string, unknown> = {};
  const errors: Record<string, string> = {};
  for (const [name, raw] of Object.entries(edits)) {
    const param = byName.get(name);
    if (!param) {
      errors[name] = `unknown parameter for ${algo.id}`;
      continue;
    }
    const { value, error } = parseOne(param, raw);
    if (error) {
      errors[name] = error;
    } else if (value !== undefined) {
      values[name] = value;
    }
  }
  return { values, errors };
}

/**
 * Merge validated edits for every selected algorithm into the flat
 * config object the job API expects. Any validation error anywhere
 * blocks submission.
 */
export function buildConfig(
  catalog: AlgorithmInfo[],
  selected: string[],
  editsByAlgo: Record<string, Record<string, string>>,
): { config: Record<string, unknown>; errors: Record<string, string> } {
  const config: Record<string, unknown> = {};
  const errors: Record<string, string> = {};
  for (const id of selected) {
    const algo = catalog.find((a) => a.id === id);
    if (!algo) {
      errors[id] = "not in the algorithm catalog";
      continue;
    }
    const outcome = validateParams(algo, editsByAlgo[id] ?? {});
    for (const [name, message] of Object.entries(outcome.errors)) {
      errors[`${id}.${name}`] = message;
    }
    Object.assign(config, outcome.values);
  }
  return { config, errors };
}
