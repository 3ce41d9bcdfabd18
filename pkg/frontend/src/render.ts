/** Pure HTML/SVG renderers for every view.

Each function maps API payloads (plus UI state) to a markup string and
performs no statistical computation: every number that ends up in a
text node is a `fmt` rendering of a field the server sent. Pixel
geometry inside SVG attributes is the only arithmetic here.
*/

import { algorithmsForKind } from "./catalog.js";
import { escapeHtml, fmt, fmtSigned, signClass } from "./format.js";
import { canRun, KIND_SLOTS, UiState } from "./state.js";
import type {
  AlgorithmInfo,
  BaselineResult,
  CdiReport,
  DatasetRecord,
  HistogramSummary,
  JobRecord,
  JobResult,
  ShiftReport,
  StudyReport,
} from "./types.js";

const CHART_WIDTH = 640;
const BAR_HEIGHT = 22;
const LABEL_WIDTH = 170;
const VALUE_WIDTH = 110;

function badge(alarm: boolean): string {
  return alarm
    ? '<span class="badge badge-alarm">alarm</span>'
    : '<span class="badge badge-ok">no alarm</span>';
}

/* ---------------------------------------------------------------- bars */

export interface BarItem {
  label: string;
  value: number;
  title?: string;
}

/**
 * Horizontal bar chart. Widths use a log scale when the spread of
 * positive values exceeds two decades (fold scores vary wildly), and a
 * dashed reference line marks `refLine` when given (the fold unit).
 */
export function barChart(items: BarItem[], refLine?: number): string {
  if (items.length === 0) {
    return '<p class="empty">nothing to chart</p>';
  }
  const plotWidth = CHART_WIDTH - LABEL_WIDTH - VALUE_WIDTH;
  const positives = items.map((i) => i.value).filter((v) => v > 0);
  if (refLine !== undefined) {
    positives.push(refLine);
  }
  const max = positives.length ? Math.max(...positives) : 1;
  const min = positives.length ? Math.min(...positives) : 1;
  const logScale = min > 0 && max / min > 100;
  const scale = (value: number): number => {
    if (value <= 0 || max <= 0) {
      return 0;
    }
    if (!logScale) {
      return (value / max) * plotWidth;
    }
    const lo = Math.log10(min) - 0.5;
    const hi = Math.log10(max);
    if (hi <= lo) {
      return plotWidth;
    }
    return ((Math.log10(value) - lo) / (hi - lo)) * plotWidth;
  };
  const height = items.length * (BAR_HEIGHT + 8) + 24;
  const rows = items.map((item, index) => {
    const y = index * (BAR_HEIGHT + 8) + 12;
    const width = Math.max(scale(item.value), item.value > 0 ? 2 : 0);
    const title = escapeHtml(item.title ?? `${item.label}: ${fmt(item.value)}`);
    return (
      `<g><title>${title}</title>` +
      `<text class="bar-label" x="${LABEL_WIDTH - 8}" y="${y + BAR_HEIGHT / 2}" text-anchor="end" dominant-baseline="middle">${escapeHtml(item.label)}</text>` +
      `<rect class="bar" x="${LABEL_WIDTH}" y="${y}" width="${width.toFixed(1)}" height="${BAR_HEIGHT}"></rect>` +
      `<text class="bar-value" x="${LABEL_WIDTH + width + 6}" y="${y + BAR_HEIGHT / 2}" dominant-baseline="middle">${fmt(item.value)}</text>` +
      `</g>`
    );
  });
  let reference = "";
  if (refLine !== undefined && refLine > 0) {
    const x = LABEL_WIDTH + scale(refLine);
    reference =
      `<line class="ref-line" x1="${x.toFixed(1)}" y1="4" x2="${x.toFixed(1)}" y2="${height - 18}"></line>` +
      `<text class="ref-label" x="${x.toFixed(1)}" y="${height - 4}" text-anchor="middle">${fmt(refLine)}</text>`;
  }
  return (
    `<svg class="bar-chart" viewBox="0 0 ${CHART_WIDTH} ${height}" role="img">` +
    rows.join("") +
    reference +
    `</svg>`
  );
}

/* ---------------------------------------------------------- histograms */

/**
 * Overlaid histograms, one translucent series per group, in the group
 * order of the response. Axis labels are the first and last bin edge
 * and the tallest count, all taken verbatim from the payload.
 */
export function renderHistogram(summary: HistogramSummary): string {
  const edges = summary.bin_edges;
  const groups = Object.entries(summary.counts_per_group);
  const bins = edges.length - 1;
  if (bins < 1 || groups.length === 0) {
    return '<p class="empty">no histogram data</p>';
  }
  const width = 640;
  const height = 240;
  const pad = { left: 56, right: 12, top: 10, bottom: 26 };
  const plotW = width - pad.left - pad.right;
  const plotH = height - pad.top - pad.bottom;
  const maxCount = Math.max(...groups.flatMap(([, counts]) => counts), 0);
  const barW = plotW / bins;
  const series = groups.map(([name, counts], gi) => {
    const rects = counts
      .map((count, bi) => {
        if (count <= 0 || maxCount <= 0) {
          return "";
        }
        const h = (count / maxCount) * plotH;
        const x = pad.left + bi * barW;
        const y = pad.top + plotH - h;
        return (
          `<rect class="series-${gi}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
          `width="${barW.toFixed(1)}" height="${h.toFixed(1)}">` +
          `<title>${escapeHtml(name)}: ${fmt(count)}</title></rect>`
        );
      })
      .join("");
    return `<g class="hist-group">${rects}</g>`;
  });
  const axis =
    `<text class="axis" x="${pad.left}" y="${height - 6}">${fmt(edges[0])}</text>` +
    `<text class="axis" x="${width - pad.right}" y="${height - 6}" text-anchor="end">${fmt(edges[edges.length - 1])}</text>` +
    `<text class="axis" x="${pad.left - 6}" y="${pad.top + 8}" text-anchor="end">${fmt(maxCount)}</text>` +
    `<text class="axis" x="${pad.left - 6}" y="${pad.top + plotH}" text-anchor="end">0</text>`;
  const legend = groups
    .map(
      ([name], gi) =>
        `<span class="legend-item"><span class="swatch series-${gi}"></span>${escapeHtml(name)}</span>`,
    )
    .join("");
  return (
    `<figure class="histogram">` +
    `<svg viewBox="0 0 ${width} ${height}" role="img">${series.join("")}${axis}</svg>` +
    `<figcaption>${escapeHtml(summary.selector)}${summary.normalized ? " (normalized)" : ""}</figcaption>` +
    `<div class="legend">${legend}</div>` +
    `</figure>`
  );
}

/* ------------------------------------------------------------- reports */

export type TestSort = "feature" | "corrected_p";

export function renderShiftReport(report: ShiftReport, sort: TestSort = "feature"): string {
  const { scores, tests, detectors, alarm, errors } = report.results;
  const haveFolds = scores.some((score) => score.fold_value !== null);
  const bars: BarItem[] = scores.map((score) => ({
    label: score.metric_name,
    value: haveFolds ? score.fold_value ?? 0 : score.raw_value,
    title: `${score.metric_name}: raw ${fmt(score.raw_value)}` +
      (score.fold_value !== null ? `, fold ${fmt(score.fold_value)}` : ""),
  }));
  const scoreSection = scores.length
    ? `<section class="panel"><h3>${haveFolds ? "fold scores" : "raw scores"}</h3>` +
      barChart(bars, haveFolds ? 1 : undefined) +
      renderScoreTable(report) +
      `</section>`
    : "";
  const testSections = tests
    .map((test) => {
      const ordered = [...test.per_feature];
      if (sort === "corrected_p") {
        ordered.sort((a, b) => a.corrected_p - b.corrected_p);
      }
      const rows = ordered
        .map(
          (f) =>
            `<tr><td>${escapeHtml(f.feature)}</td>` +
            `<td class="num">${fmt(f.statistic)}</td>` +
            `<td class="num">${fmt(f.p_value)}</td>` +
            `<td class="num">${fmt(f.corrected_p)}</td>` +
            `<td>${f.tie_flag ? "ties" : ""}</td></tr>`,
        )
        .join("");
      return (
        `<section class="panel"><h3>${escapeHtml(test.test_name)} ${badge(test.alarm)}</h3>` +
        `<p>min corrected p ${fmt(test.p_value)} at alpha ${fmt(test.alpha)}</p>` +
        `<table class="pvalue-table"><thead><tr>` +
        `<th data-sort="feature">feature</th><th class="num">statistic</th>` +
        `<th class="num">p</th><th class="num" data-sort="corrected_p">corrected p</th><th></th>` +
        `</tr></thead><tbody>${rows}</tbody></table></section>`
      );
    })
    .join("");
  const detectorRows = detectors
    .map((det) => {
      const detail = det.detail
        ? Object.entries(det.detail)
            .map(([key, value]) => `${escapeHtml(key)} ${fmt(value)}`)
            .join(", ")
        : "";
      return (
        `<tr><td>${escapeHtml(det.detector_name)}</td>` +
        `<td class="num">${fmt(det.score)}</td>` +
        `<td class="num">${fmt(det.n_train)}</td>` +
        `<td class="num">${fmt(det.n_test)}</td>` +
        `<td>${detail}</td></tr>`
      );
    })
    .join("");
  const detectorSection = detectors.length
    ? `<section class="panel"><h3>learned detectors</h3>` +
      `<table><thead><tr><th>detector</th><th class="num">score</th>` +
      `<th class="num">train</th><th class="num">test</th><th>detail</th></tr></thead>` +
      `<tbody>${detectorRows}</tbody></table></section>`
    : "";
  const errorEntries = Object.entries(errors);
  const errorSection = errorEntries.length
    ? `<section class="panel errors"><h3>failed algorithms</h3><ul>` +
      errorEntries
        .map(([name, message]) => `<li><b>${escapeHtml(name)}</b>: ${escapeHtml(message)}</li>`)
        .join("") +
      `</ul></section>`
    : "";
  return (
    `<div class="report report-shift"><header><h2>shift report ${badge(alarm)}</h2>` +
    `<p class="meta">seed ${fmt(report.seed)}, version ${escapeHtml(report.version)}</p></header>` +
    scoreSection +
    testSections +
    detectorSection +
    errorSection +
    `</div>`
  );
}

function renderScoreTable(report: ShiftReport): string {
  const rows = report.results.scores
    .map((score) => {
      const detail = score.detail
        ? Object.entries(score.detail)
            .map(([key, value]) => `${escapeHtml(key)} ${fmt(value)}`)
            .join(", ")
        : "";
      return (
        `<tr><td>${escapeHtml(score.metric_name)}</td>` +
        `<td class="num">${fmt(score.raw_value)}</td>` +
        `<td class="num">${score.fold_value === null ? "n/a" : fmt(score.fold_value)}</td>` +
        `<td>${detail}</td></tr>`
      );
    })
    .join("");
  return (
    `<table><thead><tr><th>metric</th><th class="num">raw</th>` +
    `<th class="num">fold</th><th>detail</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderCdiReport(report: CdiReport): string {
  const r = report.results;
  const row = (
    label: string,
    ref: number | null,
    target: number | null,
    delta: number | null,
  ) =>
    `<tr><td>${escapeHtml(label)}</td>` +
    `<td class="num">${fmt(ref)}</td><td class="num">${fmt(target)}</td>` +
    `<td class="num ${signClass(delta)}">${fmtSigned(delta)}</td></tr>`;
  return (
    `<div class="report report-cdi"><header><h2>confidence indices ${badge(r.alarm)}</h2>` +
    `<p class="meta">boundary ${fmt(report.config.boundary)}, ` +
    `alarm below ${fmt(report.config.alarm_threshold)}</p></header>` +
    `<section class="panel"><table class="cdi-panel">` +
    `<thead><tr><th></th><th class="num">reference</th><th class="num">target</th><th class="num">delta</th></tr></thead>` +
    `<tbody>` +
    row("CDI_M", r.cdi_m_ref, r.cdi_m_target, r.delta_cdi_m) +
    row("CDI_H", r.cdi_h_ref, r.cdi_h_target, r.delta_cdi_h) +
    row("AUC", r.auc_ref, r.auc_target, r.delta_auc) +
    `</tbody></table></section></div>`
  );
}

export function renderStudyReport(report: StudyReport): string {
  const { records, aggregates, reference, baseline, alarm } = report.results;
  const foldBars: BarItem[] = Object.entries(aggregates)
    .filter(([name]) => name.startsWith("fold_"))
    .map(([name, agg]) => ({
      label: name.slice("fold_".length),
      value: agg.mean,
      title: `${name}: mean ${fmt(agg.mean)}, std ${fmt(agg.std)}`,
    }));
  const deltaRows = Object.entries(aggregates)
    .filter(([name]) => name.startsWith("delta_"))
    .map(
      ([name, agg]) =>
        `<tr><td>${escapeHtml(name)}</td>` +
        `<td class="num ${signClass(agg.mean)}">${fmtSigned(agg.mean)}</td>` +
        `<td class="num">${fmt(agg.std)}</td></tr>`,
    )
    .join("");
  const foldNames = Object.keys(records[0]?.folds ?? {});
  const batchRows = records
    .map(
      (rec) =>
        `<tr><td class="num">${fmt(rec.batch_index)}</td>` +
        foldNames.map((name) => `<td class="num">${fmt(rec.folds[name])}</td>`).join("") +
        `<td class="num ${signClass(rec.delta_cdi_m)}">${fmtSigned(rec.delta_cdi_m)}</td>` +
        `<td class="num ${signClass(rec.delta_cdi_h)}">${fmtSigned(rec.delta_cdi_h)}</td>` +
        `<td class="num ${signClass(rec.delta_auc)}">${fmtSigned(rec.delta_auc)}</td></tr>`,
    )
    .join("");
  const referenceItems = Object.entries(reference)
    .map(([name, value]) => `<span>${escapeHtml(name)} ${fmt(value)}</span>`)
    .join(" ");
  return (
    `<div class="report report-study"><header><h2>batched study ${badge(alarm)}</h2>` +
    `<p class="meta">seed ${fmt(report.seed)}, reference: ${referenceItems}</p></header>` +
    `<section class="panel"><h3>mean fold scores</h3>${barChart(foldBars, 1)}</section>` +
    `<section class="panel"><h3>mean deltas</h3>` +
    `<table><thead><tr><th>column</th><th class="num">mean</th><th class="num">std</th></tr></thead>` +
    `<tbody>${deltaRows}</tbody></table></section>` +
    `<section class="panel"><h3>per batch</h3>` +
    `<table><thead><tr><th class="num">batch</th>` +
    foldNames.map((name) => `<th class="num">fold ${escapeHtml(name)}</th>`).join("") +
    `<th class="num">dCDI_M</th><th class="num">dCDI_H</th><th class="num">dAUC</th>` +
    `</tr></thead><tbody>${batchRows}</tbody></table></section>` +
    renderBaselinePanel(baseline) +
    `</div>`
  );
}

function renderBaselinePanel(baseline: BaselineResult | Omit<BaselineResult, "kind">): string {
  const rows = Object.entries(baseline.values)
    .map(
      ([name, value]) =>
        `<tr><td>${escapeHtml(name)}</td><td class="num">${fmt(value)}</td></tr>`,
    )
    .join("");
  return (
    `<section class="panel"><h3>baseline profile</h3>` +
    `<p class="meta">${fmt(baseline.n_batches)} batches of ${fmt(baseline.batch_size)}, ` +
    `seed ${fmt(baseline.seed)}, ${baseline.stratified ? "stratified" : "unstratified"}</p>` +
    `<table><thead><tr><th>metric</th><th class="num">mean self score</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></section>`
  );
}

export function renderBaselineResult(result: BaselineResult): string {
  return (
    `<div class="report report-baseline"><header><h2>baseline profile</h2></header>` +
    renderBaselinePanel(result) +
    `</div>`
  );
}

export function renderJobResult(result: JobResult, sort: TestSort = "feature"): string {
  switch (result.kind) {
    case "shift":
      return renderShiftReport(result, sort);
    case "cdi":
      return renderCdiReport(result);
    case "study":
      return renderStudyReport(result);
    case "baseline":
      return renderBaselineResult(result);
    default:
      return `<p class="error-box">unknown result kind</p>`;
  }
}

/* --------------------------------------------------------------- views */

export function renderErrorBox(message: string, detail?: unknown): string {
  let detailText = "";
  if (detail && typeof detail === "object") {
    detailText = ` <span class="error-detail">${escapeHtml(JSON.stringify(detail))}</span>`;
  }
  return `<div class="error-box">${escapeHtml(message)}${detailText}</div>`;
}

export function renderDatasetTable(datasets: DatasetRecord[]): string {
  if (datasets.length === 0) {
    return '<p class="empty">no datasets uploaded yet</p>';
  }
  const rows = datasets
    .map(
      (record) =>
        `<tr><td>${escapeHtml(record.name)}</td>` +
        `<td>${escapeHtml(record.kind)}</td>` +
        `<td class="num">${fmt(record.n)}</td>` +
        `<td class="num">${fmt(record.d)}</td>` +
        `<td>${record.has_labels ? "labels" : ""}</td>` +
        `<td><button class="danger" data-action="delete-dataset" data-id="${escapeHtml(record.id)}">delete</button></td></tr>`,
    )
    .join("");
  return (
    `<table class="dataset-table"><thead><tr>` +
    `<th>name</th><th>kind</th><th class="num">rows</th><th class="num">columns</th><th></th><th></th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderUploadView(state: UiState, error?: string): string {
  return (
    `<section class="view view-upload"><h2>datasets</h2>` +
    `<form id="upload-form" class="upload-form">` +
    `<div id="drop-zone" class="drop-zone">drop a CSV here or ` +
    `<label class="file-label">browse<input type="file" id="upload-file" accept=".csv,text/csv"></label></div>` +
    `<label>kind <select id="upload-kind">` +
    `<option value="features">features</option>` +
    `<option value="predictions">predictions</option>` +
    `</select></label>` +
    `<label>name <input type="text" id="upload-name" placeholder="defaults to file name"></label>` +
    `<button type="submit">upload</button>` +
    `</form>` +
    (error ?? "") +
    renderDatasetTable(state.datasets) +
    `</section>`
  );
}

function datasetOptions(datasets: DatasetRecord[], kind: string, selected: string | null): string {
  const options = datasets
    .filter((record) => record.kind === kind)
    .map(
      (record) =>
        `<option value="${escapeHtml(record.id)}"${record.id === selected ? " selected" : ""}>` +
        `${escapeHtml(record.name)} (${fmt(record.n)}x${fmt(record.d)})</option>`,
    )
    .join("");
  return `<option value=""${selected ? "" : " selected"}>choose</option>` + options;
}

export function renderAlgorithmCard(
  algo: AlgorithmInfo,
  selected: boolean,
  edits: Record<string, string>,
  errors: Record<string, string>,
): string {
  const params = algo.params
    .map((param) => {
      const raw = edits[param.name] ?? "";
      const error = errors[`${algo.id}.${param.name}`];
      const placeholder = param.default === null ? "null" : String(param.default);
      return (
        `<label class="param">` +
        `<span class="param-name" title="${escapeHtml(param.description)}">${escapeHtml(param.name)}</span>` +
        `<input type="text" data-algo="${escapeHtml(algo.id)}" data-param="${escapeHtml(param.name)}" ` +
        `value="${escapeHtml(raw)}" placeholder="${escapeHtml(placeholder)}">` +
        (error ? `<span class="param-error">${escapeHtml(error)}</span>` : "") +
        `</label>`
      );
    })
    .join("");
  return (
    `<div class="algo-card${selected ? " selected" : ""}">` +
    `<label class="algo-head"><input type="checkbox" data-action="toggle-algo" ` +
    `data-id="${escapeHtml(algo.id)}"${selected ? " checked" : ""}>` +
    `<b>${escapeHtml(algo.id)}</b> <span class="category">${escapeHtml(algo.category)}</span></label>` +
    `<p class="summary">${escapeHtml(algo.summary)}</p>` +
    (selected && params ? `<div class="params">${params}</div>` : "") +
    `</div>`
  );
}

export function renderJobList(jobs: JobRecord[]): string {
  if (jobs.length === 0) {
    return '<p class="empty">no jobs yet</p>';
  }
  const rows = jobs
    .map((job) => {
      const error = job.error
        ? `<div class="error-box">${escapeHtml(job.error)}</div>`
        : "";
      const resultButton =
        job.status === "done"
          ? `<button data-action="show-result" data-id="${escapeHtml(job.id)}">view result</button>`
          : "";
      return (
        `<li class="job status-${job.status}">` +
        `<span class="job-kind">${escapeHtml(job.kind)}</span>` +
        `<span class="job-id">${escapeHtml(job.id)}</span>` +
        `<span class="job-status">${escapeHtml(job.status)}</span>` +
        resultButton +
        error +
        `</li>`
      );
    })
    .join("");
  return `<ul class="job-list">${rows}</ul>`;
}

export function renderRunView(
  state: UiState,
  catalog: AlgorithmInfo[],
  draftErrors: Record<string, string> = {},
  resultHtml = "",
): string {
  const kinds: { kind: UiState["jobKind"]; label: string }[] = [
    { kind: "detect", label: "detect" },
    { kind: "baseline", label: "baseline" },
    { kind: "cdi", label: "confidence" },
    { kind: "study", label: "study" },
  ];
  const tabs = kinds
    .map(
      ({ kind, label }) =>
        `<button class="tab${state.jobKind === kind ? " active" : ""}" ` +
        `data-action="set-kind" data-kind="${kind}">${label}</button>`,
    )
    .join("");
  const slots = KIND_SLOTS[state.jobKind]
    .map(
      (slot) =>
        `<label class="slot">${escapeHtml(slot.label)} ` +
        `<select data-action="set-slot" data-field="${slot.field}">` +
        datasetOptions(state.datasets, slot.dataset, state[slot.field] as string | null) +
        `</select></label>`,
    )
    .join("");
  const algos = algorithmsForKind(catalog, state.jobKind);
  const cards = algos
    .map((algo) =>
      renderAlgorithmCard(
        algo,
        state.selectedAlgorithms.includes(algo.id),
        state.paramEdits[algo.id] ?? {},
        draftErrors,
      ),
    )
    .join("");
  const algoSection = algos.length
    ? `<div class="algo-grid">${cards}</div>`
    : `<p class="empty">this job always computes both confidence indices</p>`;
  const batchControls =
    state.jobKind === "baseline" || state.jobKind === "study"
      ? `<label>batches <input type="number" id="run-batches" value="${state.nBatches}" min="2"></label>` +
        `<label>batch size <input type="number" id="run-batch-size" value="${state.batchSize}" min="1"></label>`
      : "";
  const formError = draftErrors.form
    ? renderErrorBox(draftErrors.form)
    : "";
  return (
    `<section class="view view-run"><h2>run analysis</h2>` +
    `<nav class="tabs">${tabs}</nav>` +
    `<div class="slots">${slots}</div>` +
    algoSection +
    `<div class="run-controls">` +
    `<label>seed <input type="number" id="run-seed" value="${state.seed}"></label>` +
    batchControls +
    `<button id="run-button" data-action="run"${canRun(state, catalog) ? "" : " disabled"}>run</button>` +
    `</div>` +
    formError +
    `<h3>jobs</h3>` +
    renderJobList(state.jobs) +
    `<div id="job-result">${resultHtml}</div>` +
    `</section>`
  );
}

export function renderExploreView(
  state: UiState,
  selectors: string[],
  histogramHtml: string,
  error?: string,
): string {
  const { explore } = state;
  const selectorOptions = selectors
    .map(
      (name) =>
        `<option value="${escapeHtml(name)}"${name === explore.selector ? " selected" : ""}>` +
        `${escapeHtml(name)}</option>`,
    )
    .join("");
  const anyKind = (selected: string | null) =>
    `<option value=""${selected ? "" : " selected"}>choose</option>` +
    state.datasets
      .map(
        (record) =>
          `<option value="${escapeHtml(record.id)}"${record.id === selected ? " selected" : ""}>` +
          `${escapeHtml(record.name)} (${escapeHtml(record.kind)})</option>`,
      )
      .join("");
  return (
    `<section class="view view-explore"><h2>explore distributions</h2>` +
    `<div class="explore-controls">` +
    `<label>dataset <select id="explore-dataset">${anyKind(explore.datasetId)}</select></label>` +
    `<label>compare with <select id="explore-compare">` +
    `<option value=""${explore.compareId ? "" : " selected"}>none</option>` +
    state.datasets
      .map(
        (record) =>
          `<option value="${escapeHtml(record.id)}"${record.id === explore.compareId ? " selected" : ""}>` +
          `${escapeHtml(record.name)}</option>`,
      )
      .join("") +
    `</select></label>` +
    `<label>column <select id="explore-selector">${selectorOptions}</select></label>` +
    `<label>bins <input type="range" id="explore-bins" min="5" max="100" step="1" value="${explore.bins}">` +
    `<span id="bins-value">${explore.bins}</span></label>` +
    `<label><input type="checkbox" id="explore-normalized"${explore.normalized ? " checked" : ""}> normalized</label>` +
    `</div>` +
    (error ?? "") +
    `<div id="histogram-host">${histogramHtml}</div>` +
    `</section>`
  );
}
