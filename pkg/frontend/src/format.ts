/** Number and text formatting shared by every view.

All views format values through `fmt` so that anything numeric on
screen is a recognizable rendering of a field the API sent; the tests
rely on that to prove the UI never computes statistics of its own.
*/

export function fmt(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "n/a";
  }
  if (!isFinite(value)) {
    return String(value);
  }
  if (Number.isInteger(value) && Math.abs(value) < 1e15) {
    return String(value);
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1e6 || (magnitude > 0 && magnitude < 1e-4)) {
    return value.toExponential(3);
  }
  // up to six significant digits, trailing zeros dropped
  return String(Number(value.toPrecision(6)));
}

/** Signed variant for deltas: explicit plus sign on positives. */
export function fmtSigned(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "n/a";
  }
  const text = fmt(value);
  return value > 0 ? `+${text}` : text;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** CSS class for a delta value: negative is the warning direction. */
export function signClass(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "delta-none";
  }
  if (value < 0) {
    return "delta-neg";
  }
  return value > 0 ? "delta-pos" : "delta-zero";
}
