/** Shared test utilities: fixture loading and traceability checks.

The fixtures under test/fixtures/ are verbatim JSON responses recorded
from a live service instance. The traceability helpers strip markup
from rendered views and verify that every numeric token on screen is a
formatting of some number present in the fixture, which is the "the UI
computes nothing" guarantee stated in the renderer docs.
*/

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { fmt, fmtSigned } from "../src/format.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  const raw = readFileSync(join(here, "fixtures", `${name}.json`), "utf-8");
  return JSON.parse(raw) as T;
}

/** Text a user would see: tags dropped, entities unescaped. */
export function visibleText(html: string): string {
  return html
    .replace(/<[^>]*>/g, " ")
    .replace(/&amp;/g, "&")
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"')
    .replace(/&#39;/g, "'");
}

/**
 * Standalone numeric tokens in visible text. Digits embedded in words
 * (feature names like f2, ids, versions) are not numbers on screen.
 */
export function numericTokens(text: string): string[] {
  const pattern = /(?<![\w.+-])[-+]?\d+(?:\.\d+)?(?:e[-+]?\d+)?(?![\w]|\.\d)/gi;
  return text.match(pattern) ?? [];
}

function collectNumbers(value: unknown, into: number[]): void {
  if (typeof value === "number") {
    into.push(value);
  } else if (Array.isArray(value)) {
    for (const item of value) {
      collectNumbers(item, into);
    }
  } else if (value && typeof value === "object") {
    for (const item of Object.values(value)) {
      collectNumbers(item, into);
    }
  }
}

/**
 * Every rendering this UI is allowed to print for the numbers inside
 * `payload`, plus the fixed chart constants "0" (count axis origin)
 * and "1" (the fold reference line).
 */
export function allowedNumberStrings(payload: unknown): Set<string> {
  const numbers: number[] = [];
  collectNumbers(payload, numbers);
  const allowed = new Set<string>(["0", "1"]);
  for (const value of numbers) {
    allowed.add(fmt(value));
    allowed.add(fmtSigned(value));
    allowed.add(String(value));
  }
  return allowed;
}

/** Assert-style helper returning the offending tokens, if any. */
export function untraceableNumbers(html: string, payload: unknown): string[] {
  const allowed = allowedNumberStrings(payload);
  return numericTokens(visibleText(html)).filter((token) => !allowed.has(token));
}
