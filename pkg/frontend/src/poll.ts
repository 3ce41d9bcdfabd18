/** Job status polling with a bounded backoff.

One fetch is in flight at a time; the next poll is scheduled only after
the previous response lands. The interval grows gently but never
exceeds MAX_INTERVAL_MS, and cancel() (called on view exit) stops the
loop immediately.
*/

import type { JobRecord } from "./types.js";

export const MAX_INTERVAL_MS = 2000;

export interface PollHandle {
  cancel(): void;
}

export interface PollTimers {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

const realTimers: PollTimers = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (handle) => clearTimeout(handle as Parameters<typeof clearTimeout>[0]),
};

export function pollJob(
  fetchRecord: (id: string) => Promise<JobRecord>,
  jobId: string,
  onUpdate: (record: JobRecord) => void,
  onError: (err: unknown) => void,
  timers: PollTimers = realTimers,
  initialMs = 400,
): PollHandle {
  let cancelled = false;
  let pending: unknown = null;
  let interval = Math.min(initialMs, MAX_INTERVAL_MS);

  const tick = async () => {
    pending = null;
    let record: JobRecord;
    try {
      record = await fetchRecord(jobId);
    } catch (err) {
      if (!cancelled) {
        onError(err);
      }
      return; // a failed poll ends the loop; the view decides what next
    }
    if (cancelled) {
      return;
    }
    onUpdate(record);
    if (record.status === "done" || record.status === "error") {
      return;
    }
    interval = Math.min(interval * 1.5, MAX_INTERVAL_MS);
    pending = timers.set(tick, interval);
  };

  pending = timers.set(tick, interval);
  return {
    cancel() {
      cancelled = true;
      if (pending !== null) {
        timers.clear(pending);
        pending = null;
      }
    },
  };
}
