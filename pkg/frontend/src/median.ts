/**
 * Median curves recomputed from raw per-run rows.
 *
 * Per config: form the union grid of every run's passes values; at each
 * grid point carry each run's last recorded value forward between its
 * own points; past the end of a diverged run substitute +Infinity; take
 * the sorted-middle median (mean of the two middles for even counts).
 * This mirrors the documented harness aggregation exactly, on purpose:
 * the plot layer aggregates from raw rows so it cannot drift out of
 * sync with pre-aggregated tables.
 */

import { SchemaError, TraceRow, YField, groupRuns } from "./traces";

export interface MedianCurve {
  passes: number[];
  medians: number[];
  /** true when at least one run of the config diverged */
  diverged: boolean;
}

function bisectRight(haystack: number[], needle: number): number {
  let lo = 0;
  let hi = haystack.length;
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (needle < haystack[mid]) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

function fieldValue(row: TraceRow, field: YField): number {
  const v = row[field];
  if (v === null) {
    throw new SchemaError(
      `column ${field} is empty for config ${row.config_id} run ${row.run_id}; ` +
        "this trace was recorded without a known minimizer"
    );
  }
  return v;
}

function median(column: number[]): number {
  const sorted = [...column].sort((a, b) => (a < b ? -1 : a > b ? 1 : 0));
  const m = sorted.length;
  if (m % 2 === 1) {
    return sorted[(m - 1) / 2];
  }
  return (sorted[m / 2 - 1] + sorted[m / 2]) / 2;
}

/** Medianized curve per config id, in sorted config order. */
export function medianCurves(rows: TraceRow[], field: YField): Map<string, MedianCurve> {
  const out = new Map<string, MedianCurve>();
  for (const [cfg, runs] of groupRuns(rows)) {
    const grid = [...new Set(runs.flatMap((run) => run.map((r) => r.passes)))].sort(
      (a, b) => a - b
    );
    const perRunPasses = runs.map((run) => run.map((r) => r.passes));
    const medians = grid.map((gpt) => {
      const column = runs.map((run, j) => {
        const passes = perRunPasses[j];
        let k = bisectRight(passes, gpt) - 1;
        if (k < 0) {
          k = 0;
        }
        if (run[run.length - 1].diverged && gpt > passes[passes.length - 1]) {
          return Infinity;
        }
        return fieldValue(run[k], field);
      });
      return median(column);
    });
    out.set(cfg, {
      passes: grid,
      medians,
      diverged: runs.some((run) => run[run.length - 1].diverged),
    });
  }
  return out;
}

/**
 * JSON-safe dump of the median table: numbers stay numbers, non-finite
 * values are spelled as the strings Infinity / -Infinity / NaN (plain
 * JSON has no encoding for them).
 */
export function dumpTable(
  curves: Map<string, MedianCurve>
): Record<string, { passes: number[]; medians: (number | string)[] }> {
  const out: Record<string, { passes: number[]; medians: (number | string)[] }> = {};
  for (const [cfg, curve] of curves) {
    out[cfg] = {
      passes: curve.passes,
      medians: curve.medians.map((v) =>
        Number.isFinite(v) ? v : v === Infinity ? "Infinity" : v === -Infinity ? "-Infinity" : "NaN"
      ),
    };
  }
  return out;
}
