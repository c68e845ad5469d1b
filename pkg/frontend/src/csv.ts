/** Strict readers for the three harness CSV schemas. The header row must
 * match the producing tool verbatim; anything else is rejected. */

export const SWEEP_HEADER = [
  "detector", "channel", "nt", "nr", "ebn0_db", "trials",
  "bit_errors", "total_bits", "ber", "avg_iterations", "converged_fraction",
] as const;

export const CONVERGENCE_HEADER = ["detector", "ebn0_db", "iteration", "ber"] as const;

export const LAMBDA_HEADER = ["trial", "iteration", "lambda"] as const;

export interface SweepRow {
  detector: string;
  channel: string;
  nt: number;
  nr: number;
  ebn0Db: number;
  trials: number;
  bitErrors: number;
  totalBits: number;
  ber: number;
  avgIterations: number;
  convergedFraction: number;
}

export interface ConvergenceRow {
  detector: string;
  ebn0Db: number;
  iteration: number;
  ber: number;
}

export interface LambdaRow {
  trial: number;
  iteration: number;
  lambda: number;
}

export class SchemaError extends Error {}

function splitLines(text: string): string[][] {
  // harness output is plain comma-separated with no quoting or embedded commas
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

function checkHeader(actual: string[], expected: readonly string[], kind: string): void {
  if (actual.length !== expected.length || actual.some((c, i) => c !== expected[i])) {
    throw new SchemaError(
      `${kind} CSV header mismatch: expected "${expected.join(",")}", got "${actual.join(",")}"`,
    );
  }
}

function num(field: string, row: string[], idx: number, kind: string): number {
  const v = Number(row[idx]);
  if (!Number.isFinite(v)) {
    throw new SchemaError(`${kind} CSV: non-numeric value "${row[idx]}" in column ${field}`);
  }
  return v;
}

export function parseSweep(text: string): SweepRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new SchemaError("sweep CSV is empty");
  checkHeader(lines[0], SWEEP_HEADER, "sweep");
  return lines.slice(1).map((r) => {
    if (r.length !== SWEEP_HEADER.length) {
      throw new SchemaError(`sweep CSV: row has ${r.length} fields, expected ${SWEEP_HEADER.length}`);
    }
    return {
      detector: r[0],
      channel: r[1],
      nt: num("nt", r, 2, "sweep"),
      nr: num("nr", r, 3, "sweep"),
      ebn0Db: num("ebn0_db", r, 4, "sweep"),
      trials: num("trials", r, 5, "sweep"),
      bitErrors: num("bit_errors", r, 6, "sweep"),
      totalBits: num("total_bits", r, 7, "sweep"),
      ber: num("ber", r, 8, "sweep"),
      avgIterations: num("avg_iterations", r, 9, "sweep"),
      convergedFraction: num("converged_fraction", r, 10, "sweep"),
    };
  });
}

export function parseConvergence(text: string): ConvergenceRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new SchemaError("convergence CSV is empty");
  checkHeader(lines[0], CONVERGENCE_HEADER, "convergence");
  return lines.slice(1).map((r) => {
    if (r.length !== CONVERGENCE_HEADER.length) {
      throw new SchemaError(`convergence CSV: row has ${r.length} fields, expected ${CONVERGENCE_HEADER.length}`);
    }
    return {
      detector: r[0],
      ebn0Db: num("ebn0_db", r, 1, "convergence"),
      iteration: num("iteration", r, 2, "convergence"),
      ber: num("ber", r, 3, "convergence"),
    };
  });
}

export function parseLambda(text: string): LambdaRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new SchemaError("lambda CSV is empty");
  checkHeader(lines[0], LAMBDA_HEADER, "lambda");
  return lines.slice(1).map((r) => {
    if (r.length !== LAMBDA_HEADER.length) {
      throw new SchemaError(`lambda CSV: row has ${r.length} fields, expected ${LAMBDA_HEADER.length}`);
    }
    return {
      trial: num("trial", r, 0, "lambda"),
      iteration: num("iteration", r, 1, "lambda"),
      lambda: num("lambda", r, 2, "lambda"),
    };
  });
}
