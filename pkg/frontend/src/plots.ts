/** Figure builders for the three harness CSV schemas. */

import {
  ConvergenceRow,
  LambdaRow,
  SchemaError,
  SweepRow,
  parseConvergence,
  parseLambda,
  parseSweep,
} from "./csv";
import { awgnReferenceBer } from "./qfunc";
import { Band, PALETTE, Series, renderChart } from "./svg";

function groupBy<T>(rows: T[], key: (r: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const r of rows) {
    const k = key(r);
    const bucket = out.get(k);
    if (bucket) bucket.push(r);
    else out.set(k, [r]);
  }
  return out;
}

/** Log-scale BER vs Eb/N0 per detector plus the analytic single-antenna
 * AWGN reference Q(sqrt(2 Eb/N0)); zero-error points are clipped to the
 * measurement floor 1/total_bits. */
export function plotBerSweep(csvText: string): string {
  const rows: SweepRow[] = parseSweep(csvText);
  const byDetector = groupBy(rows, (r) => r.detector);
  if (byDetector.size === 0) {
    throw new SchemaError("sweep CSV contains no detector rows");
  }
  const series: Series[] = [];
  let idx = 0;
  for (const [det, dRows] of byDetector) {
    const sorted = [...dRows].sort((a, b) => a.ebn0Db - b.ebn0Db);
    series.push({
      label: det,
      x: sorted.map((r) => r.ebn0Db),
      y: sorted.map((r) => Math.max(r.ber, 1 / Math.max(r.totalBits, 1))),
      color: PALETTE[idx % PALETTE.length],
    });
    idx += 1;
  }
  const xs = rows.map((r) => r.ebn0Db);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const floor = Math.min(...rows.map((r) => 1 / Math.max(r.totalBits, 1)));
  const refX: number[] = [];
  const refY: number[] = [];
  const steps = 60;
  for (let i = 0; i <= steps; i++) {
    const x = xLo + ((xHi - xLo) * i) / steps;
    refX.push(x);
    refY.push(Math.max(awgnReferenceBer(x), floor));
  }
  series.push({
    label: "SISO AWGN bound",
    x: refX,
    y: refY,
    color: "#000000",
    dashed: true,
  });
  return renderChart({
    title: "Uncoded BER vs Eb/N0",
    xLabel: "Eb/N0 (dB)",
    yLabel: "BER",
    series,
    logY: true,
  });
}

/** Log-scale BER vs iteration count, one series per detector. */
export function plotConvergence(csvText: string): string {
  const rows: ConvergenceRow[] = parseConvergence(csvText);
  const byDetector = groupBy(rows, (r) => `${r.detector} @ ${r.ebn0Db} dB`);
  if (byDetector.size === 0) {
    throw new SchemaError("convergence CSV contains no rows");
  }
  const positives = rows.map((r) => r.ber).filter((b) => b > 0);
  const floor = positives.length > 0 ? Math.min(...positives) / 10 : 1e-6;
  const series: Series[] = [];
  let idx = 0;
  for (const [label, dRows] of byDetector) {
    const sorted = [...dRows].sort((a, b) => a.iteration - b.iteration);
    series.push({
      label,
      x: sorted.map((r) => r.iteration),
      y: sorted.map((r) => Math.max(r.ber, floor)),
      color: PALETTE[idx % PALETTE.length],
    });
    idx += 1;
  }
  return renderChart({
    title: "BER vs iteration",
    xLabel: "iteration k",
    yLabel: "BER",
    series,
    logY: true,
  });
}

/** Per-iteration mean of the regularization weight across trials, with a
 * min-max shadow band over the individual trials. */
export function plotLambdaTrace(csvText: string): string {
  const rows: LambdaRow[] = parseLambda(csvText);
  if (rows.length === 0) {
    throw new SchemaError("lambda CSV contains no rows");
  }
  const byIter = groupBy(rows, (r) => String(r.iteration));
  const iters = [...byIter.keys()].map(Number).sort((a, b) => a - b);
  const mean: number[] = [];
  const lo: number[] = [];
  const hi: number[] = [];
  for (const k of iters) {
    const vals = byIter.get(String(k))!.map((r) => r.lambda);
    mean.push(vals.reduce((a, b) => a + b, 0) / vals.length);
    lo.push(Math.min(...vals));
    hi.push(Math.max(...vals));
  }
  const band: Band = { x: iters, yLow: lo, yHigh: hi, color: "#888888" };
  const series: Series[] = [
    { label: "mean over trials", x: iters, y: mean, color: PALETTE[0] },
  ];
  return renderChart({
    title: "Regularization weight trace",
    xLabel: "iteration k",
    yLabel: "lambda",
    series,
    band,
  });
}
