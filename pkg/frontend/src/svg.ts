/** Minimal deterministic SVG line-chart emitter: linear or log-10 axes,
 * polyline series, an optional shaded band, tick labels and a legend.
 * No timestamps or randomness, so identical input yields identical bytes. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dashed?: boolean;
}

export interface Band {
  x: number[];
  yLow: number[];
  yHigh: number[];
  color: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  band?: Band;
  logY?: boolean;
}

const WIDTH = 760;
const HEIGHT = 520;
const MARGIN = { left: 72, right: 24, top: 40, bottom: 56 };

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f",
];

function fmt(v: number): string {
  // fixed 2-decimal pixel coordinates keep the output byte-stable
  return v.toFixed(2);
}

function fmtTick(v: number): string {
  if (v !== 0 && (Math.abs(v) < 1e-3 || Math.abs(v) >= 1e4)) {
    return v.toExponential(0).replace("e-", "e-").replace("e+", "e");
  }
  return Number(v.toPrecision(6)).toString();
}

function niceLinearTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => span / s <= count) ?? candidates[candidates.length - 1];
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); Math.pow(10, e) <= hi * (1 + 1e-9); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks.length > 0 ? ticks : [lo, hi];
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderChart(spec: ChartSpec): string {
  const allX: number[] = [];
  const allY: number[] = [];
  for (const s of spec.series) {
    allX.push(...s.x);
    allY.push(...s.y);
  }
  if (spec.band) {
    allX.push(...spec.band.x);
    allY.push(...spec.band.yLow, ...spec.band.yHigh);
  }
  if (allX.length === 0) throw new Error("chart has no data points");
  if (spec.logY && allY.some((v) => !(v > 0))) {
    throw new Error("log-scale chart requires strictly positive y values");
  }
  let xLo = Math.min(...allX);
  let xHi = Math.max(...allX);
  if (xLo === xHi) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  let yLo = Math.min(...allY);
  let yHi = Math.max(...allY);
  if (spec.logY) {
    if (yLo === yHi) {
      yLo /= 10;
      yHi *= 10;
    }
  } else {
    const pad = yLo === yHi ? Math.max(Math.abs(yLo), 1) * 0.1 : (yHi - yLo) * 0.05;
    yLo -= pad;
    yHi += pad;
  }

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => {
    const t = spec.logY
      ? (Math.log10(y) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))
      : (y - yLo) / (yHi - yLo);
    return MARGIN.top + (1 - t) * plotH;
  };

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
    `${escapeXml(spec.title)}</text>`,
  );

  const xTicks = niceLinearTicks(xLo, xHi);
  const yTicks = spec.logY ? decadeTicks(yLo, yHi) : niceLinearTicks(yLo, yHi);
  for (const t of xTicks) {
    const px = sx(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${MARGIN.top}" x2="${fmt(px)}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(px)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" ` +
      `font-size="11">${fmtTick(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const py = sy(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(py)}" x2="${MARGIN.left + plotW}" ` +
      `y2="${fmt(py)}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 6}" y="${fmt(py + 4)}" text-anchor="end" ` +
      `font-size="11">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
    `fill="none" stroke="#333333"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" ` +
    `font-size="13">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" ` +
    `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${escapeXml(spec.yLabel)}</text>`,
  );

  if (spec.band) {
    const fwd = spec.band.x.map((x, i) => `${fmt(sx(x))},${fmt(sy(spec.band!.yHigh[i]))}`);
    const back = spec.band.x
      .map((x, i) => `${fmt(sx(x))},${fmt(sy(spec.band!.yLow[i]))}`)
      .reverse();
    parts.push(
      `<polygon points="${fwd.concat(back).join(" ")}" fill="${spec.band.color}" ` +
      `fill-opacity="0.25" stroke="none"/>`,
    );
  }

  for (const s of spec.series) {
    const pts = s.x.map((x, i) => `${fmt(sx(x))},${fmt(sy(s.y[i]))}`).join(" ");
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="2"${dash}/>`,
    );
    for (let i = 0; i < s.x.length; i++) {
      parts.push(
        `<circle cx="${fmt(sx(s.x[i]))}" cy="${fmt(sy(s.y[i]))}" r="3" fill="${s.color}"/>`,
      );
    }
  }

  spec.series.forEach((s, i) => {
    const ly = MARGIN.top + 14 + i * 18;
    const lx = MARGIN.left + plotW - 170;
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" stroke="${s.color}" ` +
      `stroke-width="2"${dash}/>`,
    );
    parts.push(
      `<text x="${lx + 32}" y="${ly + 4}" font-size="12">${escapeXml(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
