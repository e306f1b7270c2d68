/**
 * Hand-written SVG rendering of median convergence curves: one labeled
 * curve per config, effective passes on x, the chosen field on y
 * (optionally log-scaled), and an explicit truncation annotation where
 * a config's curve stops because its runs diverged.
 */

import { MedianCurve } from "./median";

export interface RenderOptions {
  yField: string;
  logy: boolean;
  title?: string;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];
const MARGIN = { top: 42, right: 190, bottom: 52, left: 76 };

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&apos;");
}

function fmtTick(value: number, log: boolean): string {
  if (log) {
    const exp = Math.round(Math.log10(value));
    return `1e${exp}`;
  }
  if (value === 0) {
    return "0";
  }
  const abs = Math.abs(value);
  if (abs >= 1e4 || abs < 1e-3) {
    return value.toExponential(1);
  }
  return String(Number(value.toPrecision(3)));
}

interface Point {
  x: number;
  y: number;
}

export function renderSvg(curves: Map<string, MedianCurve>, opts: RenderOptions): string {
  const width = opts.width ?? 860;
  const height = opts.height ?? 520;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  // a point is plottable when its median is finite (and positive on a
  // log axis); diverged tails are represented by truncation, not points
  const plottable = new Map<string, Point[]>();
  for (const [cfg, curve] of curves) {
    const pts: Point[] = [];
    curve.passes.forEach((x, i) => {
      const y = curve.medians[i];
      if (Number.isFinite(y) && (!opts.logy || y > 0)) {
        pts.push({ x, y });
      }
    });
    plottable.set(cfg, pts);
  }
  const allPts = [...plottable.values()].flat();
  let xMin = Math.min(...allPts.map((p) => p.x), 0);
  let xMax = Math.max(...allPts.map((p) => p.x), 1);
  const yRaw = allPts.map((p) => (opts.logy ? Math.log10(p.y) : p.y));
  let yMin = Math.min(...yRaw);
  let yMax = Math.max(...yRaw);
  if (!Number.isFinite(yMin) || !Number.isFinite(yMax)) {
    yMin = 0;
    yMax = 1;
  }
  if (yMax - yMin < 1e-12) {
    yMin -= 0.5;
    yMax += 0.5;
  }
  if (xMax - xMin < 1e-12) {
    xMax = xMin + 1;
  }

  const sx = (x: number) => MARGIN.left + ((x - xMin) / (xMax - xMin)) * plotW;
  const sy = (y: number) => {
    const v = opts.logy ? Math.log10(y) : y;
    return MARGIN.top + plotH - ((v - yMin) / (yMax - yMin)) * plotH;
  };

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif" font-size="12">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (opts.title) {
    parts.push(
      `<text x="${MARGIN.left + plotW / 2}" y="24" text-anchor="middle" font-size="15">` +
        `${escapeXml(opts.title)}</text>`
    );
  }

  // axes
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="black"/>`
  );

  // x ticks: five evenly spaced
  for (let i = 0; i <= 4; i += 1) {
    const xv = xMin + ((xMax - xMin) * i) / 4;
    const px = sx(xv);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y0 + 5}" stroke="black"/>`,
      `<text x="${px.toFixed(2)}" y="${y0 + 18}" text-anchor="middle">${fmtTick(xv, false)}</text>`
    );
  }
  // y ticks: decade marks on a log axis, five marks otherwise
  const yTicks: number[] = [];
  if (opts.logy) {
    for (let e = Math.ceil(yMin); e <= Math.floor(yMax) + 1e-9; e += 1) {
      yTicks.push(10 ** e);
    }
    if (yTicks.length === 0) {
      yTicks.push(10 ** yMin, 10 ** yMax);
    }
  } else {
    for (let i = 0; i <= 4; i += 1) {
      yTicks.push(yMin + ((yMax - yMin) * i) / 4);
    }
  }
  for (const tick of yTicks) {
    const py = sy(opts.logy ? tick : tick);
    parts.push(
      `<line x1="${x0 - 5}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="black"/>`,
      `<text x="${x0 - 9}" y="${(py + 4).toFixed(2)}" text-anchor="end">${fmtTick(tick, opts.logy)}</text>`
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 12}" text-anchor="middle">effective passes</text>`,
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">` +
      `${escapeXml(opts.yField)}${opts.logy ? " (log scale)" : ""}</text>`
  );

  // curves and legend
  let idx = 0;
  const legendX = MARGIN.left + plotW + 14;
  for (const [cfg, curve] of curves) {
    const color = PALETTE[idx % PALETTE.length];
    const pts = plottable.get(cfg)!;
    const truncated = curve.diverged || curve.medians.some((v) => !Number.isFinite(v));
    parts.push(`<g data-config="${escapeXml(cfg)}">`);
    if (pts.length > 0) {
      const d = pts
        .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.x).toFixed(2)} ${sy(p.y).toFixed(2)}`)
        .join(" ");
      parts.push(
        `<path class="curve" d="${d}" fill="none" stroke="${color}" stroke-width="1.6"/>`
      );
    }
    if (truncated && pts.length > 0) {
      const last = pts[pts.length - 1];
      const px = sx(last.x).toFixed(2);
      parts.push(
        `<line class="truncation" x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${y0}" ` +
          `stroke="${color}" stroke-dasharray="4 3" stroke-width="1"/>`,
        `<text class="truncation-note" x="${px}" y="${MARGIN.top - 6}" text-anchor="middle" ` +
          `fill="${color}">diverged after ${fmtTick(last.x, false)} passes</text>`
      );
    }
    parts.push("</g>");
    const ly = MARGIN.top + 8 + idx * 20;
    parts.push(
      `<line x1="${legendX}" y1="${ly}" x2="${legendX + 22}" y2="${ly}" ` +
        `stroke="${color}" stroke-width="1.6"/>`,
      `<text class="legend" x="${legendX + 28}" y="${ly + 4}">` +
        `${escapeXml(cfg)}${truncated ? " (diverged)" : ""}</text>`
    );
    idx += 1;
  }
  parts.push("</svg>");
  return parts.join("\n");
}
