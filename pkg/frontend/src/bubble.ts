/** Cost/energy/time bubble-chart view model.
 *
 * One bubble per feasible pair: x is task energy, y is min-max
 * normalized latency (a singleton normalizes to 0), and the radius
 * scales with the square root of unit cost so bubble area tracks
 * price.  Raw values ride along for hover text.
 */

import type { RecordDoc } from "./api.js";

export interface Bubble {
  hardware: string;
  x: number; // energy_kj
  y: number; // latency, min-max normalized over the plotted set
  r: number; // radius in px
  latencyMs: number;
  energyKj: number;
  costUsd: number;
}

export const MIN_RADIUS = 6;
export const MAX_RADIUS = 30;

export function buildBubbles(records: RecordDoc[]): Bubble[] {
  if (records.length === 0) return [];
  const lats = records.map((r) => r.latency_ms);
  const costs = records.map((r) => r.cost_usd);
  const latMin = Math.min(...lats);
  const latSpan = Math.max(...lats) - latMin;
  const costMax = Math.max(...costs);
  return records.map((rec) => {
    const y = latSpan > 0 ? (rec.latency_ms - latMin) / latSpan : 0;
    const r =
      MIN_RADIUS +
      (MAX_RADIUS - MIN_RADIUS) * Math.sqrt(costMax > 0 ? rec.cost_usd / costMax : 0);
    return {
      hardware: rec.hardware,
      x: rec.energy_kj,
      y,
      r,
      latencyMs: rec.latency_ms,
      energyKj: rec.energy_kj,
      costUsd: rec.cost_usd,
    };
  });
}

/** Re-plot with projected latencies from a what-if simulation. */
export function applyProjectedLatencies(
  records: RecordDoc[],
  projectedMsByHardware: Map<string, number>,
): RecordDoc[] {
  return records.map((r) => {
    const projected = projectedMsByHardware.get(r.hardware);
    return projected === undefined ? r : { ...r, latency_ms: projected };
  });
}

export function bubblesToSvg(bubbles: Bubble[], width = 640, height = 400): string {
  if (bubbles.length === 0) return `<svg width="${width}" height="${height}"></svg>`;
  const pad = 40;
  const xMax = Math.max(...bubbles.map((b) => b.x)) || 1;
  const circles = bubbles
    .map((b) => {
      const cx = pad + (b.x / xMax) * (width - 2 * pad);
      const cy = height - pad - b.y * (height - 2 * pad);
      const title =
        `${b.hardware}: ${b.latencyMs.toFixed(1)} ms, ` +
        `${b.energyKj.toFixed(3)} kJ, $${b.costUsd.toFixed(0)}`;
      return (
        `<circle cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="${b.r.toFixed(1)}">` +
        `<title>${title}</title></circle>`
      );
    })
    .join("");
  return `<svg width="${width}" height="${height}" role="img">${circles}</svg>`;
}
