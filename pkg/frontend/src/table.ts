/** Ranked-table view model.
 *
 * The table never re-sorts: ranked rows appear exactly in the order the
 * server returned them, and server-side exclusions follow greyed-out
 * with their reason.  Moving the frequency slider previews its effect
 * locally by greying rows whose achievable control frequency falls
 * short, before the re-queried ranking arrives.
 */

import type { RecommendationDoc } from "./api.js";

export interface TableRow {
  hardware: string;
  rank: number | null; // null for excluded rows
  latencyMs: number | null;
  frequencyHz: number | null;
  energyKj: number | null;
  costUsd: number | null;
  scorePct: number | null;
  greyed: boolean;
  reason: string | null;
}

export interface TableView {
  model: string;
  policy: string;
  feasible: boolean;
  rows: TableRow[];
}

export function buildTableView(
  doc: RecommendationDoc,
  previewRequiredHz: number | null = null,
): TableView {
  const rows: TableRow[] = doc.entries.map((e) => {
    const hz = 1000.0 / e.latency_ms;
    const belowPreview = previewRequiredHz !== null && hz < previewRequiredHz;
    return {
      hardware: e.hardware,
      rank: e.rank,
      latencyMs: e.latency_ms,
      frequencyHz: e.frequency_hz,
      energyKj: e.energy_kj,
      costUsd: e.cost_usd,
      scorePct: e.score_pct,
      greyed: belowPreview,
      reason: belowPreview ? "frequency" : null,
    };
  });
  for (const x of doc.excluded) {
    rows.push({
      hardware: x.hardware,
      rank: null,
      latencyMs: null,
      frequencyHz: null,
      energyKj: null,
      costUsd: null,
      scorePct: null,
      greyed: true,
      reason: x.reason,
    });
  }
  return { model: doc.model, policy: doc.policy, feasible: doc.feasible, rows };
}

function fmt(v: number | null, digits: number): string {
  return v === null ? "-" : v.toFixed(digits);
}

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tableToHtml(view: TableView): string {
  const head =
    "<tr><th>#</th><th>hardware</th><th>latency_ms</th><th>frequency_hz</th>" +
    "<th>energy_kj</th><th>cost_usd</th><th>score_pct</th></tr>";
  const body = view.rows
    .map((r) => {
      const cls = r.greyed ? ' class="greyed"' : "";
      const rank = r.rank === null ? "-" : String(r.rank);
      const name = r.reason
        ? `${escapeHtml(r.hardware)} <span class="reason">(${escapeHtml(r.reason)})</span>`
        : escapeHtml(r.hardware);
      return (
        `<tr${cls}><td>${rank}</td><td>${name}</td>` +
        `<td>${fmt(r.latencyMs, 1)}</td><td>${fmt(r.frequencyHz, 2)}</td>` +
        `<td>${fmt(r.energyKj, 3)}</td><td>${fmt(r.costUsd, 0)}</td>` +
        `<td>${fmt(r.scorePct, 1)}</td></tr>`
      );
    })
    .join("");
  const banner = view.feasible ? "" : '<p class="banner">no feasible pair</p>';
  return `${banner}<table>${head}${body}</table>`;
}
