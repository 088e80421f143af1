import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import type { RecommendationDoc } from "../src/api.js";
import { buildTableView, tableToHtml } from "../src/table.js";

const FIXTURES = join(__dirname, "fixtures");

function loadRankFixture(name: string): { doc: RecommendationDoc; rawBody: string } {
  const rawBody = readFileSync(join(FIXTURES, name), "utf-8");
  return { doc: JSON.parse(rawBody) as RecommendationDoc, rawBody };
}

const ALL_POLICIES = ["time", "cost", "energy", "ce", "cet"] as const;

describe("ranked table fidelity", () => {
  it.each(ALL_POLICIES)("preserves the server order byte-for-byte (%s)", (policy) => {
    const { doc, rawBody } = loadRankFixture(`rank_pi0_${policy}.json`);
    const view = buildTableView(doc);

    // The ranked prefix of the view mirrors doc.entries exactly, in order.
    const ranked = view.rows.filter((r) => r.rank !== null);
    expect(ranked.map((r) => r.hardware)).toEqual(doc.entries.map((e) => e.hardware));
    ranked.forEach((row, i) => {
      const entry = doc.entries[i]!;
      expect(row.rank).toBe(entry.rank);
      expect(row.latencyMs).toBe(entry.latency_ms);
      expect(row.energyKj).toBe(entry.energy_kj);
      expect(row.costUsd).toBe(entry.cost_usd);
      expect(row.scorePct).toBe(entry.score_pct);
      expect(row.frequencyHz).toBe(entry.frequency_hz);
    });

    // Parsing the raw bytes again yields the same doc: rendering reads
    // straight from what the server sent, nothing added or reordered.
    expect(JSON.parse(rawBody)).toEqual(doc);
  });

  it("renders rows in document order in the HTML too", () => {
    const { doc } = loadRankFixture("rank_pi0_time.json");
    const html = tableToHtml(buildTableView(doc));
    const positions = doc.entries.map((e) => html.indexOf(`<td>${e.hardware}</td>`));
    expect(positions.every((p) => p >= 0)).toBe(true);
    expect([...positions].sort((a, b) => a - b)).toEqual(positions);
  });
});

describe("server-side exclusions", () => {
  it("shows 5 Hz exclusions greyed with their reason, after the ranked rows", () => {
    const { doc } = loadRankFixture("rank_pi0_time_5hz.json");
    const view = buildTableView(doc);
    const ranked = view.rows.filter((r) => !r.greyed);
    const greyed = view.rows.filter((r) => r.greyed);
    expect(ranked.map((r) => r.hardware)).toEqual(["rtx4090"]);
    expect(greyed).toHaveLength(4);
    expect(greyed.every((r) => r.reason === "frequency")).toBe(true);
    // Greyed rows come after all ranked rows, never interleaved.
    const firstGreyed = view.rows.findIndex((r) => r.greyed);
    expect(view.rows.slice(firstGreyed).every((r) => r.greyed)).toBe(true);
  });

  it("marks greyed rows in the HTML", () => {
    const { doc } = loadRankFixture("rank_pi0_time_5hz.json");
    const html = tableToHtml(buildTableView(doc));
    expect(html.match(/class="greyed"/g)).toHaveLength(4);
  });
});

describe("frequency slider preview", () => {
  it("greys exactly the rows whose 1000/latency is below 5 Hz", () => {
    const { doc } = loadRankFixture("rank_pi0_time.json");
    const view = buildTableView(doc, 5.0);
    const greyedNames = view.rows.filter((r) => r.greyed).map((r) => r.hardware);
    const expected = doc.entries
      .filter((e) => 1000.0 / e.latency_ms < 5.0)
      .map((e) => e.hardware);
    expect(greyedNames).toEqual(expected);
    // 4090 runs at 9.78 Hz and must stay live.
    expect(greyedNames).not.toContain("rtx4090");
    expect(greyedNames).toHaveLength(4);
  });

  it("greys nothing without a preview requirement", () => {
    const { doc } = loadRankFixture("rank_pi0_time.json");
    const view = buildTableView(doc, null);
    expect(view.rows.some((r) => r.greyed)).toBe(false);
  });

  it("boundary frequency stays live (>= passes)", () => {
    const { doc } = loadRankFixture("rank_pi0_time.json");
    const first = doc.entries[0]!;
    const view = buildTableView(doc, 1000.0 / first.latency_ms);
    expect(view.rows[0]!.greyed).toBe(false);
  });
});

describe("empty feasible set", () => {
  it("shows the banner", () => {
    const doc: RecommendationDoc = {
      model: "pi0",
      policy: "time",
      feasible: false,
      entries: [],
      excluded: [],
    };
    expect(tableToHtml(buildTableView(doc))).toContain("no feasible pair");
  });
});
