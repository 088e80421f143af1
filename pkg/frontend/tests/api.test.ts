import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

const FIXTURES = join(__dirname, "fixtures");

function jsonResponse(body: string, status = 200): Response {
  return new Response(body, {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("rank", () => {
  it("keeps the raw response body byte-identical to what the server sent", async () => {
    const raw = readFileSync(join(FIXTURES, "rank_pi0_cet.json"), "utf-8");
    const fetchMock = vi.fn(async () => jsonResponse(raw));
    const api = new ApiClient("", fetchMock);
    const res = await api.rank("pi0", "cet");
    expect(res.rawBody).toBe(raw);
    expect(res.doc.entries.length).toBe(5);
  });

  it("posts the constraint through unchanged", async () => {
    const raw = readFileSync(join(FIXTURES, "rank_pi0_time_5hz.json"), "utf-8");
    const fetchMock = vi.fn(async () => jsonResponse(raw));
    const api = new ApiClient("http://host", fetchMock);
    await api.rank("pi0", "time", { required_hz: 5.0 });
    const [url, init] = fetchMock.mock.calls[0]!;
    expect(url).toBe("http://host/api/rank");
    expect(JSON.parse((init as RequestInit).body as string)).toEqual({
      model: "pi0",
      policy: "time",
      constraint: { required_hz: 5.0 },
    });
  });

  it("raises ApiError with the server's message on 404", async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse(JSON.stringify({ error: "no records for model 'ghost'" }), 404),
    );
    const api = new ApiClient("", fetchMock);
    await expect(api.rank("ghost", "time")).rejects.toMatchObject({
      status: 404,
      message: "no records for model 'ghost'",
    });
  });
});

describe("records", () => {
  it("parses the measurement rows", async () => {
    const raw = readFileSync(join(FIXTURES, "records_pi0.json"), "utf-8");
    const api = new ApiClient("", async () => jsonResponse(raw));
    const records = await api.records("pi0");
    expect(records).toHaveLength(5);
    expect(records.map((r) => r.model)).toEqual(Array(5).fill("pi0"));
  });

  it("encodes the model name in the query", async () => {
    const fetchMock = vi.fn(async () => jsonResponse("[]"));
    const api = new ApiClient("", fetchMock);
    await api.records("a model");
    expect(fetchMock.mock.calls[0]![0]).toBe("/api/records?model=a%20model");
  });
});

describe("error surfaces", () => {
  it("falls back to the status text for non-JSON error bodies", async () => {
    const api = new ApiClient("", async () =>
      new Response("boom", { status: 500, statusText: "Internal Server Error" }),
    );
    await expect(api.hardware()).rejects.toBeInstanceOf(ApiError);
  });
});
