/** Typed client for the leaderboard HTTP service.
 *
 * The rank endpoint's raw response text is kept alongside the parsed
 * document so views can stay byte-faithful to what the server sent.
 */

export interface RankedEntryDoc {
  rank: number;
  hardware: string;
  sort_key: number;
  latency_ms: number;
  energy_kj: number;
  cost_usd: number;
  score_pct: number;
  frequency_hz: number;
}

export interface ExclusionDoc {
  hardware: string;
  reason: string;
  detail: string;
}

export interface RecommendationDoc {
  model: string;
  policy: string;
  feasible: boolean;
  entries: RankedEntryDoc[];
  excluded: ExclusionDoc[];
}

export interface RankResponse {
  doc: RecommendationDoc;
  rawBody: string;
}

export interface RecordDoc {
  model: string;
  hardware: string;
  latency_ms: number;
  energy_kj: number;
  cost_usd: number;
  score_pct: number;
  precision: string;
}

export interface SimulateResponse {
  mean_latency_ms: number;
  frequency_hz: number;
  breakdown_ms: Record<string, number>;
  utilization: Record<string, number>;
  speedup_vs_synchronous: number;
  overhead_ms_per_invocation: number;
}

export interface SpeedupResponse {
  speedup: number;
  stale_steps: number;
  total_steps: number;
  contention_preset: string | null;
}

export interface ConstraintBody {
  required_hz?: number | null;
  max_cost_usd?: number | null;
  max_energy_kj?: number | null;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function fail(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (typeof body.error === "string") detail = body.error;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  async hardware(): Promise<Array<Record<string, unknown>>> {
    const res = await this.fetchImpl(`${this.baseUrl}/api/hardware`);
    if (!res.ok) await fail(res);
    return res.json();
  }

  async models(): Promise<Array<Record<string, unknown>>> {
    const res = await this.fetchImpl(`${this.baseUrl}/api/models`);
    if (!res.ok) await fail(res);
    return res.json();
  }

  async records(model: string): Promise<RecordDoc[]> {
    const res = await this.fetchImpl(
      `${this.baseUrl}/api/records?model=${encodeURIComponent(model)}`,
    );
    if (!res.ok) await fail(res);
    return res.json();
  }

  async rank(
    model: string,
    policy: string,
    constraint: ConstraintBody = {},
    weights?: { cost: number; energy: number; time: number },
  ): Promise<RankResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/api/rank`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ model, policy, constraint, ...(weights ? { weights } : {}) }),
    });
    if (!res.ok) await fail(res);
    const rawBody = await res.text();
    return { doc: JSON.parse(rawBody) as RecommendationDoc, rawBody };
  }

  async simulate(body: {
    model: string;
    hardware: string;
    schedule?: {
      kind: string;
      cache_period?: number;
      segment_start?: number;
      segment_end?: number;
      stale_steps?: number;
    };
    n_cycles?: number;
  }): Promise<SimulateResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/api/simulate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) await fail(res);
    return res.json();
  }

  async speedup(body: {
    t_vlm_ms: number;
    t_ae_ms: number;
    stale_steps: number;
    total_steps: number;
    hardware?: string;
  }): Promise<SpeedupResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/api/speedup`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) await fail(res);
    return res.json();
  }
}
