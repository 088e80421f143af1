/** Explorer state, fully reconstructible from URL query parameters.
 *
 * Every field with a non-default value appears in the query string;
 * defaults are omitted so shared URLs stay short.  Parsing ignores
 * unknown parameters and clamps out-of-range numbers back to defaults.
 */

export const POLICIES = ["time", "cost", "energy", "ce", "cet"] as const;
export type Policy = (typeof POLICIES)[number];

export interface ExplorerState {
  model: string;
  policy: Policy;
  requiredHz: number | null;
  maxCostUsd: number | null;
  maxEnergyKj: number | null;
  // What-if toggles: null means the acceleration is off.
  cachePeriod: number | null;
  staleSteps: number | null;
}

export const DEFAULT_STATE: ExplorerState = {
  model: "pi0",
  policy: "time",
  requiredHz: null,
  maxCostUsd: null,
  maxEnergyKj: null,
  cachePeriod: null,
  staleSteps: null,
};

function positiveOrNull(raw: string | null): number | null {
  if (raw === null) return null;
  const v = Number(raw);
  return Number.isFinite(v) && v > 0 ? v : null;
}

function positiveIntOrNull(raw: string | null): number | null {
  const v = positiveOrNull(raw);
  return v === null ? null : Math.floor(v);
}

function nonNegativeIntOrNull(raw: string | null): number | null {
  if (raw === null) return null;
  const v = Number(raw);
  return Number.isFinite(v) && v >= 0 ? Math.floor(v) : null;
}

export function stateToQuery(state: ExplorerState): string {
  const params = new URLSearchParams();
  if (state.model !== DEFAULT_STATE.model) params.set("model", state.model);
  if (state.policy !== DEFAULT_STATE.policy) params.set("policy", state.policy);
  if (state.requiredHz !== null) params.set("hz", String(state.requiredHz));
  if (state.maxCostUsd !== null) params.set("cost", String(state.maxCostUsd));
  if (state.maxEnergyKj !== null) params.set("energy", String(state.maxEnergyKj));
  if (state.cachePeriod !== null) params.set("s", String(state.cachePeriod));
  if (state.staleSteps !== null) params.set("stale", String(state.staleSteps));
  return params.toString();
}

export function stateFromQuery(query: string): ExplorerState {
  const params = new URLSearchParams(query);
  const rawPolicy = params.get("policy");
  const policy: Policy = (POLICIES as readonly string[]).includes(rawPolicy ?? "")
    ? (rawPolicy as Policy)
    : DEFAULT_STATE.policy;
  return {
    model: params.get("model") ?? DEFAULT_STATE.model,
    policy,
    requiredHz: positiveOrNull(params.get("hz")),
    maxCostUsd: positiveOrNull(params.get("cost")),
    maxEnergyKj: positiveOrNull(params.get("energy")),
    cachePeriod: positiveIntOrNull(params.get("s")),
    staleSteps: nonNegativeIntOrNull(params.get("stale")),
  };
}

export function statesEqual(a: ExplorerState, b: ExplorerState): boolean {
  return (
    a.model === b.model &&
    a.policy === b.policy &&
    a.requiredHz === b.requiredHz &&
    a.maxCostUsd === b.maxCostUsd &&
    a.maxEnergyKj === b.maxEnergyKj &&
    a.cachePeriod === b.cachePeriod &&
    a.staleSteps === b.staleSteps
  );
}
