/** What-if acceleration panel: projects the effect of step caching and
 * stale-step overlap through the simulation endpoints, per device, so
 * the projected control frequencies can feed the user's next
 * constraint adjustment.
 */

import type { ApiClient, SimulateResponse } from "./api.js";
import type { ExplorerState } from "./state.js";

export interface WhatIfProjection {
  hardware: string;
  baselineMs: number;
  projectedMs: number;
  projectedHz: number;
  speedup: number;
}

export function scheduleFromState(state: ExplorerState): {
  kind: string;
  cache_period?: number;
  segment_start?: number;
  segment_end?: number;
  stale_steps?: number;
} {
  const caching = state.cachePeriod !== null && state.cachePeriod > 1;
  const fusing = state.staleSteps !== null && state.staleSteps > 0;
  if (caching && fusing) {
    return {
      kind: "fused+cache",
      cache_period: state.cachePeriod!,
      segment_start: 2,
      segment_end: 8,
      stale_steps: state.staleSteps!,
    };
  }
  if (caching) {
    return {
      kind: "dpcache",
      cache_period: state.cachePeriod!,
      segment_start: 2,
      segment_end: 8,
    };
  }
  if (fusing) {
    return { kind: "fused", stale_steps: state.staleSteps! };
  }
  return { kind: "synchronous" };
}

export async function projectHardware(
  api: ApiClient,
  state: ExplorerState,
  hardware: string,
): Promise<WhatIfProjection> {
  const schedule = scheduleFromState(state);
  const requests: Array<Promise<SimulateResponse>> = [
    api.simulate({ model: state.model, hardware, schedule: { kind: "synchronous" } }),
  ];
  if (schedule.kind !== "synchronous") {
    requests.push(api.simulate({ model: state.model, hardware, schedule }));
  }
  const responses = await Promise.all(requests);
  const baseline = responses[0];
  if (baseline === undefined) throw new Error("missing baseline simulation");
  const projected = responses[1] ?? baseline;
  return {
    hardware,
    baselineMs: baseline.mean_latency_ms,
    projectedMs: projected.mean_latency_ms,
    projectedHz: projected.frequency_hz,
    speedup: baseline.mean_latency_ms / projected.mean_latency_ms,
  };
}

export async function predictedOverlapSpeedup(
  api: ApiClient,
  tVlmMs: number,
  tAeMs: number,
  staleSteps: number,
  totalSteps: number,
  hardware?: string,
): Promise<number> {
  const res = await api.speedup({
    t_vlm_ms: tVlmMs,
    t_ae_ms: tAeMs,
    stale_steps: staleSteps,
    total_steps: totalSteps,
    ...(hardware ? { hardware } : {}),
  });
  return res.speedup;
}

/** Valid slider ranges; the UI disables anything outside them. */
export function validSliderCombo(
  cachePeriod: number | null,
  staleSteps: number | null,
  totalSteps: number,
): boolean {
  if (cachePeriod !== null && cachePeriod < 1) return false;
  if (staleSteps !== null && (staleSteps < 0 || staleSteps > totalSteps)) return false;
  return true;
}
