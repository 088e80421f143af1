/** Single-page wiring: state lives in the URL, views re-render on any
 * change, and stale responses are dropped (last-write-wins).
 */

import { ApiClient, ApiError } from "./api.js";
import { buildBubbles, bubblesToSvg, applyProjectedLatencies } from "./bubble.js";
import {
  DEFAULT_STATE,
  ExplorerState,
  POLICIES,
  stateFromQuery,
  stateToQuery,
} from "./state.js";
import { buildTableView, tableToHtml } from "./table.js";
import { projectHardware, scheduleFromState } from "./whatif.js";

export class Explorer {
  private state: ExplorerState;
  private generation = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly root: {
      table: HTMLElement;
      chart: HTMLElement;
      whatif: HTMLElement;
      error: HTMLElement;
    },
  ) {
    this.state = stateFromQuery(window.location.search);
  }

  getState(): ExplorerState {
    return { ...this.state };
  }

  setState(patch: Partial<ExplorerState>): void {
    this.state = { ...this.state, ...patch };
    const query = stateToQuery(this.state);
    history.replaceState(null, "", query ? `?${query}` : window.location.pathname);
    void this.render();
  }

  async render(): Promise<void> {
    const gen = ++this.generation;
    const s = this.state;
    try {
      const [rank, records] = await Promise.all([
        this.api.rank(s.model, s.policy, {
          required_hz: s.requiredHz,
          max_cost_usd: s.maxCostUsd,
          max_energy_kj: s.maxEnergyKj,
        }),
        this.api.records(s.model),
      ]);
      if (gen !== this.generation) return; // superseded; drop this response

      this.root.error.textContent = "";
      this.root.table.innerHTML = tableToHtml(buildTableView(rank.doc, s.requiredHz));

      let plotted = records;
      if (scheduleFromState(s).kind !== "synchronous") {
        const projections = await Promise.all(
          records.map((r) => projectHardware(this.api, s, r.hardware)),
        );
        if (gen !== this.generation) return;
        const byHardware = new Map(projections.map((p) => [p.hardware, p.projectedMs]));
        plotted = applyProjectedLatencies(records, byHardware);
        this.root.whatif.innerHTML = projections
          .map(
            (p) =>
              `<li>${p.hardware}: ${p.projectedMs.toFixed(1)} ms ` +
              `(${p.projectedHz.toFixed(2)} Hz, ${p.speedup.toFixed(2)}x)</li>`,
          )
          .join("");
      } else {
        this.root.whatif.innerHTML = "";
      }
      this.root.chart.innerHTML = bubblesToSvg(buildBubbles(plotted));
    } catch (err) {
      if (gen !== this.generation) return;
      // Show the failure inline; the previously rendered views stay up.
      this.root.error.textContent =
        err instanceof ApiError ? `API error ${err.status}: ${err.message}` : String(err);
    }
  }
}

export function mount(): Explorer {
  const api = new ApiClient("");
  const byId = (id: string): HTMLElement => {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing #${id}`);
    return el;
  };
  const explorer = new Explorer(api, {
    table: byId("table"),
    chart: byId("chart"),
    whatif: byId("whatif"),
    error: byId("error"),
  });

  const policySelect = byId("policy") as HTMLSelectElement;
  for (const p of POLICIES) {
    const opt = document.createElement("option");
    opt.value = p;
    opt.textContent = p;
    policySelect.appendChild(opt);
  }
  policySelect.value = explorer.getState().policy;
  policySelect.addEventListener("change", () =>
    explorer.setState({ policy: policySelect.value as ExplorerState["policy"] }),
  );

  const hzInput = byId("hz") as HTMLInputElement;
  hzInput.value = String(explorer.getState().requiredHz ?? "");
  hzInput.addEventListener("change", () => {
    const v = Number(hzInput.value);
    explorer.setState({ requiredHz: Number.isFinite(v) && v > 0 ? v : null });
  });

  const cacheInput = byId("cache-s") as HTMLInputElement;
  cacheInput.addEventListener("change", () => {
    const v = Number(cacheInput.value);
    explorer.setState({ cachePeriod: Number.isFinite(v) && v >= 1 ? Math.floor(v) : null });
  });

  const staleInput = byId("stale") as HTMLInputElement;
  staleInput.addEventListener("change", () => {
    const v = Number(staleInput.value);
    explorer.setState({ staleSteps: Number.isFinite(v) && v >= 0 ? Math.floor(v) : null });
  });

  const resetButton = byId("reset") as HTMLButtonElement;
  resetButton.addEventListener("click", () => explorer.setState({ ...DEFAULT_STATE }));

  void explorer.render();
  return explorer;
}
