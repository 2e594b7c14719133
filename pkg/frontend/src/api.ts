/** Typed client for the planning service. The UI never computes equilibria
 * itself; everything numeric comes back from these endpoints. */

export interface ModificationJson {
  kind: "set_capacity" | "set_fftt" | "close_road" | "build_road";
  road?: number;
  capacity?: number | null;
  fftt?: number | null;
  from_node?: number;
  to_node?: number;
  two_way?: boolean;
  road_kind?: "surface" | "tunnel";
}

export interface StateSummary {
  id: number;
  parent: number | null;
  children: number[];
  modification: ModificationJson | null;
  modification_icon: string | null;
  metric_veh_min: number;
  delta_vs_initial_ratio: number;
  delta_vs_parent_ratio: number;
  delta_vs_parent_applicable: boolean;
  step_cost_currency: number;
  cumulative_cost_currency: number;
  converged: boolean;
  iterations: number;
  final_rel_gap_ratio: number;
}

export interface RoadDetail {
  road_id: number;
  from_node: number;
  to_node: number;
  capacity_veh_per_hr: number;
  fftt_min: number;
  length_km: number | null;
  kind: "surface" | "tunnel";
  volume_veh_per_hr: number;
  time_min: number;
}

export interface NodeDetail {
  node_id: number;
  lon_deg: number;
  lat_deg: number;
}

export interface StateDetail extends StateSummary {
  nodes: NodeDetail[];
  roads: RoadDetail[];
}

export interface TreeResponse {
  root_id: number;
  nodes: StateSummary[];
}

export interface IndicatorRow {
  road_id: number;
  avg_flow_veh_per_hr: number;
  avg_flow_cap_ratio: number;
  avg_time_min: number;
  avg_fftt_time_ratio: number;
  scope_flow_veh_per_hr: number;
  scope_flow_cap_ratio: number;
  scope_time_min: number;
  scope_fftt_time_ratio: number;
  states_present: number;
}

export interface HistogramBin {
  lo: number;
  hi: number;
  count: number;
}

export interface CellPayload {
  road_id: number;
  state_id: number;
  capacity_veh_per_hr: number;
  volume_veh_per_hr: number;
  fftt_min: number;
  time_min: number;
  delta_time_vs_initial_min: number | null;
  is_new: boolean;
}

export interface IndicatorsResponse {
  indicators: IndicatorRow[];
  histograms: Record<string, HistogramBin[]>;
  ordered_road_ids: number[];
  cells: CellPayload[];
}

export interface OdFlow {
  node_id: number;
  originating_veh: number;
  terminating_veh: number;
}

export interface ModificationOutcome {
  status: number;
  state?: StateSummary;
  pollToken?: string;
  partial?: boolean;
  detail?: string;
}

export type IndicatorName =
  | "avg_flow" | "avg_flow_cap_ratio" | "avg_time" | "avg_fftt_time_ratio"
  | "scope_flow" | "scope_flow_cap_ratio" | "scope_time" | "scope_fftt_time_ratio";

export const INDICATOR_NAMES: IndicatorName[] = [
  "avg_flow", "avg_flow_cap_ratio", "avg_time", "avg_fftt_time_ratio",
  "scope_flow", "scope_flow_cap_ratio", "scope_time", "scope_fftt_time_ratio",
];

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      detail = ((await resp.json()) as { detail?: string }).detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return expectJson<T>(resp);
  }

  async listSessions(): Promise<string[]> {
    const resp = await fetch(this.url("/sessions"));
    return (await expectJson<{ session_ids: string[] }>(resp)).session_ids;
  }

  async createSession(body: Record<string, unknown>): Promise<{ session_id: string; root: StateSummary }> {
    return this.post("/sessions", body);
  }

  async getTree(sid: string): Promise<TreeResponse> {
    return expectJson(await fetch(this.url(`/sessions/${sid}/tree`)));
  }

  async getState(sid: string, stateId: number): Promise<StateDetail> {
    return expectJson(await fetch(this.url(`/sessions/${sid}/states/${stateId}`)));
  }

  /** Apply a modification; resolves 201/202/503 bodies into one outcome. */
  async postModification(
    sid: string,
    stateId: number,
    mod: ModificationJson,
  ): Promise<ModificationOutcome> {
    const body: Record<string, unknown> = { kind: mod.kind };
    if (mod.road !== undefined) body.road = mod.road;
    if (mod.capacity != null) body.capacity_veh_per_hr = mod.capacity;
    if (mod.fftt != null) body.fftt_min = mod.fftt;
    if (mod.from_node !== undefined) body.from_node = mod.from_node;
    if (mod.to_node !== undefined) body.to_node = mod.to_node;
    if (mod.two_way !== undefined) body.two_way = mod.two_way;
    if (mod.road_kind !== undefined) body.road_kind = mod.road_kind;
    const resp = await fetch(this.url(`/sessions/${sid}/states/${stateId}/modifications`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = (await resp.json()) as {
      state?: StateSummary;
      poll_token?: string;
      partial_result?: boolean;
      detail?: string;
    };
    if (resp.status === 201 || resp.status === 503) {
      return {
        status: resp.status,
        state: payload.state,
        partial: payload.partial_result,
        detail: payload.detail,
      };
    }
    if (resp.status === 202) {
      return { status: 202, pollToken: payload.poll_token };
    }
    throw new ApiError(resp.status, payload.detail ?? "modification failed");
  }

  async pollModification(sid: string, token: string): Promise<ModificationOutcome> {
    const resp = await fetch(this.url(`/sessions/${sid}/polls/${token}`));
    const payload = (await resp.json()) as {
      state?: StateSummary;
      status?: string;
      partial_result?: boolean;
      detail?: string;
    };
    if (resp.status === 202) return { status: 202 };
    if (resp.status === 201 || resp.status === 503) {
      return { status: resp.status, state: payload.state, partial: payload.partial_result };
    }
    throw new ApiError(resp.status, payload.detail ?? "poll failed");
  }

  async deleteState(sid: string, stateId: number): Promise<number[]> {
    const resp = await fetch(this.url(`/sessions/${sid}/states/${stateId}`), { method: "DELETE" });
    return (await expectJson<{ removed_state_ids: number[] }>(resp)).removed_state_ids;
  }

  async getOd(sid: string, stateId: number, roadId: number): Promise<OdFlow[]> {
    const resp = await fetch(this.url(`/sessions/${sid}/states/${stateId}/roads/${roadId}/od`));
    return (await expectJson<{ od_flows: OdFlow[] }>(resp)).od_flows;
  }

  async postIndicators(
    sid: string,
    selectedStates: number[],
    filters: Partial<Record<IndicatorName, [number, number]>>,
    sortKey: IndicatorName,
    descending: boolean,
    binCount = 20,
  ): Promise<IndicatorsResponse> {
    return this.post(`/sessions/${sid}/indicators`, {
      selected_states: selectedStates,
      filters,
      sort: { key: sortKey, descending },
      bin_count: binCount,
    });
  }

  async exportSession(sid: string): Promise<string> {
    const resp = await fetch(this.url(`/sessions/${sid}/export`));
    if (!resp.ok) throw new ApiError(resp.status, "export failed");
    return resp.text();
  }

  async importSession(text: string): Promise<string> {
    const body = await this.post<{ session_id: string }>("/sessions/import", { session: text });
    return body.session_id;
  }
}
