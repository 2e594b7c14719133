/** Application controller: owns the session, wires the views together, and
 * routes every edit through the HTTP API (at most one in-flight modification;
 * edit controls are disabled while one runs). All rendered numbers come from
 * server responses, so re-fetching reproduces the identical screen.
 */

import { ApiClient, type IndicatorName, type IndicatorsResponse, type StateDetail, type TreeResponse } from "./api.js";
import { IndicatorPanel } from "./indicators.js";
import { MapView } from "./mapview.js";
import { MatrixView } from "./matrix.js";
import { OdView } from "./odview.js";
import { TreeView, columnOrder } from "./tree.js";

export class App {
  readonly mapView: MapView;
  readonly treeView: TreeView;
  readonly matrixView: MatrixView;
  readonly indicatorPanel: IndicatorPanel;
  readonly odView: OdView;

  tree: TreeResponse | null = null;
  currentState: StateDetail | null = null;
  indicators: IndicatorsResponse | null = null;
  buildTwoWay = true;
  buildKind: "surface" | "tunnel" = "surface";
  busy = false;
  lastError: string | null = null;
  zoom = 1.0;

  private statusLine: HTMLDivElement;
  private viewport: HTMLDivElement;

  constructor(
    doc: Document,
    root: HTMLElement,
    private api: ApiClient,
    private sessionId: string,
  ) {
    const mapPane = doc.createElement("div");
    mapPane.className = "map-pane";
    root.appendChild(mapPane);

    // toggles consulted when a node-to-node drag builds a road
    const buildBar = doc.createElement("div");
    buildBar.className = "build-toolbar";
    const twoWayLabel = doc.createElement("label");
    const twoWay = doc.createElement("input");
    twoWay.type = "checkbox";
    twoWay.className = "toggle-two-way";
    twoWay.checked = this.buildTwoWay;
    twoWay.addEventListener("change", () => {
      this.buildTwoWay = twoWay.checked;
    });
    twoWayLabel.append(twoWay, " two-way");
    const kind = doc.createElement("select");
    kind.className = "toggle-road-kind";
    for (const k of ["surface", "tunnel"] as const) {
      const opt = doc.createElement("option");
      opt.value = k;
      opt.textContent = k;
      kind.appendChild(opt);
    }
    kind.addEventListener("change", () => {
      this.buildKind = kind.value as "surface" | "tunnel";
    });
    buildBar.append(twoWayLabel, kind);
    mapPane.appendChild(buildBar);
    const comparisonPane = doc.createElement("div");
    comparisonPane.className = "comparison-pane";
    root.appendChild(comparisonPane);

    // tree and matrix share one pannable/zoomable viewport so their columns
    // stay aligned at any zoom level
    const zoomBar = doc.createElement("div");
    zoomBar.className = "zoom-bar";
    const zoomOut = doc.createElement("button");
    zoomOut.className = "zoom-out";
    zoomOut.textContent = "−";
    zoomOut.addEventListener("click", () => this.setZoom(this.zoom / 1.25));
    const zoomIn = doc.createElement("button");
    zoomIn.className = "zoom-in";
    zoomIn.textContent = "+";
    zoomIn.addEventListener("click", () => this.setZoom(this.zoom * 1.25));
    zoomBar.append(zoomOut, zoomIn);
    comparisonPane.appendChild(zoomBar);
    this.viewport = doc.createElement("div");
    this.viewport.className = "tree-matrix-viewport";
    comparisonPane.appendChild(this.viewport);

    this.statusLine = doc.createElement("div");
    this.statusLine.className = "status-line";
    root.appendChild(this.statusLine);

    this.mapView = new MapView(doc, mapPane, {
      onSetCapacity: (road, capacity) =>
        void this.applyModification({ kind: "set_capacity", road, capacity }),
      onSetFftt: (road, fftt) => void this.applyModification({ kind: "set_fftt", road, fftt }),
      onCloseRoad: (road) => void this.applyModification({ kind: "close_road", road }),
      onBuildRoad: (from_node, to_node) =>
        void this.applyModification({
          kind: "build_road",
          from_node,
          to_node,
          two_way: this.buildTwoWay,
          road_kind: this.buildKind,
        }),
      onInspectOd: (road) => void this.inspectOd(road),
    });
    this.odView = new OdView(doc, this.mapView.svg);
    this.treeView = new TreeView(doc, this.viewport, {
      onSelectState: (id) => void this.selectState(id),
      onDeleteState: (id) => void this.deleteState(id),
      onToggleComparison: (id, selected) => this.indicatorPanel.toggleState(id, selected),
    });
    this.matrixView = new MatrixView(doc, this.viewport);
    this.indicatorPanel = new IndicatorPanel(doc, comparisonPane, {
      onSelectionChange: () => void this.refreshComparison(),
      onFilterChange: () => void this.refreshComparison(),
      onRank: (name: IndicatorName) => {
        this.indicatorPanel.rank(name);
        void this.refreshComparison();
      },
    });
  }

  static async create(doc: Document, root: HTMLElement, api: ApiClient, sessionId: string): Promise<App> {
    const app = new App(doc, root, api, sessionId);
    await app.refreshAll();
    return app;
  }

  get selectedState(): number {
    return this.treeView.selectedState;
  }

  setZoom(zoom: number): void {
    this.zoom = Math.min(Math.max(zoom, 0.25), 4.0);
    this.viewport.style.transform = `scale(${this.zoom})`;
    this.viewport.style.transformOrigin = "top left";
  }

  async refreshAll(): Promise<void> {
    this.tree = await this.api.getTree(this.sessionId);
    const ids = this.tree.nodes.map((n) => n.id);
    if (!ids.includes(this.treeView.selectedState)) {
      this.treeView.selectedState = this.tree.root_id;
    }
    // newly appeared states join the comparison selection by default
    for (const id of ids) {
      if (!this.knownStates.has(id)) this.indicatorPanel.selectedStates.add(id);
    }
    this.knownStates = new Set(ids);
    for (const id of [...this.indicatorPanel.selectedStates]) {
      if (!this.knownStates.has(id)) this.indicatorPanel.selectedStates.delete(id);
    }
    this.treeView.render(this.tree, this.indicatorPanel.selectedStates);
    this.currentState = await this.api.getState(this.sessionId, this.treeView.selectedState);
    this.mapView.render(this.currentState);
    await this.refreshComparison();
    this.renderStatus();
  }

  private knownStates = new Set<number>();

  async refreshComparison(): Promise<void> {
    if (!this.tree) return;
    const selected = [...this.indicatorPanel.selectedStates].sort((a, b) => a - b);
    if (selected.length === 0 || !this.currentState) {
      this.matrixView.root.textContent = "";
      return;
    }
    this.indicators = await this.api.postIndicators(
      this.sessionId,
      selected,
      this.indicatorPanel.filtersAsRecord(),
      this.indicatorPanel.sortKey,
      this.indicatorPanel.sortDescending,
    );
    const columns = columnOrder(this.tree).filter((id) => this.indicatorPanel.selectedStates.has(id));
    this.matrixView.render(this.indicators, columns, this.currentState);
    this.indicatorPanel.render(this.indicators);
  }

  async selectState(stateId: number): Promise<void> {
    this.treeView.selectedState = stateId;
    this.odView.clear();
    if (this.tree) this.treeView.render(this.tree, this.indicatorPanel.selectedStates);
    this.currentState = await this.api.getState(this.sessionId, stateId);
    this.mapView.render(this.currentState);
    await this.refreshComparison();
  }

  async applyModification(mod: Parameters<ApiClient["postModification"]>[2]): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.lastError = null;
    this.renderStatus();
    try {
      let outcome = await this.api.postModification(this.sessionId, this.selectedState, mod);
      while (outcome.status === 202 && outcome.pollToken) {
        await sleep(250);
        outcome = await this.api.pollModification(this.sessionId, outcome.pollToken);
        if (outcome.status === 202 && !outcome.pollToken) {
          outcome.pollToken = undefined;
          break;
        }
      }
      if (outcome.state) {
        this.treeView.selectedState = outcome.state.id;
      }
      if (outcome.status === 503) {
        this.lastError = "solver budget exceeded; showing the partial result";
      }
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
    } finally {
      this.busy = false;
    }
    await this.refreshAll();
  }

  async deleteState(stateId: number): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.api.deleteState(this.sessionId, stateId);
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
    } finally {
      this.busy = false;
    }
    await this.refreshAll();
  }

  async inspectOd(roadId: number): Promise<void> {
    if (!this.currentState) return;
    const flows = await this.api.getOd(this.sessionId, this.selectedState, roadId);
    this.odView.render(this.currentState, flows, 760, 560);
  }

  private renderStatus(): void {
    this.statusLine.textContent = this.lastError
      ? `error: ${this.lastError}`
      : this.busy
        ? "solving..."
        : "";
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** Attach to an existing session, or create one from a built-in dataset. */
export async function bootstrap(
  doc: Document,
  root: HTMLElement,
  baseUrl: string,
  dataset = "braess",
): Promise<App> {
  const api = new ApiClient(baseUrl);
  const sessions = await api.listSessions();
  const sessionId = sessions.length
    ? sessions[0]
    : (await api.createSession({ dataset })).session_id;
  return App.create(doc, root, api, sessionId);
}
