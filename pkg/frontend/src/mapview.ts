/** Map view: the network drawn as a node-link diagram with traffic encoded
 * on it (width = volume, color = time/fftt on the diverging ramp, node size =
 * through-volume), plus the direct-edit interactions:
 *
 *  - click a road, pick "capacity" or "fftt": a semi-transparent mask appears;
 *    dragging across the road resizes capacity, dragging along it stretches
 *    fftt; a numeric panel allows exact input
 *  - right-click a road: dashed closure preview, then the closure is posted
 *  - double-click a road: per-node OD pie charts for trips using that road
 *  - drag from node to node (with one-way/two-way and surface/tunnel
 *    toggles): dashed hint line, then a build request is posted
 */

import type { RoadDetail, StateDetail } from "./api.js";
import { fitProjection, offsetRight, type Projection } from "./geometry.js";
import { timeRatioColor, volumeWidth } from "./scales.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapCallbacks {
  onSetCapacity(roadId: number, capacity: number): void;
  onSetFftt(roadId: number, fftt: number): void;
  onCloseRoad(roadId: number): void;
  onBuildRoad(fromNode: number, toNode: number): void;
  onInspectOd(roadId: number): void;
}

export interface EditPanelState {
  roadId: number;
  mode: "capacity" | "fftt";
  value: number;
}

export class MapView {
  readonly svg: SVGSVGElement;
  private proj: Projection | null = null;
  private state: StateDetail | null = null;
  private dragFromNode: number | null = null;
  private hintLine: SVGLineElement | null = null;
  private panel: HTMLDivElement;
  private nodePx = new Map<number, { x: number; y: number }>();
  private mask: SVGRectElement | null = null;
  private maskDrag: { startX: number; startY: number; ux: number; uy: number } | null = null;
  editPanel: EditPanelState | null = null;

  constructor(
    private doc: Document,
    container: HTMLElement,
    private callbacks: MapCallbacks,
    private width = 760,
    private height = 560,
  ) {
    this.svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("class", "map-view");
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(height));
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    container.appendChild(this.svg);
    this.panel = doc.createElement("div");
    this.panel.className = "edit-panel";
    this.panel.style.display = "none";
    container.appendChild(this.panel);

    // mask dragging: across the road scales capacity, along it scales fftt
    this.svg.addEventListener("mousemove", (ev) => {
      if (this.maskDrag && this.editPanel && ev instanceof MouseEvent) {
        const dx = ev.clientX - this.maskDrag.startX;
        const dy = ev.clientY - this.maskDrag.startY;
        const { ux, uy } = this.maskDrag;
        const proj =
          this.editPanel.mode === "capacity"
            ? dx * -uy + dy * ux // perpendicular component
            : dx * ux + dy * uy; // along-the-road component
        this.dragMask(Math.max(1 + proj / 60, 0.05));
      }
    });
    this.svg.addEventListener("mouseup", () => {
      this.maskDrag = null;
    });
  }

  render(state: StateDetail): void {
    this.state = state;
    this.svg.textContent = "";
    this.hideEditPanel();
    this.proj = fitProjection(state.nodes, this.width, this.height);
    const proj = this.proj;
    const nodePos = new Map(state.nodes.map((n) => [n.node_id, { x: proj.x(n.lon_deg), y: proj.y(n.lat_deg) }]));
    this.nodePx = nodePos;

    const maxVolume = Math.max(...state.roads.map((r) => r.volume_veh_per_hr), 1);
    const ratios = state.roads.map((r) => r.time_min / r.fftt_min);
    const minRatio = Math.min(...ratios);
    const maxRatio = Math.max(...ratios);

    const roadsLayer = this.doc.createElementNS(SVG_NS, "g");
    roadsLayer.setAttribute("class", "roads");
    this.svg.appendChild(roadsLayer);
    for (const road of state.roads) {
      const a = nodePos.get(road.from_node)!;
      const b = nodePos.get(road.to_node)!;
      const width = volumeWidth(road.volume_veh_per_hr, maxVolume);
      const [x1, y1, x2, y2] = offsetRight(a.x, a.y, b.x, b.y, width / 2 + 1.5);
      const line = this.doc.createElementNS(SVG_NS, "line") as SVGLineElement;
      line.setAttribute("x1", String(x1));
      line.setAttribute("y1", String(y1));
      line.setAttribute("x2", String(x2));
      line.setAttribute("y2", String(y2));
      line.setAttribute("stroke", timeRatioColor(road.time_min / road.fftt_min, minRatio, maxRatio));
      line.setAttribute("stroke-width", String(width));
      line.setAttribute("stroke-linecap", "round");
      line.setAttribute("class", "road");
      line.dataset.roadId = String(road.road_id);
      const title = this.doc.createElementNS(SVG_NS, "title");
      title.textContent =
        `road ${road.road_id}: travel time ${road.time_min.toFixed(1)}, ` +
        `volume ${road.volume_veh_per_hr.toFixed(0)}`;
      line.appendChild(title);
      this.wireRoadEvents(line, road);
      roadsLayer.appendChild(line);
    }

    // node through-volume: half the sum of incident road volumes
    const through = new Map<number, number>();
    for (const r of state.roads) {
      through.set(r.from_node, (through.get(r.from_node) ?? 0) + r.volume_veh_per_hr / 2);
      through.set(r.to_node, (through.get(r.to_node) ?? 0) + r.volume_veh_per_hr / 2);
    }
    const maxThrough = Math.max(...through.values(), 1);
    const nodesLayer = this.doc.createElementNS(SVG_NS, "g");
    nodesLayer.setAttribute("class", "nodes");
    this.svg.appendChild(nodesLayer);
    for (const n of state.nodes) {
      const p = nodePos.get(n.node_id)!;
      const c = this.doc.createElementNS(SVG_NS, "circle") as SVGCircleElement;
      c.setAttribute("cx", String(p.x));
      c.setAttribute("cy", String(p.y));
      c.setAttribute("r", String(4 + 8 * Math.sqrt((through.get(n.node_id) ?? 0) / maxThrough)));
      c.setAttribute("fill", "#555");
      c.setAttribute("class", "intersection");
      c.dataset.nodeId = String(n.node_id);
      this.wireNodeEvents(c, n.node_id, nodePos);
      nodesLayer.appendChild(c);
    }
  }

  private wireRoadEvents(line: SVGLineElement, road: RoadDetail): void {
    line.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      line.setAttribute("stroke-dasharray", "6 4"); // closure preview
      this.callbacks.onCloseRoad(road.road_id);
    });
    line.addEventListener("dblclick", (ev) => {
      ev.preventDefault();
      this.callbacks.onInspectOd(road.road_id);
    });
    line.addEventListener("click", () => this.showEditPanel(road));
  }

  private wireNodeEvents(
    circle: SVGCircleElement,
    nodeId: number,
    nodePos: Map<number, { x: number; y: number }>,
  ): void {
    circle.addEventListener("mousedown", () => {
      this.dragFromNode = nodeId;
      const p = nodePos.get(nodeId)!;
      const hint = this.doc.createElementNS(SVG_NS, "line") as SVGLineElement;
      hint.setAttribute("x1", String(p.x));
      hint.setAttribute("y1", String(p.y));
      hint.setAttribute("x2", String(p.x));
      hint.setAttribute("y2", String(p.y));
      hint.setAttribute("stroke", "#2166ac");
      hint.setAttribute("stroke-dasharray", "4 4");
      hint.setAttribute("class", "build-hint");
      this.svg.appendChild(hint);
      this.hintLine = hint;
    });
    circle.addEventListener("mouseup", () => {
      const from = this.dragFromNode;
      this.clearHint();
      if (from !== null && from !== nodeId) {
        this.callbacks.onBuildRoad(from, nodeId);
      }
      this.dragFromNode = null;
    });
    circle.addEventListener("mousemove", (ev) => {
      if (this.hintLine && ev instanceof MouseEvent) {
        this.hintLine.setAttribute("x2", String(ev.offsetX));
        this.hintLine.setAttribute("y2", String(ev.offsetY));
      }
    });
  }

  private clearHint(): void {
    if (this.hintLine) {
      this.hintLine.remove();
      this.hintLine = null;
    }
  }

  /** Expand/narrow and improve/restrict both funnel through this panel: the
   * mask drag updates the pending value; Apply posts it. */
  showEditPanel(road: RoadDetail, mode: "capacity" | "fftt" = "capacity"): void {
    const current = mode === "capacity" ? road.capacity_veh_per_hr : road.fftt_min;
    this.editPanel = { roadId: road.road_id, mode, value: current };
    this.showMask(road, mode);
    this.panel.style.display = "block";
    this.panel.textContent = "";
    const label = this.doc.createElement("span");
    label.textContent = `road ${road.road_id}`;
    this.panel.appendChild(label);

    for (const m of ["capacity", "fftt"] as const) {
      const btn = this.doc.createElement("button");
      btn.textContent = m === "capacity" ? "Expand/Narrow" : "Improve/Restrict";
      btn.className = `mode-${m}` + (m === mode ? " active" : "");
      btn.addEventListener("click", () => this.showEditPanel(road, m));
      this.panel.appendChild(btn);
    }

    const input = this.doc.createElement("input");
    input.type = "number";
    input.className = "edit-value";
    input.value = String(current);
    input.addEventListener("input", () => {
      const v = Number(input.value);
      if (this.editPanel && Number.isFinite(v)) this.editPanel.value = v;
    });
    this.panel.appendChild(input);

    const apply = this.doc.createElement("button");
    apply.textContent = "Apply";
    apply.className = "apply-edit";
    apply.addEventListener("click", () => this.applyEdit());
    this.panel.appendChild(apply);
  }

  /** Semi-transparent handle drawn over the road; its width previews the
   * capacity and its length the fftt. */
  private showMask(road: RoadDetail, mode: "capacity" | "fftt"): void {
    this.clearMask();
    const a = this.nodePx.get(road.from_node);
    const b = this.nodePx.get(road.to_node);
    if (!a || !b) return;
    const len = Math.hypot(b.x - a.x, b.y - a.y) || 1;
    const angle = (Math.atan2(b.y - a.y, b.x - a.x) * 180) / Math.PI;
    const mask = this.doc.createElementNS(SVG_NS, "rect") as SVGRectElement;
    mask.setAttribute("class", `edit-mask mask-${mode}`);
    mask.setAttribute("x", String(-len / 2));
    mask.setAttribute("y", "-9");
    mask.setAttribute("width", String(len));
    mask.setAttribute("height", "18");
    mask.setAttribute(
      "transform",
      `translate(${(a.x + b.x) / 2}, ${(a.y + b.y) / 2}) rotate(${angle})`,
    );
    mask.setAttribute("fill", "rgba(33, 102, 172, 0.3)");
    mask.dataset.baseLength = String(len);
    mask.addEventListener("mousedown", (ev) => {
      if (ev instanceof MouseEvent) {
        this.maskDrag = {
          startX: ev.clientX,
          startY: ev.clientY,
          ux: (b.x - a.x) / len,
          uy: (b.y - a.y) / len,
        };
      }
    });
    this.svg.appendChild(mask);
    this.mask = mask;
  }

  private clearMask(): void {
    if (this.mask) {
      this.mask.remove();
      this.mask = null;
    }
    this.maskDrag = null;
  }

  /** Mask drag: movement across or along the road scales the pending value. */
  dragMask(factor: number): void {
    if (!this.editPanel || !this.state) return;
    const road = this.state.roads.find((r) => r.road_id === this.editPanel!.roadId);
    if (!road) return;
    const base = this.editPanel.mode === "capacity" ? road.capacity_veh_per_hr : road.fftt_min;
    this.editPanel.value = Math.max(base * factor, 1e-6);
    const input = this.panel.querySelector<HTMLInputElement>("input.edit-value");
    if (input) input.value = String(this.editPanel.value);
    if (this.mask) {
      if (this.editPanel.mode === "capacity") {
        const h = 18 * factor;
        this.mask.setAttribute("y", String(-h / 2));
        this.mask.setAttribute("height", String(h));
      } else {
        const baseLen = Number(this.mask.dataset.baseLength) || 1;
        const w = baseLen * factor;
        this.mask.setAttribute("x", String(-w / 2));
        this.mask.setAttribute("width", String(w));
      }
    }
  }

  applyEdit(): void {
    if (!this.editPanel) return;
    const { roadId, mode, value } = this.editPanel;
    if (mode === "capacity") this.callbacks.onSetCapacity(roadId, value);
    else this.callbacks.onSetFftt(roadId, value);
    this.hideEditPanel();
  }

  hideEditPanel(): void {
    this.editPanel = null;
    this.panel.style.display = "none";
    this.clearMask();
  }

  roadElement(roadId: number): SVGLineElement | null {
    return this.svg.querySelector(`line.road[data-road-id="${roadId}"]`);
  }

  nodeElement(nodeId: number): SVGCircleElement | null {
    return this.svg.querySelector(`circle.intersection[data-node-id="${nodeId}"]`);
  }
}
