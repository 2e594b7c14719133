/** Road/state matrix aligned under the history tree: one row per road (after
 * the indicator panel's filtering and ranking), one column per state, a road
 * glyph in each cell, and a mini-map up front with the row's road centered
 * and highlighted.
 */

import type { CellPayload, IndicatorsResponse, StateDetail } from "./api.js";
import { COLUMN_WIDTH } from "./tree.js";
import { maxAbsDeltaOf, renderGlyph } from "./glyph.js";
import { fitProjection } from "./geometry.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const MINIMAP_SIZE = 40;
const MINIMAP_RADIUS_PX = 70; // neighborhood radius around the row's road, map px

export class MatrixView {
  readonly root: HTMLDivElement;

  constructor(private doc: Document, container: HTMLElement) {
    this.root = doc.createElement("div");
    this.root.className = "road-matrix";
    container.appendChild(this.root);
  }

  render(
    indicators: IndicatorsResponse,
    columnStates: number[],
    referenceState: StateDetail,
  ): void {
    this.root.textContent = "";
    const maxAbs = maxAbsDeltaOf(indicators.cells);
    const cellsByKey = new Map<string, CellPayload>();
    for (const c of indicators.cells) {
      cellsByKey.set(`${c.road_id}:${c.state_id}`, c);
    }

    for (const roadId of indicators.ordered_road_ids) {
      const row = this.doc.createElement("div");
      row.className = "matrix-row";
      row.dataset.roadId = String(roadId);

      const label = this.doc.createElement("div");
      label.className = "row-label";
      label.textContent = String(roadId);
      row.appendChild(label);
      row.appendChild(this.renderMiniMap(roadId, referenceState));

      for (const stateId of columnStates) {
        const cell = this.doc.createElement("div");
        cell.className = "matrix-cell";
        cell.style.width = `${COLUMN_WIDTH}px`;
        cell.dataset.stateId = String(stateId);
        const payload = cellsByKey.get(`${roadId}:${stateId}`);
        if (payload) {
          cell.appendChild(renderGlyph(this.doc, payload, maxAbs));
        } else {
          cell.classList.add("road-absent");
        }
        row.appendChild(cell);
      }
      this.root.appendChild(row);
    }
  }

  /** Fixed-radius neighborhood of the row's road, road centered + highlighted. */
  private renderMiniMap(roadId: number, state: StateDetail): SVGSVGElement {
    const svg = this.doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    svg.setAttribute("class", "mini-map");
    svg.setAttribute("width", String(MINIMAP_SIZE));
    svg.setAttribute("height", String(MINIMAP_SIZE));
    const proj = fitProjection(state.nodes, 300, 300, 10);
    const pos = new Map(
      state.nodes.map((n) => [n.node_id, { x: proj.x(n.lon_deg), y: proj.y(n.lat_deg) }]),
    );
    const target = state.roads.find((r) => r.road_id === roadId);
    let cx = 150;
    let cy = 150;
    if (target) {
      const a = pos.get(target.from_node)!;
      const b = pos.get(target.to_node)!;
      cx = (a.x + b.x) / 2;
      cy = (a.y + b.y) / 2;
    }
    svg.setAttribute(
      "viewBox",
      `${cx - MINIMAP_RADIUS_PX} ${cy - MINIMAP_RADIUS_PX} ${2 * MINIMAP_RADIUS_PX} ${2 * MINIMAP_RADIUS_PX}`,
    );
    for (const r of state.roads) {
      const a = pos.get(r.from_node)!;
      const b = pos.get(r.to_node)!;
      const line = this.doc.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      const highlighted = r.road_id === roadId;
      line.setAttribute("stroke", highlighted ? "#d95f02" : "#ccc");
      line.setAttribute("stroke-width", highlighted ? "6" : "2");
      if (highlighted) line.setAttribute("class", "mini-map-highlight");
      svg.appendChild(line);
    }
    return svg;
  }

  cellElement(roadId: number, stateId: number): SVGSVGElement | null {
    return this.root.querySelector(
      `.matrix-row[data-road-id="${roadId}"] .matrix-cell[data-state-id="${stateId}"] svg.glyph`,
    );
  }
}
