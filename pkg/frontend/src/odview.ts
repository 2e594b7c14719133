/** OD inspection overlay: after double-clicking a road, every intersection
 * carrying trips that use the road gets a pie sized by its total, split into
 * a green originating sector and a pink terminating sector.
 */

import type { OdFlow, StateDetail } from "./api.js";
import { fitProjection } from "./geometry.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const GREEN = "rgb(127, 191, 123)";
const PINK = "rgb(231, 138, 195)";

export interface PieSector {
  path: string;
  fill: string;
  kind: "originating" | "terminating";
}

/** Sector paths for one node's pie, radius scaled by total trips. */
export function pieSectors(
  cx: number, cy: number, originating: number, terminating: number, radius: number,
): PieSector[] {
  const total = originating + terminating;
  if (total <= 0) return [];
  const frac = originating / total;
  if (frac >= 1 || frac <= 0) {
    const circle =
      `M ${cx - radius} ${cy} ` +
      `A ${radius} ${radius} 0 1 1 ${cx + radius} ${cy} ` +
      `A ${radius} ${radius} 0 1 1 ${cx - radius} ${cy} Z`;
    return [
      {
        path: circle,
        fill: frac >= 1 ? GREEN : PINK,
        kind: frac >= 1 ? "originating" : "terminating",
      },
    ];
  }
  const angle = frac * 2 * Math.PI;
  const x = cx + radius * Math.sin(angle);
  const y = cy - radius * Math.cos(angle);
  const large = angle > Math.PI ? 1 : 0;
  return [
    {
      path: `M ${cx} ${cy} L ${cx} ${cy - radius} A ${radius} ${radius} 0 ${large} 1 ${x} ${y} Z`,
      fill: GREEN,
      kind: "originating",
    },
    {
      path: `M ${cx} ${cy} L ${x} ${y} A ${radius} ${radius} 0 ${large ? 0 : 1} 1 ${cx} ${cy - radius} Z`,
      fill: PINK,
      kind: "terminating",
    },
  ];
}

export class OdView {
  readonly layer: SVGGElement;

  constructor(private doc: Document, private mapSvg: SVGSVGElement) {
    this.layer = doc.createElementNS(SVG_NS, "g") as SVGGElement;
    this.layer.setAttribute("class", "od-overlay");
    mapSvg.appendChild(this.layer);
  }

  /** The map view rebuilds its SVG on every render, which detaches this
   * overlay; hook it back in before drawing. */
  private reattach(): void {
    if (this.layer.parentNode !== this.mapSvg) {
      this.mapSvg.appendChild(this.layer);
    }
  }

  render(state: StateDetail, flows: OdFlow[], width: number, height: number): void {
    this.reattach();
    this.layer.textContent = "";
    const proj = fitProjection(state.nodes, width, height);
    const pos = new Map(
      state.nodes.map((n) => [n.node_id, { x: proj.x(n.lon_deg), y: proj.y(n.lat_deg) }]),
    );
    const maxTotal = Math.max(...flows.map((f) => f.originating_veh + f.terminating_veh), 1);
    for (const f of flows) {
      const p = pos.get(f.node_id);
      if (!p) continue;
      const total = f.originating_veh + f.terminating_veh;
      const radius = 6 + 16 * Math.sqrt(total / maxTotal);
      const g = this.doc.createElementNS(SVG_NS, "g");
      g.setAttribute("class", "od-pie");
      g.dataset.nodeId = String(f.node_id);
      for (const sector of pieSectors(p.x, p.y, f.originating_veh, f.terminating_veh, radius)) {
        const path = this.doc.createElementNS(SVG_NS, "path");
        path.setAttribute("d", sector.path);
        path.setAttribute("fill", sector.fill);
        path.setAttribute("fill-opacity", "0.85");
        path.setAttribute("class", `sector-${sector.kind}`);
        g.appendChild(path);
      }
      this.layer.appendChild(g);
    }
  }

  clear(): void {
    this.layer.textContent = "";
  }
}
