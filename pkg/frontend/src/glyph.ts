/** Road-glyph geometry for matrix cells.
 *
 * The glyph follows a road metaphor: a half-cell-wide white rectangle is the
 * capacity reference, and a purple rectangle on top of it encodes the live
 * status. Purple width scales volume against capacity (it may spill past the
 * white reference when over capacity, clamped for legibility); the purple
 * rectangle hangs from the cell top and its bottom edge keeps a distance
 * from the cell bottom proportional to 1 - fftt/time, so it touches the
 * bottom exactly at free flow. The background shades blue (faster than the
 * initial state) or orange (slower), darkness linear in |delta| across the
 * visible cells.
 */

import type { CellPayload } from "./api.js";
import { deltaColor } from "./scales.js";

export const PURPLE_OVERFLOW_CLAMP = 1.8;

export interface GlyphGeometry {
  cell: number;
  whiteWidth: number;
  purpleWidth: number;
  purpleHeight: number;
  /** Distance from the purple rectangle's bottom edge to the cell bottom. */
  purpleBottomOffset: number;
  background: string;
  isNew: boolean;
}

export function glyphGeometry(payload: CellPayload, maxAbsDelta: number, cell = 36): GlyphGeometry {
  const whiteWidth = cell / 2;
  const ratio = payload.volume_veh_per_hr / payload.capacity_veh_per_hr;
  const purpleWidth = Math.min(ratio, PURPLE_OVERFLOW_CLAMP) * whiteWidth;
  const timeRatio = payload.fftt_min / payload.time_min; // in (0, 1]
  const purpleHeight = cell * timeRatio;
  const purpleBottomOffset = cell - purpleHeight;
  const background = payload.is_new
    ? "rgb(255, 255, 255)"
    : deltaColor(payload.delta_time_vs_initial_min, maxAbsDelta);
  return {
    cell,
    whiteWidth,
    purpleWidth,
    purpleHeight,
    purpleBottomOffset,
    background,
    isNew: payload.is_new,
  };
}

export function maxAbsDeltaOf(cells: CellPayload[]): number {
  let max = 0;
  for (const c of cells) {
    if (c.delta_time_vs_initial_min !== null) {
      max = Math.max(max, Math.abs(c.delta_time_vs_initial_min));
    }
  }
  return max;
}

const SVG_NS = "http://www.w3.org/2000/svg";

/** Render one glyph into an <svg> cell element. */
export function renderGlyph(doc: Document, payload: CellPayload, maxAbsDelta: number, cell = 36): SVGSVGElement {
  const g = glyphGeometry(payload, maxAbsDelta, cell);
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("width", String(cell));
  svg.setAttribute("height", String(cell));
  svg.setAttribute("viewBox", `0 0 ${cell} ${cell}`);
  svg.setAttribute("class", "glyph");
  svg.dataset.roadId = String(payload.road_id);
  svg.dataset.stateId = String(payload.state_id);

  const bg = doc.createElementNS(SVG_NS, "rect");
  bg.setAttribute("x", "0");
  bg.setAttribute("y", "0");
  bg.setAttribute("width", String(cell));
  bg.setAttribute("height", String(cell));
  bg.setAttribute("fill", g.background);
  bg.setAttribute("class", "glyph-bg");
  svg.appendChild(bg);

  const white = doc.createElementNS(SVG_NS, "rect");
  white.setAttribute("x", String((cell - g.whiteWidth) / 2));
  white.setAttribute("y", "0");
  white.setAttribute("width", String(g.whiteWidth));
  white.setAttribute("height", String(cell));
  white.setAttribute("fill", "white");
  white.setAttribute("stroke", "#bbb");
  white.setAttribute("stroke-width", "0.5");
  white.setAttribute("class", "glyph-capacity");
  svg.appendChild(white);

  const purple = doc.createElementNS(SVG_NS, "rect");
  purple.setAttribute("x", String((cell - g.purpleWidth) / 2));
  purple.setAttribute("y", "0");
  purple.setAttribute("width", String(g.purpleWidth));
  purple.setAttribute("height", String(g.purpleHeight));
  purple.setAttribute("fill", "rgb(122, 85, 160)");
  purple.setAttribute("fill-opacity", "0.85");
  purple.setAttribute("class", "glyph-status");
  svg.appendChild(purple);

  const title = doc.createElementNS(SVG_NS, "title");
  title.textContent =
    `road ${payload.road_id}: volume ${payload.volume_veh_per_hr.toFixed(1)}, ` +
    `time ${payload.time_min.toFixed(2)} (fftt ${payload.fftt_min.toFixed(2)})`;
  svg.appendChild(title);
  return svg;
}
