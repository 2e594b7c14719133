/** Indicator panel: one histogram per indicator with a brushable range
 * filter, plus ranking buttons. It also owns which states are in the
 * comparison (the checkboxes atop the tree columns report here; everything
 * is selected by default). Brushing or ranking re-queries the service and
 * the matrix re-renders from the response.
 */

import {
  INDICATOR_NAMES,
  type HistogramBin,
  type IndicatorName,
  type IndicatorsResponse,
} from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const HIST_WIDTH = 160;
const HIST_HEIGHT = 48;

export interface IndicatorPanelCallbacks {
  onSelectionChange(selected: number[]): void;
  onFilterChange(name: IndicatorName, range: [number, number] | null): void;
  onRank(name: IndicatorName): void;
}

export class IndicatorPanel {
  readonly root: HTMLDivElement;
  selectedStates = new Set<number>();
  filters = new Map<IndicatorName, [number, number]>();
  sortKey: IndicatorName = "avg_flow";
  sortDescending = true;

  constructor(
    private doc: Document,
    container: HTMLElement,
    private callbacks: IndicatorPanelCallbacks,
  ) {
    this.root = doc.createElement("div");
    this.root.className = "indicator-panel";
    container.appendChild(this.root);
  }

  /** Reset the selection to every state in the tree (the default). */
  setStates(stateIds: number[]): void {
    this.selectedStates = new Set(stateIds);
  }

  toggleState(stateId: number, selected: boolean): void {
    if (selected) this.selectedStates.add(stateId);
    else this.selectedStates.delete(stateId);
    this.callbacks.onSelectionChange([...this.selectedStates].sort((a, b) => a - b));
  }

  render(response: IndicatorsResponse): void {
    this.root.textContent = "";
    for (const name of INDICATOR_NAMES) {
      this.root.appendChild(this.renderHistogram(name, response.histograms[name] ?? []));
    }
  }

  private renderHistogram(name: IndicatorName, bins: HistogramBin[]): HTMLDivElement {
    const wrap = this.doc.createElement("div");
    wrap.className = "histogram";
    wrap.dataset.indicator = name;

    const header = this.doc.createElement("div");
    header.className = "histogram-header";
    const title = this.doc.createElement("span");
    title.textContent = name;
    header.appendChild(title);
    const rank = this.doc.createElement("button");
    rank.className = "rank-button" + (this.sortKey === name ? " active" : "");
    rank.textContent = this.sortKey === name && this.sortDescending ? "rank ↓" : "rank";
    rank.addEventListener("click", () => this.callbacks.onRank(name));
    header.appendChild(rank);
    wrap.appendChild(header);

    const svg = this.doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    svg.setAttribute("width", String(HIST_WIDTH));
    svg.setAttribute("height", String(HIST_HEIGHT));
    svg.setAttribute("class", "histogram-bars");
    const maxCount = Math.max(...bins.map((b) => b.count), 1);
    const lo = bins.length ? bins[0].lo : 0;
    const hi = bins.length ? bins[bins.length - 1].hi : 1;
    const span = Math.max(hi - lo, 1e-12);
    for (const b of bins) {
      const rect = this.doc.createElementNS(SVG_NS, "rect");
      const x = ((b.lo - lo) / span) * HIST_WIDTH;
      const w = Math.max(((b.hi - b.lo) / span) * HIST_WIDTH - 1, 1);
      const h = (b.count / maxCount) * (HIST_HEIGHT - 4);
      rect.setAttribute("x", String(x));
      rect.setAttribute("y", String(HIST_HEIGHT - h));
      rect.setAttribute("width", String(w));
      rect.setAttribute("height", String(h));
      rect.setAttribute("fill", "#8da0cb");
      svg.appendChild(rect);
    }
    const active = this.filters.get(name);
    if (active) {
      const [flo, fhi] = active;
      const rect = this.doc.createElementNS(SVG_NS, "rect");
      rect.setAttribute("class", "brush");
      rect.setAttribute("x", String(((flo - lo) / span) * HIST_WIDTH));
      rect.setAttribute("y", "0");
      rect.setAttribute("width", String(Math.max(((fhi - flo) / span) * HIST_WIDTH, 2)));
      rect.setAttribute("height", String(HIST_HEIGHT));
      rect.setAttribute("fill", "rgba(50, 50, 50, 0.25)");
      svg.appendChild(rect);
    }
    wrap.appendChild(svg);

    // brush by dragging across the bars
    let dragStart: number | null = null;
    const valueAt = (px: number): number => lo + (px / HIST_WIDTH) * span;
    svg.addEventListener("mousedown", (ev) => {
      if (ev instanceof MouseEvent) dragStart = ev.offsetX;
    });
    svg.addEventListener("mouseup", (ev) => {
      if (dragStart === null || !(ev instanceof MouseEvent)) return;
      const a = valueAt(Math.min(dragStart, ev.offsetX));
      const b = valueAt(Math.max(dragStart, ev.offsetX));
      dragStart = null;
      this.brush(name, Math.abs(a - b) < span * 1e-6 ? null : [a, b]);
    });
    const clear = this.doc.createElement("button");
    clear.className = "clear-brush";
    clear.textContent = "clear";
    clear.style.display = active ? "inline" : "none";
    clear.addEventListener("click", () => this.brush(name, null));
    wrap.appendChild(clear);
    return wrap;
  }

  brush(name: IndicatorName, range: [number, number] | null): void {
    if (range === null) this.filters.delete(name);
    else this.filters.set(name, range);
    this.callbacks.onFilterChange(name, range);
  }

  rank(name: IndicatorName): void {
    if (this.sortKey === name) this.sortDescending = !this.sortDescending;
    else {
      this.sortKey = name;
      this.sortDescending = true;
    }
  }

  filtersAsRecord(): Partial<Record<IndicatorName, [number, number]>> {
    const out: Partial<Record<IndicatorName, [number, number]>> = {};
    for (const [k, v] of this.filters) out[k] = v;
    return out;
  }
}
