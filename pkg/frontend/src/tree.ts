/** Horizontal history tree. Each state occupies one fixed-width column (the
 * matrix below aligns to the same columns): header with cumulative cost and
 * modification icons, an s-node circle whose border encodes the metric delta
 * against the initial state, and a connector to its parent column colored by
 * the delta against the parent. Click selects, right-click cascade-deletes.
 */

import type { StateSummary, TreeResponse } from "./api.js";
import { deltaColor, formatMoney, formatPercent } from "./scales.js";

export const COLUMN_WIDTH = 120;

const ICONS: Record<string, string> = {
  set_capacity: "↔", // widen/narrow arrows
  set_fftt: "⏱",     // stopwatch
  close_road: "✕",   // cross
  build_road: "+",   // plus
};

export interface TreeCallbacks {
  onSelectState(stateId: number): void;
  onDeleteState(stateId: number): void;
  /** Comparison checkbox atop the column was toggled. */
  onToggleComparison(stateId: number, selected: boolean): void;
}

/** Column order: depth-first from the root, children in id order, so a parent
 * is always left of its descendants. */
export function columnOrder(tree: TreeResponse): number[] {
  const byId = new Map(tree.nodes.map((n) => [n.id, n]));
  const order: number[] = [];
  const walk = (id: number): void => {
    order.push(id);
    const node = byId.get(id);
    if (node) [...node.children].sort((a, b) => a - b).forEach(walk);
  };
  walk(tree.root_id);
  return order;
}

export class TreeView {
  readonly root: HTMLDivElement;
  private columns = new Map<number, number>(); // state id -> column index
  selectedState: number;

  constructor(
    private doc: Document,
    container: HTMLElement,
    private callbacks: TreeCallbacks,
  ) {
    this.root = doc.createElement("div");
    this.root.className = "history-tree";
    container.appendChild(this.root);
    this.selectedState = 0;
  }

  columnOf(stateId: number): number | undefined {
    return this.columns.get(stateId);
  }

  render(tree: TreeResponse, comparisonSelection?: Set<number>): void {
    this.root.textContent = "";
    const order = columnOrder(tree);
    this.columns = new Map(order.map((id, i) => [id, i]));
    const byId = new Map(tree.nodes.map((n) => [n.id, n]));
    const maxAbs = Math.max(
      ...tree.nodes.map((n) => Math.abs(n.delta_vs_initial_ratio)),
      ...tree.nodes.map((n) => (n.delta_vs_parent_applicable ? Math.abs(n.delta_vs_parent_ratio) : 0)),
    );

    for (const id of order) {
      const node = byId.get(id)!;
      this.root.appendChild(this.renderColumn(node, maxAbs, comparisonSelection));
    }
  }

  private renderColumn(
    node: StateSummary,
    maxAbs: number,
    comparisonSelection?: Set<number>,
  ): HTMLDivElement {
    const col = this.doc.createElement("div");
    col.className = "tree-column";
    col.style.width = `${COLUMN_WIDTH}px`;
    col.dataset.stateId = String(node.id);

    const header = this.doc.createElement("div");
    header.className = "column-header";
    const box = this.doc.createElement("input");
    box.type = "checkbox";
    box.className = "compare-state";
    box.dataset.stateId = String(node.id);
    box.checked = comparisonSelection ? comparisonSelection.has(node.id) : true;
    box.addEventListener("change", () =>
      this.callbacks.onToggleComparison(node.id, box.checked),
    );
    header.appendChild(box);
    const cost = this.doc.createElement("div");
    cost.className = "cumulative-cost";
    cost.textContent = formatMoney(node.cumulative_cost_currency);
    header.appendChild(cost);
    const icons = this.doc.createElement("div");
    icons.className = "mod-icons";
    if (node.modification_icon) {
      const icon = this.doc.createElement("span");
      icon.className = `mod-icon icon-${node.modification_icon}`;
      icon.textContent = ICONS[node.modification_icon] ?? "?";
      icons.appendChild(icon);
    }
    header.appendChild(icons);
    col.appendChild(header);

    if (node.parent !== null) {
      const edge = this.doc.createElement("div");
      edge.className = "m-edge";
      edge.style.backgroundColor = deltaColor(
        node.delta_vs_parent_applicable ? node.delta_vs_parent_ratio : null,
        maxAbs,
      );
      edge.dataset.parent = String(node.parent);
      col.appendChild(edge);
    }

    const circle = this.doc.createElement("div");
    circle.className = "s-node" + (node.id === this.selectedState ? " selected" : "");
    circle.dataset.stateId = String(node.id);
    // the initial state stays white; others shade by their improvement
    circle.style.borderColor =
      node.parent === null ? "#999" : deltaColor(node.delta_vs_initial_ratio, maxAbs);
    circle.style.borderStyle = node.id === this.selectedState ? "dashed" : "solid";
    circle.addEventListener("click", () => this.callbacks.onSelectState(node.id));
    circle.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      this.callbacks.onDeleteState(node.id);
    });
    col.appendChild(circle);

    const badge = this.doc.createElement("div");
    badge.className = "improvement-badge";
    badge.textContent = node.parent === null ? "initial" : formatPercent(node.delta_vs_initial_ratio);
    col.appendChild(badge);

    if (!node.converged) {
      const warn = this.doc.createElement("div");
      warn.className = "not-converged";
      warn.textContent = "partial";
      col.appendChild(warn);
    }
    return col;
  }
}
