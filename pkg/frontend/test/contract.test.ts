/** Scripted interaction against a real service process running the Braess
 * fixture: close road 3 through the map's right-click path and verify what
 * the comparison view shows.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { bootstrap, type App } from "../src/app.js";

let proc: ChildProcess;
let baseUrl = "";
let app: App;

function waitFor(check: () => boolean, timeoutMs = 30_000, label = "condition"): Promise<void> {
  const start = Date.now();
  return new Promise((resolve, reject) => {
    const tick = () => {
      if (check()) return resolve();
      if (Date.now() - start > timeoutMs) return reject(new Error(`timed out waiting for ${label}`));
      setTimeout(tick, 50);
    };
    tick();
  });
}

beforeAll(async () => {
  proc = spawn("python3", ["-m", "roadplan.cli", "serve", "--dataset", "braess", "--port", "0"], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  const port = await new Promise<number>((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error(`service did not start: ${buffer}`)), 60_000);
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const m = buffer.match(/listening on http:\/\/127\.0\.0\.1:(\d+)/);
      if (m) {
        clearTimeout(timer);
        resolve(Number(m[1]));
      }
    });
    proc.on("exit", (code) => reject(new Error(`service exited early (${code}): ${buffer}`)));
  });
  baseUrl = `http://127.0.0.1:${port}`;
  // wait until HTTP actually answers
  await waitFor(() => true);
  for (let i = 0; i < 100; i++) {
    try {
      const r = await fetch(`${baseUrl}/sessions`);
      if (r.ok) break;
    } catch {
      await new Promise((r) => setTimeout(r, 200));
    }
  }

  document.body.innerHTML = '<div id="app"></div>';
  app = await bootstrap(document, document.getElementById("app")!, baseUrl, "braess");
});

afterAll(() => {
  proc?.kill();
});

describe("closing road 3 on the Braess fixture", () => {
  it("creates a second tree column whose badge reads ~26%", async () => {
    expect(app.tree!.nodes.length).toBe(1);
    const road3 = app.mapView.roadElement(3);
    expect(road3).not.toBeNull();
    road3!.dispatchEvent(new MouseEvent("contextmenu", { bubbles: true, cancelable: true }));
    await waitFor(
      () => !app.busy && (app.tree?.nodes.length ?? 0) === 2,
      60_000,
      "the closure state to appear",
    );
    expect(app.lastError).toBeNull();

    const columns = document.querySelectorAll(".tree-column");
    expect(columns.length).toBe(2);
    const badge = columns[1].querySelector(".improvement-badge")!.textContent!;
    const pct = Number(badge.replace(/[+%]/g, ""));
    expect(pct).toBeGreaterThan(25);
    expect(pct).toBeLessThan(27);
  });

  it("shows blue matrix backgrounds for roads 2 and 5 in the closure column", () => {
    const closedId = app.tree!.nodes.find((n) => n.parent === 0)!.id;
    for (const roadId of [2, 5]) {
      const glyph = app.matrixView.cellElement(roadId, closedId);
      expect(glyph, `glyph for road ${roadId}`).not.toBeNull();
      const fill = glyph!.querySelector("rect.glyph-bg")!.getAttribute("fill")!;
      const [r, g, b] = fill.match(/\d+/g)!.map(Number);
      expect(b).toBeGreaterThan(r); // blue side of the ramp
      expect(b).toBeGreaterThan(g);
      expect(fill).not.toBe("rgb(255, 255, 255)");
    }
    // the closed road has no cell in the closure column
    expect(app.matrixView.cellElement(3, closedId)).toBeNull();
  });

  it("rendered glyphs obey the geometry invariants", () => {
    const cells = app.indicators!.cells;
    expect(cells.length).toBeGreaterThan(0);
    for (const cell of cells) {
      const glyph = app.matrixView.cellElement(cell.road_id, cell.state_id)!;
      const side = Number(glyph.getAttribute("width"));
      const purple = glyph.querySelector("rect.glyph-status")!;
      const width = Number(purple.getAttribute("width"));
      const height = Number(purple.getAttribute("height"));
      const bottomOffset = side - height; // purple hangs from the top edge

      // width 0 iff volume 0
      if (cell.volume_veh_per_hr === 0) expect(width).toBe(0);
      else expect(width).toBeGreaterThan(0);
      // purple touches the bottom iff travel time is at free flow
      if (Math.abs(cell.time_min - cell.fftt_min) < 1e-12) {
        expect(bottomOffset).toBeCloseTo(0, 9);
      } else {
        expect(bottomOffset).toBeGreaterThan(0);
      }
      // white reference is half the cell; overflow clamp holds
      const white = Number(glyph.querySelector("rect.glyph-capacity")!.getAttribute("width"));
      expect(white).toBeCloseTo(side / 2, 9);
      expect(width).toBeLessThanOrEqual(1.8 * white + 1e-9);
    }
  });

  it("OD inspection draws pies for the logit path endpoints", async () => {
    await app.selectState(0);
    app.mapView.roadElement(2)!.dispatchEvent(new MouseEvent("dblclick", { bubbles: true }));
    await waitFor(
      () => app.mapView.svg.querySelectorAll(".od-pie").length > 0,
      30_000,
      "OD pies",
    );
    const pies = app.mapView.svg.querySelectorAll(".od-pie");
    expect(pies.length).toBe(2); // origin and destination nodes
  });

  it("the whole screen is reproducible from a fresh fetch", async () => {
    const before = document.querySelector(".road-matrix")!.innerHTML;
    await app.refreshAll();
    expect(document.querySelector(".road-matrix")!.innerHTML).toBe(before);
  });
});
