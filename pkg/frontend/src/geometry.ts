/** Projection from geographic coordinates into the map viewport. */

import type { NodeDetail } from "./api.js";

export interface Projection {
  x(lon: number): number;
  y(lat: number): number;
  width: number;
  height: number;
}

export function fitProjection(
  nodes: NodeDetail[],
  width: number,
  height: number,
  padding = 30,
): Projection {
  const lons = nodes.map((n) => n.lon_deg);
  const lats = nodes.map((n) => n.lat_deg);
  const lonMin = Math.min(...lons);
  const lonMax = Math.max(...lons);
  const latMin = Math.min(...lats);
  const latMax = Math.max(...lats);
  const lonSpan = Math.max(lonMax - lonMin, 1e-9);
  const latSpan = Math.max(latMax - latMin, 1e-9);
  // keep aspect: latitude degrees are "taller" than longitude degrees
  const latScaleFactor = 1.0 / Math.cos((((latMin + latMax) / 2) * Math.PI) / 180);
  const scale = Math.min(
    (width - 2 * padding) / lonSpan,
    (height - 2 * padding) / (latSpan * latScaleFactor),
  );
  const cx = (lonMin + lonMax) / 2;
  const cy = (latMin + latMax) / 2;
  return {
    width,
    height,
    x: (lon) => width / 2 + (lon - cx) * scale,
    y: (lat) => height / 2 - (lat - cy) * scale * latScaleFactor,
  };
}

/** Shift a segment to its right-hand side (two-way roads render as a pair). */
export function offsetRight(
  x1: number, y1: number, x2: number, y2: number, amount: number,
): [number, number, number, number] {
  const dx = x2 - x1;
  const dy = y2 - y1;
  const len = Math.hypot(dx, dy) || 1;
  // screen coordinates have y pointing down, so the right normal is (-dy, dx)
  const nx = (-dy / len) * amount;
  const ny = (dx / len) * amount;
  return [x1 + nx, y1 + ny, x2 + nx, y2 + ny];
}
