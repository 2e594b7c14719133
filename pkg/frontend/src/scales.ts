/** Color and size scales shared by the map, tree, and matrix. */

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

// Colorblind-safe diverging ramp endpoints (blue -> light gray -> orange).
const BLUE: Rgb = { r: 33, g: 102, b: 172 };
const GRAY: Rgb = { r: 235, g: 235, b: 235 };
const ORANGE: Rgb = { r: 230, g: 97, b: 1 };

function mix(a: Rgb, b: Rgb, t: number): Rgb {
  return {
    r: Math.round(a.r + (b.r - a.r) * t),
    g: Math.round(a.g + (b.g - a.g) * t),
    b: Math.round(a.b + (b.b - a.b) * t),
  };
}

export function rgbCss(c: Rgb): string {
  return `rgb(${c.r}, ${c.g}, ${c.b})`;
}

function clamp01(t: number): number {
  return t < 0 ? 0 : t > 1 ? 1 : t;
}

/** Diverging ramp over [0, 1]: 0 is blue, 0.5 light gray, 1 orange. */
export function diverging(t: number): Rgb {
  t = clamp01(t);
  return t <= 0.5 ? mix(BLUE, GRAY, t * 2) : mix(GRAY, ORANGE, (t - 0.5) * 2);
}

/** Map a road's time/fftt ratio onto the ramp given the per-state extent. */
export function timeRatioColor(ratio: number, min: number, max: number): string {
  const t = max > min ? (ratio - min) / (max - min) : 0.5;
  return rgbCss(diverging(t));
}

/** Linear road width in px from traffic volume. */
export function volumeWidth(volume: number, maxVolume: number, maxWidth = 10): number {
  if (maxVolume <= 0) return 1;
  return 1 + (maxWidth - 1) * clamp01(volume / maxVolume);
}

/**
 * Improvement/deterioration shade: positive deltas (improvements) go blue,
 * negative orange; darkness grows linearly with |delta| up to maxAbs.
 * Zero delta (or an undefined baseline) stays neutral white.
 */
export function deltaColor(delta: number | null, maxAbs: number): string {
  if (delta === null || delta === 0 || maxAbs <= 0) return "rgb(255, 255, 255)";
  const t = clamp01(Math.abs(delta) / maxAbs);
  const target = delta > 0 ? BLUE : ORANGE;
  return rgbCss(mix({ r: 255, g: 255, b: 255 }, target, t));
}

export function isNeutral(color: string): boolean {
  return color === "rgb(255, 255, 255)";
}

export function formatPercent(ratio: number, digits = 1): string {
  const pct = ratio * 100;
  const sign = pct > 0 ? "+" : "";
  return `${sign}${pct.toFixed(digits)}%`;
}

export function formatMoney(amount: number): string {
  if (amount >= 1e6) return `${(amount / 1e6).toFixed(2)}M`;
  if (amount >= 1e3) return `${(amount / 1e3).toFixed(1)}k`;
  return amount.toFixed(0);
}
