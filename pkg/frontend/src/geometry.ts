import { EllipseDraft } from "./types.js";

/** Analytic ellipse area in pixel^2; independent of center and rotation. */
export function ellipseArea(e: { rx: number; ry: number }): number {
  return Math.PI * e.rx * e.ry;
}

/** Canvas pixel -> image pixel at the given integer zoom factor. */
export function canvasToImage(x: number, y: number, zoom: number): { x: number; y: number } {
  return { x: x / zoom, y: y / zoom };
}

export function imageToCanvas(x: number, y: number, zoom: number): { x: number; y: number } {
  return { x: x * zoom, y: y * zoom };
}

/** True if the image-pixel point lies inside the (rotated) ellipse. */
export function pointInEllipse(px: number, py: number, e: EllipseDraft): boolean {
  const dx = px - e.cx;
  const dy = py - e.cy;
  const cos = Math.cos(e.theta);
  const sin = Math.sin(e.theta);
  const u = dx * cos + dy * sin;
  const v = -dx * sin + dy * cos;
  return (u * u) / (e.rx * e.rx) + (v * v) / (e.ry * e.ry) <= 1;
}

export type HandleName = "rx+" | "rx-" | "ry+" | "ry-" | "rotate";

export interface Handle {
  name: HandleName;
  x: number;
  y: number;
}

const ROTATE_HANDLE_OFFSET = 4; // image pixels beyond the ry+ axis tip

/** Resize handles at the four axis tips plus a rotation handle. */
export function handlePositions(e: EllipseDraft): Handle[] {
  const cos = Math.cos(e.theta);
  const sin = Math.sin(e.theta);
  return [
    { name: "rx+", x: e.cx + e.rx * cos, y: e.cy + e.rx * sin },
    { name: "rx-", x: e.cx - e.rx * cos, y: e.cy - e.rx * sin },
    { name: "ry+", x: e.cx - e.ry * sin, y: e.cy + e.ry * cos },
    { name: "ry-", x: e.cx + e.ry * sin, y: e.cy - e.ry * cos },
    {
      name: "rotate",
      x: e.cx - (e.ry + ROTATE_HANDLE_OFFSET) * sin,
      y: e.cy + (e.ry + ROTATE_HANDLE_OFFSET) * cos,
    },
  ];
}

/** Closest handle within tolerance (image pixels), or null. */
export function hitTestHandles(
  px: number,
  py: number,
  e: EllipseDraft,
  tolerance: number,
): Handle | null {
  let best: Handle | null = null;
  let bestDist = tolerance;
  for (const h of handlePositions(e)) {
    const d = Math.hypot(px - h.x, py - h.y);
    if (d <= bestDist) {
      best = h;
      bestDist = d;
    }
  }
  return best;
}

export function normalizeTheta(theta: number): number {
  const pi = Math.PI;
  let t = theta % pi;
  if (t < 0) t += pi;
  return t;
}
