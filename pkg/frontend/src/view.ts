import { ellipseArea, handlePositions, imageToCanvas } from "./geometry.js";
import { Session } from "./session.js";
import { EllipseDraft, IMAGE_SIDE } from "./types.js";

export const ZOOM = 8; // >= 8x so voxel structure stays visible

/**
 * Draw the 50x50 image nearest-neighbor upscaled, with the ellipse overlay
 * in image-pixel coordinates regardless of zoom.
 */
export function renderImage(
  canvas: HTMLCanvasElement,
  image: HTMLImageElement | null,
  ellipses: EllipseDraft[],
  selected: EllipseDraft | null,
  zoom: number = ZOOM,
): void {
  canvas.width = IMAGE_SIDE * zoom;
  canvas.height = IMAGE_SIDE * zoom;
  const ctx = canvas.getContext("2d");
  if (!ctx) return; // non-browser environment
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (image) {
    ctx.drawImage(image, 0, 0, canvas.width, canvas.height);
  } else {
    ctx.fillStyle = "#222";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
  }

  for (const e of ellipses) {
    const c = imageToCanvas(e.cx, e.cy, zoom);
    ctx.strokeStyle = e === selected ? "#ffd166" : "#06d6a0";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.ellipse(c.x, c.y, e.rx * zoom, e.ry * zoom, e.theta, 0, 2 * Math.PI);
    ctx.stroke();
    if (e === selected) {
      ctx.fillStyle = "#ffd166";
      for (const h of handlePositions(e)) {
        const p = imageToCanvas(h.x, h.y, zoom);
        ctx.beginPath();
        ctx.arc(p.x, p.y, 4, 0, 2 * Math.PI);
        ctx.fill();
      }
    }
  }
}

/** Human-readable area readout for the current drafts (pixel^2). */
export function areaReadout(ellipses: EllipseDraft[]): string {
  if (ellipses.length === 0) return "no ellipses yet";
  return ellipses
    .map((e, i) => `ellipse ${i + 1}: ${ellipseArea(e).toFixed(2)} px²`)
    .join("  •  ");
}

export function progressLabel(session: Session): string {
  const total = session.hit.image_ids.length;
  const answered = session.hit.image_ids.filter((id) => session.isAnswered(id)).length;
  return `image ${session.index + 1} / ${total} — ${answered} answered`;
}
