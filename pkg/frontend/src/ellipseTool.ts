import {
  HandleName,
  canvasToImage,
  hitTestHandles,
  normalizeTheta,
  pointInEllipse,
} from "./geometry.js";
import { EllipseDraft, DEFAULT_RADIUS, MIN_RADIUS } from "./types.js";

const HANDLE_TOLERANCE = 1.5; // image pixels

type DragMode =
  | { kind: "idle" }
  | { kind: "move"; target: EllipseDraft; offX: number; offY: number }
  | { kind: "resize"; target: EllipseDraft; handle: HandleName }
  | { kind: "rotate"; target: EllipseDraft };

/**
 * Pointer-event ellipse editor over one image's draft list.
 *
 * Click on empty space spawns a default ellipse (rx = ry = 5, adjusted =
 * false); dragging the body moves it, dragging an axis handle resizes,
 * dragging the rotate handle rotates. Any modification marks the ellipse
 * adjusted. All geometry is kept in image-pixel coordinates; the zoom
 * factor only affects the canvas mapping.
 */
export class EllipseTool {
  selected: EllipseDraft | null = null;
  private mode: DragMode = { kind: "idle" };
  private moved = false;

  constructor(
    private ellipses: () => EllipseDraft[],
    private addEllipse: (e: EllipseDraft) => void,
    private zoom: () => number,
    private onChange: () => void = () => {},
  ) {}

  attach(canvas: HTMLCanvasElement): void {
    canvas.addEventListener("pointerdown", (ev) => {
      const p = this.eventToImage(canvas, ev);
      this.pointerDown(p.x, p.y);
    });
    canvas.addEventListener("pointermove", (ev) => {
      const p = this.eventToImage(canvas, ev);
      this.pointerMove(p.x, p.y);
    });
    canvas.addEventListener("pointerup", () => this.pointerUp());
  }

  private eventToImage(canvas: HTMLCanvasElement, ev: PointerEvent) {
    const rect = canvas.getBoundingClientRect();
    return canvasToImage(ev.clientX - rect.left, ev.clientY - rect.top, this.zoom());
  }

  pointerDown(x: number, y: number): void {
    this.moved = false;
    // handles of the selected ellipse take priority
    if (this.selected) {
      const handle = hitTestHandles(x, y, this.selected, HANDLE_TOLERANCE);
      if (handle) {
        this.mode =
          handle.name === "rotate"
            ? { kind: "rotate", target: this.selected }
            : { kind: "resize", target: this.selected, handle: handle.name };
        return;
      }
    }
    for (const e of [...this.ellipses()].reverse()) {
      if (pointInEllipse(x, y, e)) {
        this.selected = e;
        this.mode = { kind: "move", target: e, offX: x - e.cx, offY: y - e.cy };
        this.onChange();
        return;
      }
    }
    // empty space: spawn the default ellipse at the click point
    const created: EllipseDraft = {
      cx: x,
      cy: y,
      rx: DEFAULT_RADIUS,
      ry: DEFAULT_RADIUS,
      theta: 0,
      adjusted: false,
      kind_hint: "unspecified",
    };
    this.addEllipse(created);
    this.selected = created;
    this.mode = { kind: "move", target: created, offX: 0, offY: 0 };
    this.onChange();
  }

  pointerMove(x: number, y: number): void {
    const m = this.mode;
    if (m.kind === "idle") return;
    this.moved = true;
    const e = m.kind === "move" || m.kind === "resize" || m.kind === "rotate" ? m.target : null;
    if (!e) return;
    if (m.kind === "move") {
      e.cx = x - m.offX;
      e.cy = y - m.offY;
    } else if (m.kind === "resize") {
      const dx = x - e.cx;
      const dy = y - e.cy;
      const cos = Math.cos(e.theta);
      const sin = Math.sin(e.theta);
      if (m.handle === "rx+" || m.handle === "rx-") {
        e.rx = Math.max(MIN_RADIUS, Math.abs(dx * cos + dy * sin));
      } else {
        e.ry = Math.max(MIN_RADIUS, Math.abs(-dx * sin + dy * cos));
      }
    } else {
      // rotate handle sits on the +ry axis
      e.theta = normalizeTheta(Math.atan2(y - e.cy, x - e.cx) - Math.PI / 2);
    }
    e.adjusted = true;
    this.onChange();
  }

  pointerUp(): void {
    if (this.mode.kind !== "idle" && this.mode.kind !== "move" && this.moved) {
      // resize/rotate already flagged adjusted in pointerMove
    }
    this.mode = { kind: "idle" };
    this.onChange();
  }

  deleteSelected(remove: (e: EllipseDraft) => void): void {
    if (this.selected) {
      remove(this.selected);
      this.selected = null;
      this.onChange();
    }
  }
}
