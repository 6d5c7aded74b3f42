import { ApiError, fetchHit, fetchInstructions, imageUrl, submitHit } from "./api.js";
import { EllipseTool } from "./ellipseTool.js";
import { Session } from "./session.js";
import { ZOOM, areaReadout, progressLabel, renderImage } from "./view.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function newIdempotencyKey(): string {
  if (typeof crypto !== "undefined" && crypto.randomUUID) return crypto.randomUUID();
  return `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

class App {
  private session: Session | null = null;
  private tool: EllipseTool | null = null;
  private images = new Map<string, HTMLImageElement>();
  private idempotencyKey = newIdempotencyKey();

  private canvas = el<HTMLCanvasElement>("annotator-canvas");
  private banner = el<HTMLDivElement>("banner");
  private areaBox = el<HTMLDivElement>("area-readout");
  private progress = el<HTMLSpanElement>("progress");

  constructor(private workerId: string) {}

  async start(): Promise<void> {
    const instructions = await fetchInstructions();
    el<HTMLPreElement>("instructions-text").textContent = instructions;
    el<HTMLButtonElement>("ack-button").addEventListener("click", () => {
      void this.loadHit();
    });
    el<HTMLButtonElement>("prev-button").addEventListener("click", () => this.step(-1));
    el<HTMLButtonElement>("next-button").addEventListener("click", () => this.step(1));
    el<HTMLButtonElement>("delete-button").addEventListener("click", () => this.deleteSelected());
    el<HTMLButtonElement>("no-airway-button").addEventListener("click", () => this.markNoAirway());
    el<HTMLButtonElement>("submit-button").addEventListener("click", () => {
      void this.submit();
    });
  }

  private async loadHit(): Promise<void> {
    const hit = await fetchHit(this.workerId);
    el<HTMLDivElement>("instructions-screen").hidden = true;
    if (!hit) {
      this.showBanner("No HITs available right now — thanks for checking in.", "info");
      return;
    }
    this.session = new Session(this.workerId, hit);
    this.idempotencyKey = newIdempotencyKey();
    this.tool = new EllipseTool(
      () => this.session!.ellipsesFor(this.session!.currentImageId),
      (e) => this.session!.addEllipse(this.session!.currentImageId, e),
      () => ZOOM,
      () => this.redraw(),
    );
    this.tool.attach(this.canvas);
    el<HTMLDivElement>("annotator-screen").hidden = false;
    for (const id of hit.image_ids) {
      const img = new Image();
      img.onload = () => this.redraw();
      img.src = imageUrl(id);
      this.images.set(id, img);
    }
    this.redraw();
  }

  private step(delta: number): void {
    if (!this.session || !this.tool) return;
    if (delta > 0) this.session.next();
    else this.session.prev();
    this.tool.selected = null;
    this.redraw();
  }

  private deleteSelected(): void {
    if (!this.session || !this.tool) return;
    const imageId = this.session.currentImageId;
    this.tool.deleteSelected((e) => this.session!.removeEllipse(imageId, e));
  }

  private markNoAirway(): void {
    if (!this.session || !this.tool) return;
    this.session.markNoAirway(this.session.currentImageId);
    this.tool.selected = null;
    this.redraw();
  }

  private async submit(): Promise<void> {
    if (!this.session) return;
    if (!this.session.isComplete()) {
      this.showBanner("Every image needs at least one ellipse or a no-airway mark.", "error");
      return;
    }
    const singles = this.session.singleEllipseWarnings();
    if (singles.length > 0) {
      this.showBanner(
        `Reminder: ${singles.length} image(s) have a single ellipse — ` +
          "a measurement needs both the dark hole and the bright ring.",
        "warn",
      );
    }
    try {
      const payload = this.session.buildPayload(this.idempotencyKey);
      await submitHit(this.session.hit.hit_id, payload);
      this.showBanner("Submitted — loading your next HIT…", "info");
      this.session = null;
      this.images.clear();
      await this.loadHit();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.showBanner("This HIT was already submitted under your worker id.", "error");
      } else if (err instanceof ApiError) {
        this.showBanner(`Submit rejected (${err.status}): ${err.message}`, "error");
      } else {
        this.showBanner(`Submit failed: ${(err as Error).message}`, "error");
      }
    }
  }

  private showBanner(text: string, kind: "info" | "warn" | "error"): void {
    this.banner.textContent = text;
    this.banner.className = `banner banner-${kind}`;
    this.banner.hidden = false;
  }

  private redraw(): void {
    if (!this.session) return;
    const imageId = this.session.currentImageId;
    const ellipses = this.session.ellipsesFor(imageId);
    renderImage(this.canvas, this.images.get(imageId) ?? null, ellipses, this.tool?.selected ?? null);
    this.areaBox.textContent = areaReadout(ellipses);
    this.progress.textContent = progressLabel(this.session);
    el<HTMLButtonElement>("submit-button").disabled = !this.session.isComplete();
    el<HTMLSpanElement>("no-airway-state").textContent = this.session.isNoAirway(imageId)
      ? "marked: no airway"
      : "";
  }
}

export function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const workerId = params.get("worker") ?? `anon-${Math.random().toString(36).slice(2, 10)}`;
  const app = new App(workerId);
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("annotator-canvas")) {
  bootstrap();
}
