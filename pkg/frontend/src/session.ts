import {
  EllipseDraft,
  HitDescriptor,
  Submission,
  submissionSchema,
} from "./types.js";

/** The "no airway visible" convention: a small circle in the image corner. */
export function cornerCircle(): EllipseDraft {
  return { cx: 2, cy: 2, rx: 2, ry: 2, theta: 0, adjusted: true, kind_hint: "unspecified" };
}

/**
 * One worker's pass through a HIT: per-image draft ellipse lists plus the
 * current image index. Submission is only enabled once every image has at
 * least one ellipse or an explicit no-airway mark.
 */
export class Session {
  readonly workerId: string;
  readonly hit: HitDescriptor;
  index = 0;
  private drafts = new Map<string, EllipseDraft[]>();
  private noAirwayMarked = new Set<string>();

  constructor(workerId: string, hit: HitDescriptor) {
    this.workerId = workerId;
    this.hit = hit;
    for (const id of hit.image_ids) this.drafts.set(id, []);
  }

  get currentImageId(): string {
    return this.hit.image_ids[this.index];
  }

  ellipsesFor(imageId: string): EllipseDraft[] {
    const list = this.drafts.get(imageId);
    if (!list) throw new Error(`image ${imageId} is not part of this HIT`);
    return list;
  }

  isNoAirway(imageId: string): boolean {
    return this.noAirwayMarked.has(imageId);
  }

  /** Adding an ellipse removes a prior no-airway mark first. */
  addEllipse(imageId: string, ellipse: EllipseDraft): void {
    if (this.noAirwayMarked.has(imageId)) {
      this.noAirwayMarked.delete(imageId);
      this.drafts.set(imageId, []);
    }
    this.ellipsesFor(imageId).push(ellipse);
  }

  removeEllipse(imageId: string, ellipse: EllipseDraft): void {
    const list = this.ellipsesFor(imageId);
    const i = list.indexOf(ellipse);
    if (i >= 0) list.splice(i, 1);
    if (list.length === 0) this.noAirwayMarked.delete(imageId);
  }

  /** Replace all drafts with the corner circle and lock the image as answered. */
  markNoAirway(imageId: string): void {
    this.drafts.set(imageId, [cornerCircle()]);
    this.noAirwayMarked.add(imageId);
  }

  isAnswered(imageId: string): boolean {
    return this.ellipsesFor(imageId).length > 0;
  }

  isComplete(): boolean {
    return this.hit.image_ids.every((id) => this.isAnswered(id));
  }

  /** Images answered with exactly one ellipse and no no-airway mark. */
  singleEllipseWarnings(): string[] {
    return this.hit.image_ids.filter(
      (id) => this.ellipsesFor(id).length === 1 && !this.isNoAirway(id),
    );
  }

  next(): void {
    if (this.index < this.hit.image_ids.length - 1) this.index += 1;
  }

  prev(): void {
    if (this.index > 0) this.index -= 1;
  }

  /**
   * Build and validate the submission payload. The schema check mirrors the
   * server's, so a payload that parses here can never come back as 422.
   */
  buildPayload(idempotencyKey?: string): Submission {
    if (!this.isComplete()) {
      throw new Error("cannot submit: not every image is answered");
    }
    const payload: Submission = {
      worker_id: this.workerId,
      annotations: this.hit.image_ids.map((id) => ({
        image_id: id,
        ellipses: this.ellipsesFor(id).map((e) => ({ ...e })),
      })),
      idempotency_key: idempotencyKey,
      client_info: `instructions=${this.hit.instructions_version}`,
    };
    return submissionSchema.parse(payload);
  }
}
