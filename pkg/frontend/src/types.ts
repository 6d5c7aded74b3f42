import { z } from "zod";

/** Ellipse in image-pixel coordinates (origin top-left). */
export interface EllipseDraft {
  cx: number;
  cy: number;
  rx: number;
  ry: number;
  /** rotation of the rx-axis in radians, kept in [0, pi) */
  theta: number;
  /** true once the worker modified the default-spawned ellipse */
  adjusted: boolean;
  kind_hint: "lumen" | "wall" | "unspecified";
}

export interface HitDescriptor {
  hit_id: string;
  image_ids: string[];
  instructions_version: string;
}

// Mirrors the server's submission schema so the client can validate before
// sending and never trigger a 422.
export const ellipseSchema = z.object({
  cx: z.number().finite(),
  cy: z.number().finite(),
  rx: z.number().finite().nonnegative(),
  ry: z.number().finite().nonnegative(),
  theta: z.number().finite(),
  adjusted: z.boolean(),
  kind_hint: z.enum(["lumen", "wall", "unspecified"]),
});

export const imageAnnotationSchema = z.object({
  image_id: z.string().min(1),
  ellipses: z.array(ellipseSchema),
});

export const submissionSchema = z.object({
  worker_id: z.string().min(1),
  annotations: z.array(imageAnnotationSchema).min(1),
  idempotency_key: z.string().optional(),
  client_info: z.string().optional(),
});

export type Submission = z.infer<typeof submissionSchema>;

export const IMAGE_SIDE = 50;
export const MIN_RADIUS = 0.5;
export const DEFAULT_RADIUS = 5;
