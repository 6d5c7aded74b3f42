import { HitDescriptor, Submission } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export async function fetchHit(workerId: string): Promise<HitDescriptor | null> {
  const resp = await fetch(`/api/hit?worker=${encodeURIComponent(workerId)}`);
  if (resp.status === 204) return null;
  if (!resp.ok) throw new ApiError(resp.status, `could not fetch HIT (${resp.status})`);
  return (await resp.json()) as HitDescriptor;
}

export async function fetchInstructions(): Promise<string> {
  const resp = await fetch("/api/instructions");
  if (!resp.ok) throw new ApiError(resp.status, "could not fetch instructions");
  return resp.text();
}

export function imageUrl(imageId: string): string {
  return `/api/image/${encodeURIComponent(imageId)}.png`;
}

export async function submitHit(hitId: string, body: Submission): Promise<void> {
  const resp = await fetch(`/api/hit/${encodeURIComponent(hitId)}/submit`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) {
    let detail = "";
    try {
      detail = ((await resp.json()) as { error?: string }).error ?? "";
    } catch {
      // non-JSON error body
    }
    throw new ApiError(resp.status, detail || `submit failed (${resp.status})`);
  }
}
