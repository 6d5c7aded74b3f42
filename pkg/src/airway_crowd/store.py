"""HIT packaging and durable annotation storage.

Annotations are persisted as a newline-delimited JSON append-only log, one
record per line, fsynced before a submission is acknowledged. The log is
human-inspectable and the single source of truth; all in-memory indexes are
rebuilt from it on open.
"""

from __future__ import annotations

import json
import math
import os
import random
import threading
from dataclasses import dataclass
from pathlib import Path

KIND_HINTS = ("lumen", "wall", "unspecified")


def _finite(x: float) -> bool:
    return math.isfinite(x)


class StoreError(Exception):
    pass


class UnknownHitError(StoreError):
    pass


class DuplicateSubmissionError(StoreError):
    pass


class SubmissionMismatchError(StoreError):
    """Annotation list does not cover exactly the HIT's images."""


@dataclass(frozen=True)
class HitConfig:
    images_per_hit: int = 10
    reward_label: str = "$0.10"  # informational only
    annotations_per_image_target: int = 10
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.images_per_hit < 1:
            raise ValueError("images_per_hit must be >= 1")
        if self.annotations_per_image_target < 1:
            raise ValueError("annotations_per_image_target must be >= 1")


@dataclass(frozen=True)
class Hit:
    hit_id: str
    image_ids: tuple[str, ...]


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    rx: float
    ry: float
    theta: float = 0.0          # radians, rotation of the rx-axis, in [0, pi)
    adjusted: bool = False
    kind_hint: str = "unspecified"

    def __post_init__(self):
        # Zero radii are representable so QC can classify them as degenerate;
        # measurement rejects them.
        if self.rx < 0 or self.ry < 0:
            raise ValueError(f"ellipse radii must be non-negative: rx={self.rx}, ry={self.ry}")
        if not all(map(_finite, (self.cx, self.cy, self.rx, self.ry, self.theta))):
            raise ValueError("ellipse parameters must be finite")
        if self.kind_hint not in KIND_HINTS:
            raise ValueError(f"unknown kind_hint {self.kind_hint!r}")

    def to_dict(self) -> dict:
        return {
            "cx": self.cx, "cy": self.cy, "rx": self.rx, "ry": self.ry,
            "theta": self.theta, "adjusted": self.adjusted,
            "kind_hint": self.kind_hint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Ellipse":
        return cls(
            cx=float(d["cx"]), cy=float(d["cy"]),
            rx=float(d["rx"]), ry=float(d["ry"]),
            theta=float(d.get("theta", 0.0)),
            adjusted=bool(d.get("adjusted", False)),
            kind_hint=d.get("kind_hint", "unspecified"),
        )


@dataclass(frozen=True)
class AnnotationRecord:
    annotation_id: str
    image_id: str
    worker_id: str
    hit_id: str
    submitted_at: str  # RFC 3339 UTC
    ellipses: tuple[Ellipse, ...]
    client_info: str = ""

    def to_dict(self) -> dict:
        d = {
            "annotation_id": self.annotation_id,
            "image_id": self.image_id,
            "worker_id": self.worker_id,
            "hit_id": self.hit_id,
            "submitted_at": self.submitted_at,
            "ellipses": [e.to_dict() for e in self.ellipses],
        }
        if self.client_info:
            d["client_info"] = self.client_info
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        return cls(
            annotation_id=d["annotation_id"],
            image_id=d["image_id"],
            worker_id=d["worker_id"],
            hit_id=d["hit_id"],
            submitted_at=d["submitted_at"],
            ellipses=tuple(Ellipse.from_dict(e) for e in d["ellipses"]),
            client_info=d.get("client_info", ""),
        )


def make_hits(image_ids: list[str], config: HitConfig = HitConfig()) -> list[Hit]:
    """Shuffle images by the configured seed and chunk into HITs.

    The last HIT may be short. Deterministic for a fixed seed.
    """
    if not image_ids:
        raise StoreError("no image ids to package")
    if len(set(image_ids)) != len(image_ids):
        raise StoreError("duplicate image ids")

    shuffled = list(image_ids)
    random.Random(config.shuffle_seed).shuffle(shuffled)
    hits = []
    n = config.images_per_hit
    for start in range(0, len(shuffled), n):
        chunk = shuffled[start:start + n]
        hits.append(Hit(hit_id=f"hit{start // n:04d}", image_ids=tuple(chunk)))
    return hits


def write_hit_manifest(hits: list[Hit], path) -> None:
    payload = {h.hit_id: list(h.image_ids) for h in hits}
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def read_hit_manifest(path) -> list[Hit]:
    payload = json.loads(Path(path).read_text())
    return [Hit(hit_id=k, image_ids=tuple(v)) for k, v in sorted(payload.items())]


class TaskStore:
    """Assigns HITs to workers and appends submissions to the annotation log.

    Single serialized writer; a submission is either fully on disk (all its
    records, fsynced) before the ack, or absent.
    """

    def __init__(self, hits: list[Hit], log_path, config: HitConfig = HitConfig()):
        self.hits = {h.hit_id: h for h in hits}
        self.config = config
        self.log_path = Path(log_path)
        self.image_ids = [img for h in hits for img in h.image_ids]
        self._lock = threading.Lock()
        self._by_image: dict[str, list[AnnotationRecord]] = {i: [] for i in self.image_ids}
        self._submitted: dict[tuple[str, str], str | None] = {}  # (hit, worker) -> idem key
        self._replay_log()

    def _replay_log(self):
        if not self.log_path.exists():
            return
        with self.log_path.open(encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                rec = AnnotationRecord.from_dict(json.loads(line))
                self._index(rec)

    def _index(self, rec: AnnotationRecord):
        self._by_image.setdefault(rec.image_id, []).append(rec)
        self._submitted.setdefault((rec.hit_id, rec.worker_id), None)

    def annotation_count(self, image_id: str) -> int:
        return len(self._by_image.get(image_id, []))

    def _hit_open(self, hit: Hit) -> bool:
        """A HIT still needs work if any of its images is below target."""
        target = self.config.annotations_per_image_target
        return any(self.annotation_count(i) < target for i in hit.image_ids)

    def assign_hit(self, worker_id: str) -> Hit | None:
        """Pick an unsubmitted HIT for this worker, least-annotated images first."""
        with self._lock:
            candidates = [
                h for h in self.hits.values()
                if (h.hit_id, worker_id) not in self._submitted and self._hit_open(h)
            ]
            if not candidates:
                return None
            candidates.sort(
                key=lambda h: (min(self.annotation_count(i) for i in h.image_ids),
                               h.hit_id)
            )
            return candidates[0]

    def record_submission(self, hit_id: str, worker_id: str,
                          annotations: list[AnnotationRecord],
                          idempotency_key: str | None = None) -> None:
        """Durably append one full-HIT submission. First write wins; a retry
        carrying the same idempotency key is acknowledged without duplication.
        """
        with self._lock:
            hit = self.hits.get(hit_id)
            if hit is None:
                raise UnknownHitError(f"unknown hit {hit_id!r}")

            key = (hit_id, worker_id)
            if key in self._submitted:
                if idempotency_key is not None and self._submitted[key] == idempotency_key:
                    return  # idempotent retry
                raise DuplicateSubmissionError(
                    f"worker {worker_id!r} already submitted hit {hit_id!r}"
                )

            got = sorted(a.image_id for a in annotations)
            want = sorted(hit.image_ids)
            if got != want:
                raise SubmissionMismatchError(
                    f"submission must cover exactly the HIT images: got {got}, want {want}"
                )
            for a in annotations:
                if a.hit_id != hit_id or a.worker_id != worker_id:
                    raise SubmissionMismatchError(
                        "record hit/worker fields disagree with the submission"
                    )

            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with self.log_path.open("a", encoding="utf-8") as f:
                for a in annotations:
                    f.write(json.dumps(a.to_dict(), sort_keys=True) + "\n")
                f.flush()
                os.fsync(f.fileno())

            for a in annotations:
                self._by_image.setdefault(a.image_id, []).append(a)
            self._submitted[key] = idempotency_key

    def list_annotations(self, image_id: str) -> list[AnnotationRecord]:
        if image_id not in self._by_image:
            raise StoreError(f"unknown image id {image_id!r}")
        return list(self._by_image[image_id])

    def all_annotations(self) -> list[AnnotationRecord]:
        if not self.log_path.exists():
            return []
        return read_annotation_log(self.log_path)

    def stats(self) -> dict:
        per_image = {i: self.annotation_count(i) for i in self.image_ids}
        return {
            "images_total": len(self.image_ids),
            "annotations_total": sum(per_image.values()),
            "per_image_counts": per_image,
        }


def read_annotation_log(path) -> list[AnnotationRecord]:
    """Parse a newline-delimited JSON annotation log."""
    records = []
    with Path(path).open(encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(AnnotationRecord.from_dict(json.loads(line)))
    return records


def write_annotation_log(records: list[AnnotationRecord], path) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
