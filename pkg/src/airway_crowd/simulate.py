"""Synthetic annotation campaigns from parameterized worker-behavior profiles.

Lets the whole pipeline (QC, measurement, aggregation, evaluation) run
end-to-end without human workers. Profiles cover the observed failure
modes: careful annotators with multiplicative sizing noise, single-ellipse
submitters, spammers, workers outlining nearby vessels, and workers
flagging "no airway".
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from .reslice import ManifestEntry
from .store import AnnotationRecord, Ellipse
from .volume import AirwaySite

CONSCIENTIOUS = "conscientious"
SINGLE_ELLIPSE = "single_ellipse"
SPAMMER = "spammer"
VESSEL = "vessel"
NO_AIRWAY = "no_airway"

PROFILE_KINDS = (CONSCIENTIOUS, SINGLE_ELLIPSE, SPAMMER, VESSEL, NO_AIRWAY)


@dataclass(frozen=True)
class WorkerProfile:
    kind: str
    sigma: float = 0.15      # relative noise (conscientious)
    p_adjust: float = 0.5    # chance a single-ellipse worker adjusts it
    offset: float = 12.0     # pixels, vessel-annotator translation
    p_empty: float = 0.5     # chance a spammer submits nothing at all

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 0.0 <= self.p_adjust <= 1.0:
            raise ValueError("p_adjust must be in [0, 1]")


@dataclass(frozen=True)
class ImageTruth:
    image_id: str
    airway_visible: bool
    true_lumen: Ellipse | None = None
    true_wall: Ellipse | None = None

    def __post_init__(self):
        if self.airway_visible:
            la = math.pi * self.true_lumen.rx * self.true_lumen.ry
            wa = math.pi * self.true_wall.rx * self.true_wall.ry
            if la >= wa:
                raise ValueError("true lumen area must be below wall area")


def truth_from_site(entry: ManifestEntry, site: AirwaySite,
                    side: int = 50) -> ImageTruth:
    """Concentric circles matching the expert areas, centered in the image.

    The slice grid is centered on the airway by construction, so the image
    center is the best available stand-in for pixel ground truth.
    """
    c = (side - 1) / 2.0
    step = entry.sample_step_mm
    r_lumen = math.sqrt(site.expert_lumen_area / math.pi) / step
    r_wall = math.sqrt(site.expert_wall_area / math.pi) / step
    return ImageTruth(
        image_id=entry.image_id,
        airway_visible=True,
        true_lumen=Ellipse(cx=c, cy=c, rx=r_lumen, ry=r_lumen, adjusted=True,
                           kind_hint="lumen"),
        true_wall=Ellipse(cx=c, cy=c, rx=r_wall, ry=r_wall, adjusted=True,
                          kind_hint="wall"),
    )


def _rng_for(seed: int, image_id: str, worker_id: str) -> np.random.Generator:
    # crc32 keeps the stream stable across processes (unlike hash()).
    return np.random.default_rng([
        seed, zlib.crc32(image_id.encode()), zlib.crc32(worker_id.encode()),
    ])


def _noisy_ellipse(e: Ellipse, sigma: float, rng, kind_hint: str) -> Ellipse:
    rx = e.rx * rng.lognormal(0.0, sigma) if sigma > 0 else e.rx
    ry = e.ry * rng.lognormal(0.0, sigma) if sigma > 0 else e.ry
    r_mean = (e.rx + e.ry) / 2.0
    jitter = sigma * r_mean
    cx = e.cx + (rng.normal(0.0, jitter) if jitter > 0 else 0.0)
    cy = e.cy + (rng.normal(0.0, jitter) if jitter > 0 else 0.0)
    return Ellipse(cx=cx, cy=cy, rx=rx, ry=ry, adjusted=True, kind_hint=kind_hint)


def simulate_worker(profile: WorkerProfile, truth: ImageTruth,
                    worker_id: str, hit_id: str = "sim",
                    annotation_id: str | None = None,
                    seed: int = 0,
                    submitted_at: str = "2016-01-01T00:00:00Z") -> AnnotationRecord:
    """One synthetic submission; deterministic per (seed, image_id, worker_id)."""
    rng = _rng_for(seed, truth.image_id, worker_id)
    lumen, wall = truth.true_lumen, truth.true_wall

    if profile.kind == CONSCIENTIOUS and truth.airway_visible:
        ellipses = (
            _noisy_ellipse(lumen, profile.sigma, rng, "lumen"),
            _noisy_ellipse(wall, profile.sigma, rng, "wall"),
        )
    elif profile.kind == SINGLE_ELLIPSE and truth.airway_visible:
        e = _noisy_ellipse(lumen, max(profile.sigma, 0.05), rng, "unspecified")
        adjusted = bool(rng.random() < profile.p_adjust)
        ellipses = (Ellipse(cx=e.cx, cy=e.cy, rx=e.rx, ry=e.ry,
                            adjusted=adjusted),)
    elif profile.kind == SPAMMER:
        if rng.random() < profile.p_empty:
            ellipses = ()
        else:
            # untouched default-spawned ellipse somewhere mid-image
            ellipses = (Ellipse(cx=float(rng.uniform(10, 40)),
                                cy=float(rng.uniform(10, 40)),
                                rx=5.0, ry=5.0, adjusted=False),)
    elif profile.kind == VESSEL and truth.airway_visible:
        angle = rng.uniform(0, 2 * math.pi)
        dx = profile.offset * math.cos(angle)
        dy = profile.offset * math.sin(angle)
        ellipses = tuple(
            Ellipse(cx=e.cx + dx, cy=e.cy + dy, rx=e.rx, ry=e.ry,
                    adjusted=True, kind_hint=e.kind_hint)
            for e in (lumen, wall)
        )
    else:
        # NO_AIRWAY profile, or nothing visible to annotate: corner circle
        ellipses = (Ellipse(cx=2.0, cy=2.0, rx=2.0, ry=2.0, adjusted=True),)

    if annotation_id is None:
        annotation_id = f"{truth.image_id}_{worker_id}"
    return AnnotationRecord(
        annotation_id=annotation_id,
        image_id=truth.image_id,
        worker_id=worker_id,
        hit_id=hit_id,
        submitted_at=submitted_at,
        ellipses=ellipses,
        client_info=f"sim:{profile.kind}",
    )


def simulate_campaign(truths: list[ImageTruth],
                      profiles_mixture: list[tuple[WorkerProfile, float]],
                      n_per_image: int, seed: int = 0) -> list[AnnotationRecord]:
    """n_per_image annotations per image, profile kinds drawn per mixture.

    Distinct synthetic worker ids per image slot; fully deterministic for a
    fixed seed (timestamps are synthetic).
    """
    weights = [w for _, w in profiles_mixture]
    if not profiles_mixture or any(w < 0 for w in weights) \
            or abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("mixture weights must be non-negative and sum to 1")

    rng = np.random.default_rng(seed)
    profiles = [p for p, _ in profiles_mixture]
    records = []
    for truth in truths:
        choices = rng.choice(len(profiles), size=n_per_image, p=weights)
        for slot, pick in enumerate(choices):
            worker_id = f"sim_w{slot:03d}"
            records.append(simulate_worker(
                profiles[pick], truth, worker_id=worker_id, seed=seed,
                submitted_at=f"2016-01-01T00:{slot:02d}:00Z",
            ))
    return records


def parse_mixture(text: str, sigma: float = 0.15) -> list[tuple[WorkerProfile, float]]:
    """Parse e.g. "conscientious:0.7,single_ellipse:0.15,spammer:0.15"."""
    mixture = []
    for part in text.split(","):
        kind, _, weight = part.strip().partition(":")
        mixture.append((WorkerProfile(kind=kind, sigma=sigma), float(weight)))
    return mixture
