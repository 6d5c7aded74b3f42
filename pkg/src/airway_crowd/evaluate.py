"""Expert-vs-crowd comparison: Pearson correlation per evaluation group.

Eight groups: {original orientation, axes-parallel orientations pooled}
x {lumen, wall} x {per-annotation, per-image aggregate}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .measure import AggregatedMeasurement, AirwayMeasurement
from .reslice import ManifestEntry, ViewKind
from .volume import AirwaySite

ORIGINAL = "original"
AXES_PARALLEL = "axes_parallel"
LUMEN = "lumen"
WALL = "wall"
PER_ANNOTATION = "per_annotation"
PER_IMAGE_AGGREGATE = "per_image_aggregate"

GROUPS = [
    (orientation, quantity, level)
    for level in (PER_ANNOTATION, PER_IMAGE_AGGREGATE)
    for orientation in (ORIGINAL, AXES_PARALLEL)
    for quantity in (LUMEN, WALL)
]


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class CorrelationReport:
    orientation_group: str
    quantity: str
    level: str
    n: int
    r: float | None  # None when undefined (n < 2 or constant marginal)
    scatter: tuple[tuple[float, float], ...]  # (expert, worker)


def pearson_r(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    xs = list(map(float, xs))
    ys = list(map(float, ys))
    if len(xs) != len(ys):
        raise EvaluationError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise EvaluationError("need at least 2 samples")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise EvaluationError("correlation undefined for constant input")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def _orientation_group(view: ViewKind) -> str:
    return ORIGINAL if view is ViewKind.ORIGINAL else AXES_PARALLEL


def _make_report(orientation, quantity, level, scatter) -> CorrelationReport:
    r = None
    if len(scatter) >= 2:
        xs = [p[0] for p in scatter]
        ys = [p[1] for p in scatter]
        try:
            r = pearson_r(xs, ys)
        except EvaluationError:
            r = None
    return CorrelationReport(orientation, quantity, level, len(scatter), r,
                             tuple(scatter))


def build_report(measurements: list[AirwayMeasurement],
                 aggregates: list[AggregatedMeasurement],
                 sites: list[AirwaySite],
                 manifest: dict[str, ManifestEntry]) -> list[CorrelationReport]:
    """One CorrelationReport per evaluation group, in GROUPS order.

    Expert areas are looked up through the manifest (image -> site); worker
    values are in pixel², expert in mm² — Pearson r is unaffected by the
    positive scaling between them.
    """
    site_by_id = {s.site_id: s for s in sites}

    def expert_value(image_id: str, quantity: str) -> float:
        entry = manifest.get(image_id)
        if entry is None:
            raise EvaluationError(f"image {image_id!r} missing from manifest")
        site = site_by_id.get(entry.site_id)
        if site is None:
            raise EvaluationError(f"site {entry.site_id!r} unknown")
        return site.expert_lumen_area if quantity == LUMEN else site.expert_wall_area

    scatters: dict[tuple, list] = {g: [] for g in GROUPS}
    for m in measurements:
        orientation = _orientation_group(manifest[m.image_id].view) \
            if m.image_id in manifest else None
        if orientation is None:
            raise EvaluationError(f"image {m.image_id!r} missing from manifest")
        for quantity, worker_value in ((LUMEN, m.lumen_area), (WALL, m.wall_area)):
            scatters[(orientation, quantity, PER_ANNOTATION)].append(
                (expert_value(m.image_id, quantity), worker_value))
    for a in aggregates:
        if a.image_id not in manifest:
            raise EvaluationError(f"image {a.image_id!r} missing from manifest")
        orientation = _orientation_group(manifest[a.image_id].view)
        for quantity, worker_value in ((LUMEN, a.lumen_area_median),
                                       (WALL, a.wall_area_median)):
            scatters[(orientation, quantity, PER_IMAGE_AGGREGATE)].append(
                (expert_value(a.image_id, quantity), worker_value))

    return [_make_report(*g, scatters[g]) for g in GROUPS]


def write_report(reports: list[CorrelationReport], report_path,
                 scatter_dir=None) -> None:
    """Summary CSV plus one scatter CSV per group for external plotting."""
    with Path(report_path).open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["orientation_group", "quantity", "level", "n", "r"])
        for rep in reports:
            w.writerow([rep.orientation_group, rep.quantity, rep.level, rep.n,
                        "undefined" if rep.r is None else repr(rep.r)])
    if scatter_dir is not None:
        scatter_dir = Path(scatter_dir)
        scatter_dir.mkdir(parents=True, exist_ok=True)
        for rep in reports:
            name = f"scatter_{rep.level}_{rep.orientation_group}_{rep.quantity}.csv"
            with (scatter_dir / name).open("w", newline="", encoding="utf-8") as f:
                w = csv.writer(f)
                w.writerow(["expert", "worker"])
                for expert, worker in rep.scatter:
                    w.writerow([repr(expert), repr(worker)])


def read_report(report_path) -> list[dict]:
    with Path(report_path).open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
