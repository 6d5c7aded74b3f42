"""Area measurement from paired ellipses and per-image median aggregation.

Areas are computed analytically (pi * rx * ry), in squared pixels of the
slice images; multiply by sample_step_mm squared for mm².
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass
from pathlib import Path

from .qc import PairedAnnotation, QcCategory
from .store import Ellipse


class MeasurementError(Exception):
    pass


@dataclass(frozen=True)
class AirwayMeasurement:
    annotation_id: str
    image_id: str
    worker_id: str
    lumen_area: float  # pixel²
    wall_area: float   # pixel²


@dataclass(frozen=True)
class AggregateConfig:
    min_annotations: int = 3

    def __post_init__(self):
        if self.min_annotations < 1:
            raise ValueError("min_annotations must be >= 1")


@dataclass(frozen=True)
class AggregatedMeasurement:
    image_id: str
    n_used: int
    lumen_area_median: float
    wall_area_median: float


def ellipse_area(e: Ellipse) -> float:
    """pi * rx * ry; independent of center and rotation."""
    if e.rx <= 0 or e.ry <= 0:
        raise MeasurementError(f"non-positive radius: rx={e.rx}, ry={e.ry}")
    return math.pi * e.rx * e.ry


def measure(pa: PairedAnnotation, include_multi: bool = False) -> AirwayMeasurement:
    """Lumen/wall areas of one usable annotation.

    Multi-pair annotations are excluded unless include_multi is set, in
    which case the pair with the largest lumen is used.
    """
    if pa.category is QcCategory.SINGLE_PAIR:
        inner, outer = pa.pairs[0]
    elif pa.category is QcCategory.MULTI_PAIR:
        if not include_multi:
            raise MeasurementError(
                f"annotation {pa.annotation_id} has {pa.n_pairs} pairs; "
                "multi-pair measurement is disabled by default"
            )
        inner, outer = max(pa.pairs, key=lambda p: ellipse_area(p[0]))
    else:
        raise MeasurementError(
            f"annotation {pa.annotation_id} is not usable ({pa.category.value})"
        )
    return AirwayMeasurement(
        annotation_id=pa.annotation_id,
        image_id=pa.image_id,
        worker_id=pa.worker_id,
        lumen_area=ellipse_area(inner),
        wall_area=ellipse_area(outer),
    )


def measure_all(paired: list[PairedAnnotation],
                include_multi: bool = False) -> list[AirwayMeasurement]:
    """Measure every eligible annotation, skipping multi-pair unless enabled."""
    out = []
    for pa in paired:
        if pa.category is QcCategory.MULTI_PAIR and not include_multi:
            continue
        out.append(measure(pa, include_multi=include_multi))
    return out


def aggregate_image(measurements: list[AirwayMeasurement],
                    config: AggregateConfig = AggregateConfig()
                    ) -> AggregatedMeasurement | None:
    """Independent medians of lumen and wall areas for one image.

    Returns None when fewer than min_annotations measurements exist.
    """
    if not measurements:
        return None
    image_ids = {m.image_id for m in measurements}
    if len(image_ids) != 1:
        raise MeasurementError(f"mixed image ids in aggregate: {sorted(image_ids)}")
    if len(measurements) < config.min_annotations:
        return None
    return AggregatedMeasurement(
        image_id=measurements[0].image_id,
        n_used=len(measurements),
        lumen_area_median=statistics.median(m.lumen_area for m in measurements),
        wall_area_median=statistics.median(m.wall_area for m in measurements),
    )


def aggregate_all(measurements: list[AirwayMeasurement],
                  config: AggregateConfig = AggregateConfig()
                  ) -> list[AggregatedMeasurement]:
    by_image: dict[str, list[AirwayMeasurement]] = {}
    for m in measurements:
        by_image.setdefault(m.image_id, []).append(m)
    out = []
    for image_id in sorted(by_image):
        agg = aggregate_image(by_image[image_id], config)
        if agg is not None:
            out.append(agg)
    return out


def write_measurements(measurements: list[AirwayMeasurement], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["annotation_id", "image_id", "worker_id",
                    "lumen_area_px2", "wall_area_px2"])
        for m in measurements:
            w.writerow([m.annotation_id, m.image_id, m.worker_id,
                        repr(m.lumen_area), repr(m.wall_area)])


def read_measurements(path) -> list[AirwayMeasurement]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            out.append(AirwayMeasurement(
                annotation_id=row["annotation_id"],
                image_id=row["image_id"],
                worker_id=row["worker_id"],
                lumen_area=float(row["lumen_area_px2"]),
                wall_area=float(row["wall_area_px2"]),
            ))
    return out


def write_aggregates(aggregates: list[AggregatedMeasurement], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["image_id", "n_used", "lumen_median_px2", "wall_median_px2"])
        for a in aggregates:
            w.writerow([a.image_id, a.n_used,
                        repr(a.lumen_area_median), repr(a.wall_area_median)])


def read_aggregates(path) -> list[AggregatedMeasurement]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            out.append(AggregatedMeasurement(
                image_id=row["image_id"],
                n_used=int(row["n_used"]),
                lumen_area_median=float(row["lumen_median_px2"]),
                wall_area_median=float(row["wall_median_px2"]),
            ))
    return out
