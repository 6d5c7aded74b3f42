"""Annotation quality control: categorize each submission and pair ellipses.

An annotation is usable when its ellipses form one or more valid
(inner, outer) pairs: even count, every pair's centers within the distance
limit, and unambiguous area ordering within each pair.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .store import AnnotationRecord, Ellipse


@dataclass(frozen=True)
class QcConfig:
    pair_distance_max: float = 10.0  # pixels
    corner_margin: float = 5.0       # pixels, Chebyshev distance from a corner
    corner_radius_max: float = 3.0   # pixels
    image_side: int = 50             # for locating the corners

    def __post_init__(self):
        if self.pair_distance_max <= 0 or self.corner_margin <= 0 \
                or self.corner_radius_max <= 0 or self.image_side <= 0:
            raise ValueError("all QC thresholds must be positive")


class QcCategory(Enum):
    NO_ELLIPSE = "no_ellipse"
    NO_AIRWAY_FLAG = "no_airway_flag"
    SINGLE_UNADJUSTED = "single_unadjusted"
    SINGLE_ADJUSTED = "single_adjusted"
    ODD_COUNT = "odd_count"
    PAIR_TOO_FAR = "pair_too_far"
    DEGENERATE_PAIR = "degenerate_pair"
    SINGLE_PAIR = "single_pair"
    MULTI_PAIR = "multi_pair"


USABLE_CATEGORIES = {QcCategory.SINGLE_PAIR, QcCategory.MULTI_PAIR}


@dataclass(frozen=True)
class PairedAnnotation:
    annotation_id: str
    image_id: str
    worker_id: str
    pairs: tuple[tuple[Ellipse, Ellipse], ...]  # (inner, outer)
    category: QcCategory

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


class PairingError(Exception):
    pass


def _ellipse_area(e: Ellipse) -> float:
    return math.pi * e.rx * e.ry


def _center_distance(a: Ellipse, b: Ellipse) -> float:
    return math.hypot(a.cx - b.cx, a.cy - b.cy)


def detect_no_airway_flag(annotation: AnnotationRecord,
                          config: QcConfig = QcConfig()) -> bool:
    """The "no airway visible" convention: exactly one small circle near a
    corner of the image.
    """
    if len(annotation.ellipses) != 1:
        return False
    e = annotation.ellipses[0]
    if e.rx > config.corner_radius_max or e.ry > config.corner_radius_max:
        return False
    s = config.image_side - 1
    corners = [(0, 0), (0, s), (s, 0), (s, s)]
    return any(
        max(abs(e.cx - x), abs(e.cy - y)) <= config.corner_margin
        for x, y in corners
    )


def _sort_key(e: Ellipse):
    return (e.cx, e.cy, e.rx, e.ry, e.theta)


def pair_ellipses(ellipses: list[Ellipse],
                  config: QcConfig = QcConfig()) -> list[tuple[Ellipse, Ellipse]] | None:
    """Greedy matching by center distance.

    Repeatedly takes the globally closest unmatched pair; ties broken by
    lexicographic center comparison so the result is independent of input
    order. Returns None (PairTooFar) if any matched pair exceeds the
    distance limit; otherwise pairs ordered (smaller area, larger area).
    """
    n = len(ellipses)
    if n == 0 or n % 2 != 0:
        raise PairingError(f"pairing needs an even, nonzero count, got {n}")

    candidates = sorted(
        (
            (_center_distance(ellipses[i], ellipses[j]),
             tuple(sorted((_sort_key(ellipses[i]), _sort_key(ellipses[j])))),
             i, j)
            for i, j in itertools.combinations(range(n), 2)
        )
    )
    matched: set[int] = set()
    pairs = []
    for dist, _, i, j in candidates:
        if i in matched or j in matched:
            continue
        if dist > config.pair_distance_max:
            return None
        matched.add(i)
        matched.add(j)
        a, b = ellipses[i], ellipses[j]
        if _ellipse_area(a) <= _ellipse_area(b):
            pairs.append((a, b))
        else:
            pairs.append((b, a))
        if len(matched) == n:
            break
    pairs.sort(key=lambda p: _sort_key(p[0]))
    return pairs


def analyze(annotation: AnnotationRecord,
            config: QcConfig = QcConfig()) -> PairedAnnotation:
    """Classify one annotation and, when usable, carry its ellipse pairs."""
    ellipses = list(annotation.ellipses)
    pairs: tuple = ()

    if len(ellipses) == 0:
        category = QcCategory.NO_ELLIPSE
    elif detect_no_airway_flag(annotation, config):
        category = QcCategory.NO_AIRWAY_FLAG
    elif len(ellipses) == 1:
        category = (QcCategory.SINGLE_ADJUSTED if ellipses[0].adjusted
                    else QcCategory.SINGLE_UNADJUSTED)
    elif len(ellipses) % 2 != 0:
        category = QcCategory.ODD_COUNT
    else:
        matched = pair_ellipses(ellipses, config)
        if matched is None:
            category = QcCategory.PAIR_TOO_FAR
        elif any(inner.rx == 0 or inner.ry == 0
                 or _ellipse_area(inner) == _ellipse_area(outer)
                 for inner, outer in matched):
            category = QcCategory.DEGENERATE_PAIR
        else:
            pairs = tuple(matched)
            category = (QcCategory.SINGLE_PAIR if len(matched) == 1
                        else QcCategory.MULTI_PAIR)

    return PairedAnnotation(
        annotation_id=annotation.annotation_id,
        image_id=annotation.image_id,
        worker_id=annotation.worker_id,
        pairs=pairs,
        category=category,
    )


def classify(annotation: AnnotationRecord,
             config: QcConfig = QcConfig()) -> QcCategory:
    return analyze(annotation, config).category


def filter_usable(annotations: list[AnnotationRecord],
                  config: QcConfig = QcConfig()
                  ) -> tuple[list[PairedAnnotation], Counter]:
    """Partition annotations into usable pairs and a per-category tally."""
    usable = []
    tally: Counter = Counter({c: 0 for c in QcCategory})
    for ann in annotations:
        pa = analyze(ann, config)
        tally[pa.category] += 1
        if pa.category in USABLE_CATEGORIES:
            usable.append(pa)
    return usable, tally


def write_qc_report(annotations: list[AnnotationRecord], config: QcConfig,
                    csv_path, tally_path) -> Counter:
    """Per-annotation QC rows plus a JSON tally summary."""
    tally: Counter = Counter({c: 0 for c in QcCategory})
    pair_counts: Counter = Counter()
    with Path(csv_path).open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["annotation_id", "image_id", "worker_id", "category",
                    "n_ellipses", "n_pairs"])
        for ann in annotations:
            pa = analyze(ann, config)
            tally[pa.category] += 1
            if pa.category is QcCategory.MULTI_PAIR:
                pair_counts[pa.n_pairs] += 1
            w.writerow([ann.annotation_id, ann.image_id, ann.worker_id,
                        pa.category.value, len(ann.ellipses), pa.n_pairs])

    usable = sum(tally[c] for c in USABLE_CATEGORIES)
    summary = {
        "total": len(annotations),
        "usable": usable,
        "tally": {c.value: tally[c] for c in QcCategory},
        "multi_pair_sizes": {str(k): v for k, v in sorted(pair_counts.items())},
        "thresholds": {
            "pair_distance_max": config.pair_distance_max,
            "corner_margin": config.corner_margin,
            "corner_radius_max": config.corner_radius_max,
        },
    }
    Path(tally_path).write_text(json.dumps(summary, indent=1) + "\n")
    return tally
