import numpy as np
import pytest

from airway_crowd.store import AnnotationRecord, Ellipse
from airway_crowd.volume import CtVolume


def make_record(annotation_id, ellipses, image_id="img0", worker_id="w0",
                hit_id="h0"):
    return AnnotationRecord(
        annotation_id=annotation_id,
        image_id=image_id,
        worker_id=worker_id,
        hit_id=hit_id,
        submitted_at="2016-01-01T00:00:00Z",
        ellipses=tuple(ellipses),
    )


def linear_volume(shape=(12, 12, 12), coeffs=(3.0, 2.0, -1.0, 0.0),
                  spacing=(1.0, 1.0, 1.0)):
    """Volume with HU = a*x + b*y + c*z + d (exactly representable in int16)."""
    nz, ny, nx = shape[2], shape[1], shape[0]
    a, b, c, d = coeffs
    zz, yy, xx = np.mgrid[0:nz, 0:ny, 0:nx]
    data = np.round(a * xx + b * yy + c * zz + d).astype(np.int16)
    return CtVolume(data=data, spacing=spacing)


# ---------------------------------------------------------------------------
# Category-labeled annotation fixture shaped like the real campaign outcome:
# 900 records with known construction labels.

def _single_pair_ellipses(k=0):
    return [
        Ellipse(cx=25.0, cy=25.0, rx=3.0 + 0.001 * k, ry=3.0, adjusted=True),
        Ellipse(cx=25.5, cy=25.0, rx=6.0, ry=6.0, adjusted=True),
    ]


def _multi_pair_ellipses(n_pairs):
    anchors = [(8.0, 8.0), (25.0, 25.0), (42.0, 42.0)][:n_pairs]
    ellipses = []
    for cx, cy in anchors:
        ellipses.append(Ellipse(cx=cx, cy=cy, rx=2.0, ry=2.0, adjusted=True))
        ellipses.append(Ellipse(cx=cx + 1.0, cy=cy, rx=4.0, ry=4.0, adjusted=True))
    return ellipses


def build_paper_shaped_fixture():
    """900 labeled records: 133 empty, 244+201 single (adjusted/unadjusted),
    259 single-pair, 25 two-pair, 6 three-pair, 16 odd, 16 too-far.

    Returns (records, labels) where labels maps annotation_id to the
    construction category name.
    """
    from airway_crowd.qc import QcCategory

    spec = [
        (QcCategory.NO_ELLIPSE, 133, lambda k: []),
        (QcCategory.SINGLE_ADJUSTED, 244,
         lambda k: [Ellipse(cx=25.0, cy=20.0, rx=4.0, ry=5.0, adjusted=True)]),
        (QcCategory.SINGLE_UNADJUSTED, 201,
         lambda k: [Ellipse(cx=25.0, cy=30.0, rx=5.0, ry=5.0, adjusted=False)]),
        (QcCategory.SINGLE_PAIR, 259, _single_pair_ellipses),
        (QcCategory.MULTI_PAIR, 25, lambda k: _multi_pair_ellipses(2)),
        (QcCategory.MULTI_PAIR, 6, lambda k: _multi_pair_ellipses(3)),
        (QcCategory.ODD_COUNT, 16,
         lambda k: [Ellipse(cx=20.0 + i, cy=20.0, rx=3.0, ry=3.0, adjusted=True)
                    for i in range(3)]),
        (QcCategory.PAIR_TOO_FAR, 16,
         lambda k: [Ellipse(cx=10.0, cy=10.0, rx=3.0, ry=3.0, adjusted=True),
                    Ellipse(cx=30.0, cy=30.0, rx=6.0, ry=6.0, adjusted=True)]),
    ]
    records, labels = [], {}
    i = 0
    for category, count, build in spec:
        for k in range(count):
            ann_id = f"ann{i:04d}"
            records.append(make_record(
                ann_id, build(k), image_id=f"img{i % 90:03d}",
                worker_id=f"w{i % 37:02d}"))
            labels[ann_id] = category
            i += 1
    assert len(records) == 900
    return records, labels


@pytest.fixture
def paper_shaped_fixture():
    return build_paper_shaped_fixture()
