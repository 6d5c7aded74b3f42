import json
import math
import random
from collections import Counter

import pytest

from airway_crowd.qc import (PairingError, QcCategory, QcConfig, analyze,
                             classify, detect_no_airway_flag, filter_usable,
                             pair_ellipses, write_qc_report)
from airway_crowd.store import Ellipse

from conftest import build_paper_shaped_fixture, make_record


def ell(cx, cy, r=3.0, r2=None, adjusted=True):
    return Ellipse(cx=cx, cy=cy, rx=r, ry=r2 if r2 is not None else r,
                   adjusted=adjusted)


# --- no-airway flag ---

def test_corner_circle_detected():
    rec = make_record("a", [ell(2, 2, r=2)])
    assert detect_no_airway_flag(rec)


def test_all_four_corners_detected():
    for cx, cy in [(2, 2), (2, 47), (47, 2), (47, 47)]:
        rec = make_record("a", [ell(cx, cy, r=2)])
        assert detect_no_airway_flag(rec), (cx, cy)


def test_center_circle_not_flag():
    rec = make_record("a", [ell(25, 25, r=2)])
    assert not detect_no_airway_flag(rec)


def test_two_corner_ellipses_not_flag():
    rec = make_record("a", [ell(2, 2, r=2), ell(3, 3, r=2)])
    assert not detect_no_airway_flag(rec)


def test_big_corner_ellipse_not_flag():
    rec = make_record("a", [ell(2, 2, r=5)])
    assert not detect_no_airway_flag(rec)


# --- pairing ---

def test_pairing_nearest_centers():
    es = [ell(10, 10), ell(10, 11, r=5), ell(30, 30), ell(31, 30, r=5)]
    pairs = pair_ellipses(es)
    centers = sorted(tuple(sorted(((p[0].cx, p[0].cy), (p[1].cx, p[1].cy))))
                     for p in pairs)
    assert centers == [(((10, 10)), ((10, 11))), (((30, 30)), ((31, 30)))]


def test_pairing_too_far():
    assert pair_ellipses([ell(10, 10), ell(25, 25)]) is None


def test_pairing_inner_is_smaller():
    pairs = pair_ellipses([ell(20, 20, r=6), ell(20, 20, r=3)])
    inner, outer = pairs[0]
    assert inner.rx == 3 and outer.rx == 6


def test_pairing_order_invariant():
    es = [ell(10, 10), ell(12, 10, r=5), ell(30, 30), ell(33, 30, r=5),
          ell(40, 12), ell(40, 14, r=6)]
    base = pair_ellipses(es)
    rng = random.Random(4)
    for _ in range(20):
        shuffled = es[:]
        rng.shuffle(shuffled)
        assert pair_ellipses(shuffled) == base


def test_pairing_scale_invariance():
    es = [ell(5, 5, r=2), ell(6, 5, r=4), ell(15, 15, r=2), ell(17, 15, r=4)]
    base = pair_ellipses(es, QcConfig(pair_distance_max=10))
    s = 3.0
    scaled = [Ellipse(cx=e.cx * s, cy=e.cy * s, rx=e.rx * s, ry=e.ry * s,
                      adjusted=e.adjusted) for e in es]
    scaled_pairs = pair_ellipses(scaled, QcConfig(pair_distance_max=10 * s))
    assert len(scaled_pairs) == len(base)
    for (bi, bo), (si, so) in zip(base, scaled_pairs):
        assert si.cx == pytest.approx(bi.cx * s)
        assert so.cx == pytest.approx(bo.cx * s)


def test_pairing_rejects_odd_or_empty():
    with pytest.raises(PairingError):
        pair_ellipses([])
    with pytest.raises(PairingError):
        pair_ellipses([ell(10, 10)])


# --- classification ---

def test_classify_decision_order():
    assert classify(make_record("a", [])) is QcCategory.NO_ELLIPSE
    assert classify(make_record("a", [ell(2, 2, r=2)])) is QcCategory.NO_AIRWAY_FLAG
    assert classify(make_record("a", [ell(25, 25, adjusted=True)])) \
        is QcCategory.SINGLE_ADJUSTED
    assert classify(make_record("a", [ell(25, 25, adjusted=False)])) \
        is QcCategory.SINGLE_UNADJUSTED
    assert classify(make_record("a", [ell(20, 20), ell(22, 20), ell(30, 30)])) \
        is QcCategory.ODD_COUNT
    assert classify(make_record("a", [ell(10, 10), ell(30, 30)])) \
        is QcCategory.PAIR_TOO_FAR
    assert classify(make_record("a", [ell(25, 25, r=3), ell(25, 25, r=6)])) \
        is QcCategory.SINGLE_PAIR


def test_classify_multi_pair():
    es = [ell(10, 10, r=2), ell(11, 10, r=4), ell(35, 35, r=2), ell(36, 35, r=4)]
    pa = analyze(make_record("a", es))
    assert pa.category is QcCategory.MULTI_PAIR
    assert pa.n_pairs == 2


def test_classify_degenerate_equal_areas():
    assert classify(make_record("a", [ell(25, 25, r=3), ell(26, 25, r=3)])) \
        is QcCategory.DEGENERATE_PAIR


def test_classify_degenerate_zero_radius():
    es = [Ellipse(cx=25, cy=25, rx=0.0, ry=3.0),
          Ellipse(cx=26, cy=25, rx=4.0, ry=4.0)]
    assert classify(make_record("a", es)) is QcCategory.DEGENERATE_PAIR


def test_no_airway_beats_single_adjusted():
    # deliberate "no airway" corner mark must never count as a misunderstanding
    rec = make_record("a", [ell(2, 2, r=2, adjusted=True)])
    assert classify(rec) is QcCategory.NO_AIRWAY_FLAG


def test_usable_pair_invariants():
    records, _ = build_paper_shaped_fixture()
    usable, _ = filter_usable(records)
    cfg = QcConfig()
    for pa in usable:
        for inner, outer in pa.pairs:
            assert math.pi * inner.rx * inner.ry < math.pi * outer.rx * outer.ry
            assert math.hypot(inner.cx - outer.cx, inner.cy - outer.cy) \
                <= cfg.pair_distance_max


# --- filtering ---

def test_filter_usable_paper_shaped(paper_shaped_fixture):
    records, labels = paper_shaped_fixture
    usable, tally = filter_usable(records)
    assert sum(tally.values()) == 900
    assert len(usable) == 290
    assert tally[QcCategory.NO_ELLIPSE] == 133
    assert tally[QcCategory.SINGLE_ADJUSTED] == 244
    assert tally[QcCategory.SINGLE_UNADJUSTED] == 201
    assert tally[QcCategory.SINGLE_PAIR] == 259
    assert tally[QcCategory.MULTI_PAIR] == 31
    # every classification matches the construction label
    for rec in records:
        assert classify(rec) is labels[rec.annotation_id], rec.annotation_id


def test_filter_usable_empty():
    usable, tally = filter_usable([])
    assert usable == []
    assert sum(tally.values()) == 0


def test_classification_deterministic(paper_shaped_fixture):
    records, _ = paper_shaped_fixture
    first = [classify(r) for r in records]
    second = [classify(r) for r in records]
    assert first == second


def test_qc_report_files(tmp_path, paper_shaped_fixture):
    records, _ = paper_shaped_fixture
    tally = write_qc_report(records, QcConfig(), tmp_path / "qc.csv",
                            tmp_path / "tally.json")
    summary = json.loads((tmp_path / "tally.json").read_text())
    assert summary["total"] == 900
    assert summary["usable"] == 290
    assert summary["multi_pair_sizes"] == {"2": 25, "3": 6}
    lines = (tmp_path / "qc.csv").read_text().splitlines()
    assert len(lines) == 901
    assert lines[0] == "annotation_id,image_id,worker_id,category,n_ellipses,n_pairs"
    assert isinstance(tally, Counter)
