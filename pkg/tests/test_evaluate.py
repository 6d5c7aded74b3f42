import math

import numpy as np
import pytest

from airway_crowd.evaluate import (AXES_PARALLEL, GROUPS, LUMEN, ORIGINAL,
                                   PER_ANNOTATION, PER_IMAGE_AGGREGATE, WALL,
                                   EvaluationError, build_report, pearson_r,
                                   read_report, write_report)
from airway_crowd.measure import (AggregateConfig, AirwayMeasurement,
                                  aggregate_all)
from airway_crowd.reslice import ManifestEntry, ViewKind
from airway_crowd.volume import AirwaySite


# --- pearson ---

def test_pearson_identity_and_negation():
    xs = [1.0, 2.0, 5.0, 9.0]
    assert pearson_r(xs, xs) == pytest.approx(1.0, abs=1e-12)
    assert pearson_r(xs, [-x for x in xs]) == pytest.approx(-1.0, abs=1e-12)


def test_pearson_matches_direct_formula():
    xs = [1.0, 2.0, 3.0]
    ys = [2.0, 4.0, 6.3]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / n
    sx = math.sqrt(sum((x - mx) ** 2 for x in xs) / n)
    sy = math.sqrt(sum((y - my) ** 2 for y in ys) / n)
    assert pearson_r(xs, ys) == pytest.approx(cov / (sx * sy), abs=1e-12)


def test_pearson_matches_numpy_oracle():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(2, 40))
        xs = rng.normal(size=n)
        ys = rng.normal(size=n)
        expected = np.corrcoef(xs, ys)[0, 1]
        assert pearson_r(xs, ys) == pytest.approx(expected, abs=1e-12)
        assert abs(pearson_r(xs, ys)) <= 1 + 1e-12


def test_pearson_affine_invariance():
    rng = np.random.default_rng(23)
    xs = rng.normal(size=30)
    ys = rng.normal(size=30)
    base = pearson_r(xs, ys)
    assert pearson_r(xs * 0.37**2, ys) == pytest.approx(base, abs=1e-12)
    assert pearson_r(xs, ys * 5.0 + 3.0) == pytest.approx(base, abs=1e-12)


def test_pearson_errors():
    with pytest.raises(EvaluationError):
        pearson_r([1.0], [2.0])
    with pytest.raises(EvaluationError):
        pearson_r([1.0, 2.0], [2.0])
    with pytest.raises(EvaluationError):
        pearson_r([1.0, 1.0], [2.0, 3.0])


# --- report building ---

def make_world(n_sites=10):
    sites = [AirwaySite(f"s{i}", (0, 0, 0), (0, 0, 1.0),
                        10.0 + 3.0 * i, 30.0 + 5.0 * i)
             for i in range(n_sites)]
    manifest = {}
    for s in sites:
        for view in ViewKind:
            image_id = f"{s.site_id}_{view.value}"
            manifest[image_id] = ManifestEntry(
                image_id=image_id, site_id=s.site_id, view=view,
                plane_origin=(0, 0, 0), u=(1, 0, 0), v=(0, 1, 0),
                sample_step_mm=1.0)
    return sites, manifest


def exact_measurements(sites, manifest, workers=3):
    ms = []
    for image_id, entry in manifest.items():
        site = next(s for s in sites if s.site_id == entry.site_id)
        for w in range(workers):
            ms.append(AirwayMeasurement(
                annotation_id=f"{image_id}_w{w}", image_id=image_id,
                worker_id=f"w{w}", lumen_area=site.expert_lumen_area,
                wall_area=site.expert_wall_area))
    return ms


def test_perfect_workers_give_r_one():
    sites, manifest = make_world()
    ms = exact_measurements(sites, manifest)
    aggs = aggregate_all(ms, AggregateConfig(min_annotations=3))
    reports = build_report(ms, aggs, sites, manifest)
    assert len(reports) == 8
    for rep in reports:
        assert rep.n > 0
        assert rep.r == pytest.approx(1.0, abs=1e-9)


def test_group_structure_and_sizes():
    sites, manifest = make_world(n_sites=6)
    ms = exact_measurements(sites, manifest, workers=2)
    reports = build_report(ms, [], sites, manifest)
    by_group = {(r.orientation_group, r.quantity, r.level): r for r in reports}
    assert set(by_group) == set(GROUPS)
    # original: 6 images x 2 workers; axes-parallel: 18 x 2
    assert by_group[(ORIGINAL, LUMEN, PER_ANNOTATION)].n == 12
    assert by_group[(AXES_PARALLEL, WALL, PER_ANNOTATION)].n == 36
    # per-annotation group sizes sum to the measurement count (per quantity)
    total = sum(r.n for r in reports
                if r.level == PER_ANNOTATION and r.quantity == LUMEN)
    assert total == len(ms)
    for rep in reports:
        if rep.level == PER_IMAGE_AGGREGATE:
            assert rep.n == 0 and rep.r is None


def test_aggregation_beats_individual_under_noise():
    # 15% multiplicative noise, 10 workers/image: the median estimate
    # correlates better with the expert than single annotations do
    sites, manifest = make_world(n_sites=15)
    rng = np.random.default_rng(99)
    ms = []
    for image_id, entry in manifest.items():
        if entry.view is not ViewKind.ORIGINAL:
            continue
        site = next(s for s in sites if s.site_id == entry.site_id)
        for w in range(10):
            ms.append(AirwayMeasurement(
                annotation_id=f"{image_id}_w{w}", image_id=image_id,
                worker_id=f"w{w}",
                lumen_area=site.expert_lumen_area * rng.lognormal(0, 0.15),
                wall_area=site.expert_wall_area * rng.lognormal(0, 0.15)))
    aggs = aggregate_all(ms, AggregateConfig(min_annotations=3))
    reports = build_report(ms, aggs, sites, manifest)
    by_group = {(r.orientation_group, r.quantity, r.level): r for r in reports}
    for quantity in (LUMEN, WALL):
        r_ann = by_group[(ORIGINAL, quantity, PER_ANNOTATION)].r
        r_agg = by_group[(ORIGINAL, quantity, PER_IMAGE_AGGREGATE)].r
        assert r_agg > r_ann


def test_rescaling_worker_axis_keeps_r():
    sites, manifest = make_world()
    rng = np.random.default_rng(5)
    ms = []
    for image_id, entry in manifest.items():
        site = next(s for s in sites if s.site_id == entry.site_id)
        ms.append(AirwayMeasurement(
            annotation_id=image_id, image_id=image_id, worker_id="w0",
            lumen_area=site.expert_lumen_area * rng.lognormal(0, 0.2),
            wall_area=site.expert_wall_area * rng.lognormal(0, 0.2)))
    base = build_report(ms, [], sites, manifest)
    step = 0.63
    scaled = [AirwayMeasurement(m.annotation_id, m.image_id, m.worker_id,
                                m.lumen_area * step**2, m.wall_area * step**2)
              for m in ms]
    rescaled = build_report(scaled, [], sites, manifest)
    for a, b in zip(base, rescaled):
        if a.r is not None:
            assert b.r == pytest.approx(a.r, abs=1e-12)


def test_missing_manifest_entry():
    sites, manifest = make_world(n_sites=1)
    m = AirwayMeasurement("x", "ghost_image", "w0", 10.0, 20.0)
    with pytest.raises(EvaluationError):
        build_report([m], [], sites, manifest)


def test_empty_groups_marked_undefined(tmp_path):
    sites, manifest = make_world(n_sites=2)
    reports = build_report([], [], sites, manifest)
    assert all(r.n == 0 and r.r is None for r in reports)
    write_report(reports, tmp_path / "report.csv", scatter_dir=tmp_path)
    rows = read_report(tmp_path / "report.csv")
    assert len(rows) == 8
    assert all(row["r"] == "undefined" for row in rows)


def test_report_deterministic(tmp_path):
    sites, manifest = make_world()
    ms = exact_measurements(sites, manifest)
    aggs = aggregate_all(ms)
    for name in ("r1.csv", "r2.csv"):
        write_report(build_report(ms, aggs, sites, manifest), tmp_path / name,
                     scatter_dir=tmp_path / name.replace(".csv", ""))
    assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()


def test_scatter_csvs_written(tmp_path):
    sites, manifest = make_world(n_sites=3)
    ms = exact_measurements(sites, manifest)
    reports = build_report(ms, [], sites, manifest)
    write_report(reports, tmp_path / "report.csv", scatter_dir=tmp_path / "sc")
    files = sorted(p.name for p in (tmp_path / "sc").glob("*.csv"))
    assert len(files) == 8
    assert "scatter_per_annotation_original_lumen.csv" in files
