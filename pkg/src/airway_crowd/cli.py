"""Command-line pipeline driver.

Stages share one data directory (flag ``--out`` / ``--data``, or the
AIRWAY_CROWD_DATA environment variable) with a fixed file layout:

    images/*.png        slice images          (reslice)
    manifest.csv        image geometry        (reslice)
    hits.json           HIT packaging         (make-hits)
    annotations.jsonl   annotation log        (serve / simulate)
    qc_report.csv, qc_tally.json              (qc)
    measurements.csv                          (measure)
    aggregates.csv                            (aggregate)
    evaluation/         report + scatter CSVs + figures (evaluate, report)
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import click

from . import evaluate as ev
from . import measure as ms
from . import phantom, plots, qc, reslice, simulate, store, volume


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as f:
        return tomllib.load(f)


def _data_dir(data, config) -> Path:
    value = data or config.get("data")
    if value is None:
        raise click.UsageError(
            "no data directory: pass --out/--data, set AIRWAY_CROWD_DATA, "
            "or put `data = ...` in the config file")
    return Path(value)


data_option = click.option(
    "--out", "--data", "data", envvar="AIRWAY_CROWD_DATA",
    type=click.Path(path_type=Path), default=None,
    help="Pipeline data directory (env: AIRWAY_CROWD_DATA).")
config_option = click.option(
    "--config", "config_path", type=click.Path(exists=True, path_type=Path),
    default=None, help="TOML config file; flags override its values.")


@click.group()
def main():
    """Crowdsourced airway annotation pipeline."""


@main.command("reslice")
@config_option
@data_option
@click.option("--volume", "volume_path", type=click.Path(exists=True, path_type=Path),
              help="MetaImage-style volume header.")
@click.option("--sites", "sites_path", type=click.Path(exists=True, path_type=Path),
              help="Airway site CSV.")
@click.option("--side", type=int, default=50, show_default=True,
              help="Slice side length in pixels.")
@click.option("--window-lo", type=float, default=-950.0, show_default=True,
              help="Lower HU window bound.")
@click.option("--window-hi", type=float, default=550.0, show_default=True,
              help="Upper HU window bound.")
@click.option("--sample-step", type=float, default=1.0, show_default=True,
              help="Sampling step in units of the minimum voxel spacing.")
def cmd_reslice(config_path, data, volume_path, sites_path, side,
                window_lo, window_hi, sample_step):
    """Generate the four slice images per airway site, plus the manifest."""
    config = _load_config(config_path)
    out = _data_dir(data, config)
    volume_path = volume_path or config.get("volume")
    sites_path = sites_path or config.get("sites")
    if not volume_path or not sites_path:
        raise click.UsageError("reslice needs --volume and --sites")

    vol = volume.load_volume(volume_path)
    sites = volume.load_sites(sites_path, vol)
    slice_config = reslice.SliceConfig(side=side, window_lo=window_lo,
                                       window_hi=window_hi,
                                       sample_step=sample_step)
    images = []
    for site in sites:
        images.extend(reslice.generate_site_images(vol, site, slice_config))
    out.mkdir(parents=True, exist_ok=True)
    reslice.write_images(images, out / "images", out / "manifest.csv")
    click.echo(f"wrote {len(images)} images for {len(sites)} sites to {out}")


@main.command("make-hits")
@config_option
@data_option
@click.option("--images-per-hit", type=int, default=10, show_default=True)
@click.option("--annotations-per-image", type=int, default=10, show_default=True,
              help="Collection target per image.")
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_make_hits(config_path, data, images_per_hit, annotations_per_image, seed):
    """Shuffle images into HITs and write hits.json."""
    config = _load_config(config_path)
    out = _data_dir(data, config)
    manifest = reslice.read_manifest(out / "manifest.csv")
    hit_config = store.HitConfig(images_per_hit=images_per_hit,
                                 annotations_per_image_target=annotations_per_image,
                                 shuffle_seed=seed)
    hits = store.make_hits(sorted(manifest), hit_config)
    store.write_hit_manifest(hits, out / "hits.json")
    click.echo(f"wrote {len(hits)} HITs covering {len(manifest)} images")


@main.command("serve")
@config_option
@data_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--instructions", type=click.Path(exists=True, path_type=Path),
              default=None, help="Instruction text file (versioned).")
@click.option("--static", "static_dir", type=click.Path(path_type=Path),
              default=None, help="Frontend asset directory to serve at /.")
@click.option("--annotations-per-image", type=int, default=10, show_default=True)
def cmd_serve(config_path, data, host, port, instructions, static_dir,
              annotations_per_image):
    """Run the annotation HTTP server."""
    import uvicorn

    from .server import create_app

    config = _load_config(config_path)
    out = _data_dir(data, config)
    app = create_app(
        out, instructions_path=instructions,
        hit_config=store.HitConfig(annotations_per_image_target=annotations_per_image),
        static_dir=static_dir,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("simulate")
@config_option
@data_option
@click.option("--sites", "sites_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Airway site CSV (for synthetic ground truth).")
@click.option("--annotations-per-image", type=int, default=10, show_default=True)
@click.option("--mixture", default="conscientious:0.7,single_ellipse:0.1,"
              "spammer:0.1,vessel:0.05,no_airway:0.05", show_default=True,
              help="Comma-separated profile:weight list.")
@click.option("--sigma", type=float, default=0.15, show_default=True,
              help="Relative noise of conscientious workers.")
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_simulate(config_path, data, sites_path, annotations_per_image,
                 mixture, sigma, seed):
    """Write a synthetic annotation log for every image in the manifest."""
    config = _load_config(config_path)
    out = _data_dir(data, config)
    manifest = reslice.read_manifest(out / "manifest.csv")
    # Site CSV is only needed for areas/bounds here; loading without the
    # volume would skip bounds checks, so parse leniently through csv.
    sites = _load_sites_lenient(sites_path)
    site_by_id = {s.site_id: s for s in sites}

    truths = [
        simulate.truth_from_site(entry, site_by_id[entry.site_id])
        for entry in sorted(manifest.values(), key=lambda e: e.image_id)
    ]
    records = simulate.simulate_campaign(
        truths, simulate.parse_mixture(mixture, sigma=sigma),
        n_per_image=annotations_per_image, seed=seed)
    store.write_annotation_log(records, out / "annotations.jsonl")
    click.echo(f"wrote {len(records)} synthetic annotations "
               f"({annotations_per_image} per image)")


def _load_sites_lenient(sites_path) -> list[volume.AirwaySite]:
    import csv as _csv
    import math as _math
    sites = []
    with open(sites_path, newline="", encoding="utf-8") as f:
        for row in _csv.DictReader(f):
            n = (float(row["nx"]), float(row["ny"]), float(row["nz"]))
            norm = _math.sqrt(sum(c * c for c in n))
            sites.append(volume.AirwaySite(
                site_id=row["site_id"],
                location=(float(row["x"]), float(row["y"]), float(row["z"])),
                orientation=tuple(c / norm for c in n),
                expert_lumen_area=float(row["expert_lumen_area"]),
                expert_wall_area=float(row["expert_wall_area"]),
            ))
    return sites


def _qc_config(pair_distance_max) -> qc.QcConfig:
    return qc.QcConfig(pair_distance_max=pair_distance_max)


@main.command("qc")
@config_option
@data_option
@click.option("--pair-distance-max", type=float, default=10.0, show_default=True)
def cmd_qc(config_path, data, pair_distance_max):
    """Classify annotations and write the QC report + tally."""
    config = _load_config(config_path)
    out = _data_dir(data, config)
    records = store.read_annotation_log(out / "annotations.jsonl")
    tally = qc.write_qc_report(records, _qc_config(pair_distance_max),
                               out / "qc_report.csv", out / "qc_tally.json")
    usable = sum(tally[c] for c in qc.USABLE_CATEGORIES)
    for category in qc.QcCategory:
        click.echo(f"{category.value}={tally[category]}")
    click.echo(f"usable={usable}")


@main.command("measure")
@config_option
@data_option
@click.option("--pair-distance-max", type=float, default=10.0, show_default=True)
@click.option("--include-multi", is_flag=True,
              help="Also measure multi-pair annotations (largest-lumen pair).")
def cmd_measure(config_path, data, pair_distance_max, include_multi):
    """Compute per-annotation lumen/wall areas for usable annotations."""
    config = _load_config(config_path)
    out = _data_dir(data, config)
    records = store.read_annotation_log(out / "annotations.jsonl")
    usable, _ = qc.filter_usable(records, _qc_config(pair_distance_max))
    measurements = ms.measure_all(usable, include_multi=include_multi)
    ms.write_measurements(measurements, out / "measurements.csv")
    click.echo(f"measured {len(measurements)} of {len(records)} annotations")


@main.command("aggregate")
@config_option
@data_option
@click.option("--min-annotations", type=int, default=3, show_default=True)
def cmd_aggregate(config_path, data, min_annotations):
    """Median-aggregate measurements per image."""
    config = _load_config(config_path)
    out = _data_dir(data, config)
    measurements = ms.read_measurements(out / "measurements.csv")
    aggregates = ms.aggregate_all(
        measurements, ms.AggregateConfig(min_annotations=min_annotations))
    ms.write_aggregates(aggregates, out / "aggregates.csv")
    click.echo(f"aggregated {len(aggregates)} images "
               f"(min {min_annotations} annotations each)")


@main.command("evaluate")
@config_option
@data_option
@click.option("--sites", "sites_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Airway site CSV with expert areas.")
def cmd_evaluate(config_path, data, sites_path):
    """Correlate worker measurements with expert areas; write CSVs + figures."""
    config = _load_config(config_path)
    out = _data_dir(data, config)
    manifest = reslice.read_manifest(out / "manifest.csv")
    sites = _load_sites_lenient(sites_path)
    measurements = ms.read_measurements(out / "measurements.csv")
    aggregates = ms.read_aggregates(out / "aggregates.csv")

    reports = ev.build_report(measurements, aggregates, sites, manifest)
    eval_dir = out / "evaluation"
    eval_dir.mkdir(parents=True, exist_ok=True)
    ev.write_report(reports, eval_dir / "report.csv", scatter_dir=eval_dir)
    figures = plots.render_scatter_figures(reports, eval_dir / "figures")
    click.echo(f"wrote {eval_dir / 'report.csv'} and {len(figures)} figures")


@main.command("report")
@config_option
@data_option
def cmd_report(config_path, data):
    """Print the QC tally and the eight correlation rows."""
    config = _load_config(config_path)
    out = _data_dir(data, config)

    tally_path = out / "qc_tally.json"
    if tally_path.exists():
        summary = json.loads(tally_path.read_text())
        click.echo(f"annotations: {summary['total']}  usable: {summary['usable']}")
        for name, count in summary["tally"].items():
            click.echo(f"  {name}: {count}")
    else:
        click.echo("no QC tally yet (run `qc` first)")

    report_path = out / "evaluation" / "report.csv"
    if report_path.exists():
        for row in ev.read_report(report_path):
            click.echo(
                f"{row['level']:>20} {row['orientation_group']:>13} "
                f"{row['quantity']:>5}  n={row['n']:>4}  r={row['r']}")
    else:
        click.echo("no evaluation report yet (run `evaluate` first)")


@main.command("make-phantom")
@data_option
@click.option("--tubes", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_make_phantom(data, tubes, seed):
    """Write a synthetic tube-phantom volume and site CSV for testing."""
    out = _data_dir(data, {})
    out.mkdir(parents=True, exist_ok=True)
    vol, sites = phantom.make_tube_volume(n_tubes=tubes, seed=seed)
    volume.save_volume(vol, out / "phantom.mhd")
    volume.save_sites(sites, out / "phantom_sites.csv")
    click.echo(f"wrote phantom volume ({tubes} tubes) to {out}")


if __name__ == "__main__":
    sys.exit(main())
