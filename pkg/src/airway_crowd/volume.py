"""CT volume and airway-site loading.

Volumes are MetaImage-style: a plain-text header (one ``Key = Value`` per
line) next to a raw little-endian signed 16-bit data file, x-fastest layout.
Airway sites come from a CSV of expert-marked locations, orientations and
area measurements.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

REQUIRED_SITE_COLUMNS = [
    "site_id", "x", "y", "z", "nx", "ny", "nz",
    "expert_lumen_area", "expert_wall_area",
]


class VolumeError(Exception):
    """Raised for malformed volume headers or data files."""


class SiteError(Exception):
    """Raised for invalid airway-site rows."""


@dataclass(frozen=True)
class CtVolume:
    """3D grid of Hounsfield-unit samples with anisotropic voxel spacing.

    ``data`` is indexed [z, y, x] so the raw x-fastest file maps directly
    onto the last axis.
    """

    data: np.ndarray            # int16, shape (nz, ny, nx), read-only
    spacing: tuple[float, float, float]  # (sx, sy, sz) mm/voxel

    def __post_init__(self):
        if self.data.ndim != 3:
            raise VolumeError(f"expected 3D data, got {self.data.ndim}D")
        if any(s <= 0 for s in self.spacing):
            raise VolumeError(f"spacing must be positive, got {self.spacing}")
        self.data.setflags(write=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        """(nx, ny, nz)."""
        nz, ny, nx = self.data.shape
        return (nx, ny, nz)

    def contains(self, p) -> bool:
        """True if the continuous voxel coordinate p lies inside the grid."""
        nx, ny, nz = self.dims
        x, y, z = p
        return 0.0 <= x <= nx - 1 and 0.0 <= y <= ny - 1 and 0.0 <= z <= nz - 1

    def voxel_to_mm(self, p):
        """Continuous voxel coordinate -> physical mm coordinate."""
        return tuple(c * s for c, s in zip(p, self.spacing))

    def mm_to_voxel(self, p):
        """Physical mm coordinate -> continuous voxel coordinate."""
        return tuple(c / s for c, s in zip(p, self.spacing))


@dataclass(frozen=True)
class AirwaySite:
    """One expert-marked airway location with its reference area measurements.

    ``location`` is in continuous voxel coordinates; expert areas are mm²
    as recorded by the clinical software.
    """

    site_id: str
    location: tuple[float, float, float]
    orientation: tuple[float, float, float]  # unit vector
    expert_lumen_area: float
    expert_wall_area: float


def _parse_header(path: Path) -> dict[str, str]:
    header = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise VolumeError(f"malformed header line: {line!r}")
        key, _, value = line.partition("=")
        header[key.strip()] = value.strip()
    return header


def load_volume(path) -> CtVolume:
    """Load a MetaImage-style volume. HU values are read verbatim."""
    path = Path(path)
    if not path.is_file():
        raise VolumeError(f"no such volume header: {path}")
    header = _parse_header(path)

    for key in ("NDims", "DimSize", "ElementSpacing", "ElementType", "ElementDataFile"):
        if key not in header:
            raise VolumeError(f"header missing required key {key}")
    if header["NDims"] != "3":
        raise VolumeError(f"unsupported NDims {header['NDims']!r}, expected 3")
    if header["ElementType"] != "MET_SHORT":
        raise VolumeError(f"unsupported ElementType {header['ElementType']!r}")

    try:
        nx, ny, nz = (int(v) for v in header["DimSize"].split())
        spacing = tuple(float(v) for v in header["ElementSpacing"].split())
    except ValueError as e:
        raise VolumeError(f"malformed DimSize/ElementSpacing: {e}") from e
    if len(spacing) != 3:
        raise VolumeError("ElementSpacing must have 3 components")
    if nx <= 0 or ny <= 0 or nz <= 0:
        raise VolumeError(f"DimSize components must be positive: {(nx, ny, nz)}")

    raw_path = path.parent / header["ElementDataFile"]
    if not raw_path.is_file():
        raise VolumeError(f"data file not found: {raw_path}")
    expected = nx * ny * nz * 2
    actual = raw_path.stat().st_size
    if actual != expected:
        raise VolumeError(
            f"data file size mismatch: {actual} bytes, expected {expected} "
            f"for dims {(nx, ny, nz)}"
        )

    data = np.fromfile(raw_path, dtype="<i2").reshape(nz, ny, nx)
    return CtVolume(data=data, spacing=spacing)


def save_volume(volume: CtVolume, path) -> None:
    """Write a volume back out in the same header + raw layout."""
    path = Path(path)
    raw_name = path.stem + ".raw"
    nx, ny, nz = volume.dims
    sx, sy, sz = volume.spacing
    path.write_text(
        "NDims = 3\n"
        f"DimSize = {nx} {ny} {nz}\n"
        f"ElementSpacing = {sx} {sy} {sz}\n"
        "ElementType = MET_SHORT\n"
        f"ElementDataFile = {raw_name}\n"
    )
    volume.data.astype("<i2").tofile(path.parent / raw_name)


def load_sites(path, volume: CtVolume) -> list[AirwaySite]:
    """Load airway sites, normalizing orientations and checking bounds.

    Order-preserving and deterministic.
    """
    path = Path(path)
    sites: list[AirwaySite] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = [c for c in REQUIRED_SITE_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise SiteError(f"site CSV missing columns: {missing}")
        for row_no, row in enumerate(reader, start=2):
            site_id = row["site_id"]
            if site_id in seen:
                raise SiteError(f"row {row_no}: duplicate site_id {site_id!r}")
            seen.add(site_id)

            loc = (float(row["x"]), float(row["y"]), float(row["z"]))
            if not volume.contains(loc):
                raise SiteError(
                    f"row {row_no}: location {loc} outside volume dims {volume.dims}"
                )

            n = (float(row["nx"]), float(row["ny"]), float(row["nz"]))
            norm = math.sqrt(sum(c * c for c in n))
            if norm == 0.0:
                raise SiteError(f"row {row_no}: zero orientation vector")
            orientation = tuple(c / norm for c in n)

            lumen = float(row["expert_lumen_area"])
            wall = float(row["expert_wall_area"])
            if lumen < 0 or wall < 0:
                raise SiteError(f"row {row_no}: negative area")
            if lumen >= wall:
                raise SiteError(
                    f"row {row_no}: lumen area {lumen} must be smaller than wall area {wall}"
                )

            sites.append(AirwaySite(site_id, loc, orientation, lumen, wall))
    return sites


def save_sites(sites: list[AirwaySite], path) -> None:
    """Write sites in the same CSV layout load_sites reads."""
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(REQUIRED_SITE_COLUMNS)
        for s in sites:
            w.writerow([
                s.site_id, *s.location, *s.orientation,
                s.expert_lumen_area, s.expert_wall_area,
            ])
