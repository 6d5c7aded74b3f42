"""Slice-image generation: oblique plane sampling with tricubic interpolation
and fixed Hounsfield windowing.

Each airway site yields four 50x50 8-bit grayscale images: one perpendicular
to the site orientation and one per axis-aligned view (sagittal, coronal,
axial). All four views share the same interpolation code path.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image

from .volume import AirwaySite, CtVolume


class ViewKind(Enum):
    ORIGINAL = "original"
    SAGITTAL = "sagittal"
    CORONAL = "coronal"
    AXIAL = "axial"


# Plane normals of the axis-aligned views.
AXIS_NORMALS = {
    ViewKind.SAGITTAL: (1.0, 0.0, 0.0),
    ViewKind.CORONAL: (0.0, 1.0, 0.0),
    ViewKind.AXIAL: (0.0, 0.0, 1.0),
}


@dataclass(frozen=True)
class SliceConfig:
    side: int = 50
    window_lo: float = -950.0   # HU
    window_hi: float = 550.0    # HU
    sample_step: float = 1.0    # in units of the minimum spacing component

    def __post_init__(self):
        if self.side < 2:
            raise ValueError(f"side must be >= 2, got {self.side}")
        if self.window_lo >= self.window_hi:
            raise ValueError("window_lo must be below window_hi")
        if self.sample_step <= 0:
            raise ValueError("sample_step must be positive")


@dataclass(frozen=True)
class SliceImage:
    image_id: str
    site_id: str
    view: ViewKind
    pixels: np.ndarray  # uint8, shape (side, side), [row, col], (0,0) top-left
    plane_origin: tuple[float, float, float]  # voxel coordinates
    u: tuple[float, float, float]
    v: tuple[float, float, float]
    sample_step_mm: float

    def __post_init__(self):
        self.pixels.setflags(write=False)

    @property
    def side(self) -> int:
        return self.pixels.shape[0]


def plane_basis(normal) -> tuple[np.ndarray, np.ndarray]:
    """In-plane orthonormal basis (u, v) so that {u, v, normal} is right-handed.

    u = normalize(normal x k) with global up k = (0,0,1), falling back to
    k = (0,1,0) when the normal is near-parallel to z. Deterministic so that
    regeneration reproduces identical images.
    """
    n = np.asarray(normal, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise ValueError("zero-norm plane normal")
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"plane normal must be unit length, |n| = {norm}")
    k = np.array([0.0, 0.0, 1.0])
    if abs(n @ k) > 0.999:
        k = np.array([0.0, 1.0, 0.0])
    u = np.cross(n, k)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v


def _cubic_weights(t: np.ndarray) -> np.ndarray:
    """Catmull-Rom weights (cubic convolution, a = -0.5) for fraction t in [0,1).

    Returns shape t.shape + (4,), for neighbors at offsets -1, 0, 1, 2.
    """
    t2 = t * t
    t3 = t2 * t
    w = np.empty(t.shape + (4,), dtype=float)
    w[..., 0] = 0.5 * (-t3 + 2.0 * t2 - t)
    w[..., 1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0)
    w[..., 2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t)
    w[..., 3] = 0.5 * (t3 - t2)
    return w


def sample_tricubic_many(volume: CtVolume, points: np.ndarray) -> np.ndarray:
    """Tricubic (separable cubic-convolution) samples at N continuous voxel
    coordinates, shape (N, 3). Out-of-grid coordinates clamp to the edge.
    """
    nx, ny, nz = volume.dims
    pts = np.asarray(points, dtype=float)
    pts = np.clip(pts, 0.0, [nx - 1, ny - 1, nz - 1])

    base = np.floor(pts).astype(int)
    frac = pts - base

    idx = []
    for axis, n in enumerate((nx, ny, nz)):
        neighbors = base[:, axis, None] + np.arange(-1, 3)
        idx.append(np.clip(neighbors, 0, n - 1))
    wx = _cubic_weights(frac[:, 0])
    wy = _cubic_weights(frac[:, 1])
    wz = _cubic_weights(frac[:, 2])

    data = volume.data  # [z, y, x]
    out = np.zeros(len(pts), dtype=float)
    for k in range(4):
        acc_y = np.zeros(len(pts), dtype=float)
        for j in range(4):
            rows = data[idx[2][:, k], idx[1][:, j]]          # (N, nx)
            vals = np.take_along_axis(rows, idx[0], axis=1)  # (N, 4)
            acc_y += wy[:, j] * (vals * wx).sum(axis=1)
        out += wz[:, k] * acc_y
    return out


def sample_tricubic(volume: CtVolume, p) -> float:
    """Tricubic sample at one continuous voxel coordinate."""
    return float(sample_tricubic_many(volume, np.asarray(p, dtype=float)[None, :])[0])


def window_hu_many(values: np.ndarray, config: SliceConfig) -> np.ndarray:
    """Map HU values linearly from [window_lo, window_hi] onto [0, 255].

    Inputs are clamped to the window first; rounding is half away from zero.
    """
    v = np.clip(np.asarray(values, dtype=float), config.window_lo, config.window_hi)
    scaled = (v - config.window_lo) * 255.0 / (config.window_hi - config.window_lo)
    return np.floor(scaled + 0.5).astype(np.uint8)


def window_hu(value: float, config: SliceConfig) -> int:
    return int(window_hu_many(np.array([value]), config)[0])


def view_normal(site: AirwaySite, view: ViewKind) -> np.ndarray:
    if view is ViewKind.ORIGINAL:
        return np.asarray(site.orientation, dtype=float)
    return np.asarray(AXIS_NORMALS[view], dtype=float)


def extract_slice(volume: CtVolume, site: AirwaySite, view: ViewKind,
                  config: SliceConfig = SliceConfig()) -> SliceImage:
    """Sample one side x side plane centered on the site location.

    Pixel (i, j) with i = column, j = row samples the point
    c + (i - (side-1)/2) * step * u + (j - (side-1)/2) * step * v, where the
    step is isotropic (sample_step times the minimum spacing component,
    converted to per-axis voxel offsets via the spacing).
    """
    if not volume.contains(site.location):
        raise ValueError(f"site {site.site_id} location outside volume")

    normal = view_normal(site, view)
    u, v = plane_basis(normal)
    side = config.side
    step_mm = config.sample_step * min(volume.spacing)
    spacing = np.asarray(volume.spacing, dtype=float)
    center = np.asarray(site.location, dtype=float)

    offsets = (np.arange(side) - (side - 1) / 2.0) * step_mm
    cols, rows = np.meshgrid(offsets, offsets)  # rows[j,i] = row offset j
    # mm displacement in the plane, converted to voxel units per axis
    disp = cols[..., None] * u + rows[..., None] * v
    pts = center + disp / spacing

    hu = sample_tricubic_many(volume, pts.reshape(-1, 3)).reshape(side, side)
    pixels = window_hu_many(hu, config)

    return SliceImage(
        image_id=f"{site.site_id}_{view.value}",
        site_id=site.site_id,
        view=view,
        pixels=pixels,
        plane_origin=tuple(center),
        u=tuple(u),
        v=tuple(v),
        sample_step_mm=step_mm,
    )


def generate_site_images(volume: CtVolume, site: AirwaySite,
                         config: SliceConfig = SliceConfig()) -> list[SliceImage]:
    """One image per view kind, in enum order. Deterministic."""
    return [extract_slice(volume, site, view, config) for view in ViewKind]


def encode_png(image: SliceImage) -> bytes:
    """8-bit grayscale PNG; decode(encode(x)) is pixel-exact."""
    buf = io.BytesIO()
    Image.fromarray(image.pixels, mode="L").save(buf, format="PNG")
    return buf.getvalue()


MANIFEST_COLUMNS = [
    "image_id", "site_id", "view", "plane_origin_xyz", "u_xyz", "v_xyz",
    "sample_step_mm",
]


def _fmt_vec(v) -> str:
    return " ".join(repr(float(c)) for c in v)


def write_images(images: list[SliceImage], out_dir, manifest_path) -> None:
    """Write one PNG per image plus the manifest CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with Path(manifest_path).open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(MANIFEST_COLUMNS)
        for img in images:
            (out_dir / f"{img.image_id}.png").write_bytes(encode_png(img))
            w.writerow([
                img.image_id, img.site_id, img.view.value,
                _fmt_vec(img.plane_origin), _fmt_vec(img.u), _fmt_vec(img.v),
                repr(img.sample_step_mm),
            ])


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    site_id: str
    view: ViewKind
    plane_origin: tuple[float, float, float]
    u: tuple[float, float, float]
    v: tuple[float, float, float]
    sample_step_mm: float


def read_manifest(manifest_path) -> dict[str, ManifestEntry]:
    """image_id -> manifest entry."""
    entries = {}
    with Path(manifest_path).open(newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            entries[row["image_id"]] = ManifestEntry(
                image_id=row["image_id"],
                site_id=row["site_id"],
                view=ViewKind(row["view"]),
                plane_origin=tuple(float(c) for c in row["plane_origin_xyz"].split()),
                u=tuple(float(c) for c in row["u_xyz"].split()),
                v=tuple(float(c) for c in row["v_xyz"].split()),
                sample_step_mm=float(row["sample_step_mm"]),
            )
    return entries
