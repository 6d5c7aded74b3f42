"""Synthetic tube phantoms: volumes with analytically known airway geometry.

Each phantom is a cylinder along z (dark lumen inside a bright wall ring on
a mid-gray background), so slice generation, annotation simulation and the
full measurement pipeline can be exercised without patient data.
"""

from __future__ import annotations

import math

import numpy as np

from .volume import AirwaySite, CtVolume

LUMEN_HU = -900
WALL_HU = 0
BACKGROUND_HU = -500


def make_tube_volume(n_tubes: int = 20, cell: int = 30, nz: int = 24,
                     lumen_radii=None, wall_margin: float = 2.0,
                     spacing=(1.0, 1.0, 1.0), seed: int = 0
                     ) -> tuple[CtVolume, list[AirwaySite]]:
    """Grid of z-axis tubes, one per cell, with per-tube lumen radii.

    Expert areas are the analytic disc areas in mm² (unit spacing by
    default, so voxel and mm areas coincide).
    """
    if lumen_radii is None:
        rng = np.random.default_rng(seed)
        lumen_radii = rng.uniform(2.0, 6.0, size=n_tubes)
    lumen_radii = list(lumen_radii)
    if len(lumen_radii) != n_tubes:
        raise ValueError("need one lumen radius per tube")

    n_cols = math.ceil(math.sqrt(n_tubes))
    n_rows = math.ceil(n_tubes / n_cols)
    nx, ny = n_cols * cell, n_rows * cell

    data = np.full((nz, ny, nx), BACKGROUND_HU, dtype=np.int16)
    ys, xs = np.mgrid[0:ny, 0:nx]
    sites = []
    for t, r_lumen in enumerate(lumen_radii):
        r_wall = r_lumen + wall_margin
        cx = (t % n_cols) * cell + cell / 2.0
        cy = (t // n_cols) * cell + cell / 2.0
        dist2 = (xs - cx) ** 2 + (ys - cy) ** 2
        wall_mask = dist2 <= r_wall ** 2
        lumen_mask = dist2 <= r_lumen ** 2
        data[:, wall_mask] = WALL_HU
        data[:, lumen_mask] = LUMEN_HU
        sites.append(AirwaySite(
            site_id=f"tube{t:02d}",
            location=(cx, cy, nz / 2.0),
            orientation=(0.0, 0.0, 1.0),
            expert_lumen_area=math.pi * r_lumen ** 2,
            expert_wall_area=math.pi * r_wall ** 2,
        ))

    return CtVolume(data=data, spacing=tuple(spacing)), sites
