"""Footprint geometry: polar spline genomes, rasterization, extrusion.

A building footprint is encoded by 16 polar control points (radius plus an
angular offset from the evenly spaced base angles 2*pi*k/16).  The closed
outline through the control points is a uniform Catmull-Rom spline.  Outlines
are rasterized onto the flow lattice by the even-odd rule on cell centers,
measured by occupied-cell count (floor area), and extruded along z to build
the 3D obstacle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import OutOfBounds, SelfIntersecting

N_CONTROL_POINTS = 16

# genome parameter bounds (normalized parameters map linearly onto these)
R_MIN_REL = 0.1
R_MAX_REL = 1.0
MAX_ANGLE_OFFSET = np.pi / 16


@dataclass(frozen=True)
class Genome:
    """16 polar control points: radii in lattice cells, angle offsets in rad.

    ``radii[k]`` is the distance of control point k from the shape center and
    ``angles[k]`` the offset added to the base angle 2*pi*k/16.  All radii must
    be strictly positive and offsets within +-MAX_ANGLE_OFFSET.
    """

    radii: tuple
    angles: tuple

    def __post_init__(self):
        if len(self.radii) != N_CONTROL_POINTS or len(self.angles) != N_CONTROL_POINTS:
            raise ValueError("genome needs exactly 16 control points")
        if any(r <= 0 for r in self.radii):
            raise ValueError("all radii must be strictly positive")

    @classmethod
    def from_params(cls, params, base_radius: float) -> "Genome":
        """Build a genome from 32 normalized parameters in [0, 1].

        The first 16 parameters set radii in [R_MIN_REL, R_MAX_REL] times
        ``base_radius``; the last 16 set angle offsets in +-MAX_ANGLE_OFFSET.
        """
        p = np.asarray(params, dtype=float)
        if p.shape != (2 * N_CONTROL_POINTS,):
            raise ValueError(f"expected 32 parameters, got shape {p.shape}")
        radii = base_radius * (R_MIN_REL + (R_MAX_REL - R_MIN_REL) * p[:16])
        angles = MAX_ANGLE_OFFSET * (2.0 * p[16:] - 1.0)
        return cls(tuple(radii.tolist()), tuple(angles.tolist()))

    def to_params(self, base_radius: float) -> np.ndarray:
        r = np.asarray(self.radii) / base_radius
        pr = (r - R_MIN_REL) / (R_MAX_REL - R_MIN_REL)
        pa = (np.asarray(self.angles) / MAX_ANGLE_OFFSET + 1.0) / 2.0
        return np.concatenate([pr, pa])

    def control_points(self) -> np.ndarray:
        """Cartesian control points, shape (16, 2), centered on the origin."""
        k = np.arange(N_CONTROL_POINTS)
        theta = 2.0 * np.pi * k / N_CONTROL_POINTS + np.asarray(self.angles)
        r = np.asarray(self.radii)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


@dataclass(frozen=True)
class FootprintPolygon:
    """Closed polygon outline in lattice units, counter-clockwise.

    ``vertices`` has shape (n, 2) with n >= 3; the closing edge from the last
    vertex back to the first is implicit.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs at least 3 two-dimensional vertices")
        object.__setattr__(self, "vertices", v)

    def area(self) -> float:
        """Signed shoelace area (positive for counter-clockwise outlines)."""
        x = self.vertices[:, 0]
        y = self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def translated(self, offset) -> "FootprintPolygon":
        return FootprintPolygon(self.vertices + np.asarray(offset, dtype=float))


@dataclass(frozen=True)
class ObstacleMask:
    """Boolean occupancy grid; 2D footprint or its z-extrusion.

    ``cells`` is indexed [x, y] (2D) or [x, y, z] (3D).  ``offset`` records
    where the shape origin sits inside the flow domain.
    """

    cells: np.ndarray
    offset: tuple = (0.0, 0.0)

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=bool)
        if c.ndim not in (2, 3):
            raise ValueError("mask must be 2D or 3D")
        if not c.any():
            raise ValueError("mask must contain at least one occupied cell")
        object.__setattr__(self, "cells", c)

    @property
    def dims(self) -> tuple:
        return self.cells.shape

    @property
    def ndim(self) -> int:
        return self.cells.ndim

    def occupied_count(self) -> int:
        return int(self.cells.sum())

    def is_connected(self) -> bool:
        """True if the occupied region is 4-connected (2D) / 6-connected (3D)."""
        structure = ndimage.generate_binary_structure(self.cells.ndim, 1)
        _, n = ndimage.label(self.cells, structure=structure)
        return n == 1


def _catmull_rom_closed(points: np.ndarray, samples_per_segment: int) -> np.ndarray:
    """Sample the closed uniform Catmull-Rom curve through ``points``.

    Each of the n segments contributes ``samples_per_segment`` vertices at
    parameters t = j / samples_per_segment, j = 0 .. samples_per_segment - 1,
    so the result has n * samples_per_segment vertices and passes through
    every control point (at t = 0 of its segment).
    """
    n = len(points)
    p0 = np.roll(points, 1, axis=0)
    p1 = points
    p2 = np.roll(points, -1, axis=0)
    p3 = np.roll(points, -2, axis=0)
    t = (np.arange(samples_per_segment) / samples_per_segment)[None, :, None]
    t2 = t * t
    t3 = t2 * t
    seg = 0.5 * (
        2.0 * p1[:, None, :]
        + (p2 - p0)[:, None, :] * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3)[:, None, :] * t2
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3)[:, None, :] * t3
    )
    return seg.reshape(n * samples_per_segment, 2)


def _segments_intersect(a0, a1, b0, b1) -> np.ndarray:
    """Vectorized proper-intersection test for segment batches."""

    def cross(o, d, p):
        return d[..., 0] * (p[..., 1] - o[..., 1]) - d[..., 1] * (p[..., 0] - o[..., 0])

    da = a1 - a0
    db = b1 - b0
    d1 = cross(a0, da, b0)
    d2 = cross(a0, da, b1)
    d3 = cross(b0, db, a0)
    d4 = cross(b0, db, a1)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def _polyline_self_intersects(v: np.ndarray) -> bool:
    """Check all non-adjacent edge pairs of the closed polyline for crossings."""
    n = len(v)
    e0 = v
    e1 = np.roll(v, -1, axis=0)
    i, j = np.triu_indices(n, k=2)
    adjacent_wrap = (i == 0) & (j == n - 1)
    i, j = i[~adjacent_wrap], j[~adjacent_wrap]
    hits = _segments_intersect(e0[i], e1[i], e0[j], e1[j])
    return bool(hits.any())


def decode_genome(genome: Genome, samples_per_segment: int) -> FootprintPolygon:
    """Decode a genome into its closed Catmull-Rom outline.

    Returns a polygon with 16 * samples_per_segment vertices, counter-
    clockwise, centered on the origin.  Raises SelfIntersecting for genomes
    whose outline crosses itself; callers treat those as infeasible and
    assign worst fitness.
    """
    if samples_per_segment < 1:
        raise ValueError("samples_per_segment must be positive")
    pts = genome.control_points()
    verts = _catmull_rom_closed(pts, samples_per_segment)
    if _polyline_self_intersects(verts):
        raise SelfIntersecting("decoded outline crosses itself")
    poly = FootprintPolygon(verts)
    if poly.area() < 0:
        poly = FootprintPolygon(verts[::-1].copy())
    return poly


def rasterize(polygon: FootprintPolygon, nx: int, ny: int, offset) -> ObstacleMask:
    """Rasterize a polygon onto an nx-by-ny grid shifted by ``offset``.

    A cell (ix, iy) is occupied iff its center (ix + 0.5, iy + 0.5) lies
    inside the shifted polygon under the even-odd rule with half-open edge
    treatment, so results are deterministic and boundary cells are never
    double counted.
    """
    v = polygon.vertices + np.asarray(offset, dtype=float)
    if (
        v[:, 0].min() < 0.0
        or v[:, 1].min() < 0.0
        or v[:, 0].max() > nx
        or v[:, 1].max() > ny
    ):
        raise OutOfBounds("polygon does not fit inside the grid after offset")

    ix0 = max(int(np.floor(v[:, 0].min())), 0)
    ix1 = min(int(np.ceil(v[:, 0].max())), nx)
    iy0 = max(int(np.floor(v[:, 1].min())), 0)
    iy1 = min(int(np.ceil(v[:, 1].max())), ny)

    xc = np.arange(ix0, ix1) + 0.5
    yc = np.arange(iy0, iy1) + 0.5
    inside = np.zeros((xc.size, yc.size), dtype=bool)

    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    # even-odd crossing count per cell center; half-open in y avoids counting
    # a vertex-touching ray twice
    for e in range(len(v)):
        ya, yb = y0[e], y1[e]
        crosses = (ya <= yc) != (yb <= yc)
        if not crosses.any():
            continue
        t = (yc - ya) / (yb - ya)
        x_at = x0[e] + t * (x1[e] - x0[e])
        inside ^= crosses[None, :] & (xc[:, None] < x_at[None, :])

    cells = np.zeros((nx, ny), dtype=bool)
    cells[ix0:ix1, iy0:iy1] = inside
    if not cells.any():
        raise OutOfBounds("polygon covers no cell centers at this resolution")
    return ObstacleMask(cells, offset=tuple(np.asarray(offset, dtype=float)))


def floor_area(mask: ObstacleMask) -> float:
    """Occupied-cell count of a 2D mask, in cells^2."""
    if mask.ndim != 2:
        raise ValueError("floor_area is defined on 2D masks")
    return float(mask.occupied_count())


def extrude(mask: ObstacleMask, nz: int) -> ObstacleMask:
    """Stack ``nz`` identical copies of a 2D mask along z."""
    if mask.ndim != 2:
        raise ValueError("extrude takes a 2D mask")
    if nz < 1:
        raise ValueError("nz must be >= 1")
    cells = np.repeat(mask.cells[:, :, None], nz, axis=2)
    return ObstacleMask(cells, offset=mask.offset)


def save_polygon_csv(polygon: FootprintPolygon, path) -> None:
    """Write the outline as x,y rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in polygon.vertices:
            writer.writerow([f"{x:.17g}", f"{y:.17g}"])


def save_mask_pgm(mask: ObstacleMask, path) -> None:
    """Write a 2D mask (or one z-slice of a 3D mask) as binary PGM.

    Fluid cells are 0, solid cells 255.  Rows run along y so the image is
    ny tall and nx wide.
    """
    cells = mask.cells if mask.ndim == 2 else mask.cells[:, :, 0]
    img = np.where(cells.T[::-1], 255, 0).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
