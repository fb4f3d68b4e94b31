"""Solid shapes and rasterization onto uniform grids.

All lengths are in nm.  Solid axes are fixed to x (the nanorod / fiber
axis of the simulated scenes); arbitrary orientation is out of scope.
Cells are assigned by a cell-center membership test, with later solids
overriding earlier ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Capsule:
    """Hemisphere-capped cylinder along x; ``length`` includes both caps."""

    length: float
    radius: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.length < 2.0 * self.radius:
            raise GeometryError(
                f"capsule length {self.length} < 2*radius {2 * self.radius}"
            )

    def contains(self, x, y, z):
        cx, cy, cz = self.center
        half = self.length / 2.0 - self.radius  # cylindrical section half-length
        ax = np.clip(x - cx, -half, half)
        return ((x - cx - ax) ** 2 + (y - cy) ** 2 + (z - cz) ** 2
                <= self.radius**2)

    def bounds(self):
        cx, cy, cz = self.center
        h, r = self.length / 2.0, self.radius
        return (cx - h, cx + h), (cy - r, cy + r), (cz - r, cz + r)

    @property
    def min_radius(self):
        return self.radius


@dataclass(frozen=True)
class Cylinder:
    """Infinite cylinder along x (a fiber); spans the whole domain in x."""

    radius: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def contains(self, x, y, z):
        cy, cz = self.center[1], self.center[2]
        return (y - cy) ** 2 + (z - cz) ** 2 <= self.radius**2

    def bounds(self):
        cy, cz = self.center[1], self.center[2]
        r = self.radius
        return (-np.inf, np.inf), (cy - r, cy + r), (cz - r, cz + r)

    @property
    def min_radius(self):
        return self.radius


@dataclass(frozen=True)
class Sphere:
    radius: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def contains(self, x, y, z):
        cx, cy, cz = self.center
        return ((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2
                <= self.radius**2)

    def bounds(self):
        cx, cy, cz = self.center
        r = self.radius
        return (cx - r, cx + r), (cy - r, cy + r), (cz - r, cz + r)

    @property
    def min_radius(self):
        return self.radius


@dataclass(frozen=True)
class Geometry:
    """Ordered list of (shape, material tag) over a background material."""

    solids: tuple = ()
    background: str = "vacuum"

    def material_tags(self) -> list[str]:
        tags = [self.background]
        for _, tag in self.solids:
            if tag not in tags:
                tags.append(tag)
        return tags

    def tag_index(self, tag: str) -> int:
        return self.material_tags().index(tag)

    def material_index_at(self, x, y, z) -> np.ndarray:
        """Material index (into material_tags()) at the given points."""
        x, y, z = np.broadcast_arrays(np.asarray(x, float),
                                      np.asarray(y, float),
                                      np.asarray(z, float))
        out = np.zeros(x.shape, dtype=np.int32)
        tags = self.material_tags()
        for shape, tag in self.solids:
            out[shape.contains(x, y, z)] = tags.index(tag)
        return out

    def check_fits(self, extents) -> None:
        """Raise GeometryError unless every solid fits inside ``extents``.

        ``extents`` is ((xmin, xmax), (ymin, ymax), (zmin, zmax)) in nm.
        Infinite bounds (a fiber along x) are allowed to span the domain.
        """
        for shape, tag in self.solids:
            for (lo, hi), (dlo, dhi), ax in zip(
                    shape.bounds(), extents, "xyz"):
                if np.isinf(lo) and np.isinf(hi):
                    continue
                if lo < dlo or hi > dhi:
                    raise GeometryError(
                        f"solid '{tag}' [{lo}, {hi}] exceeds domain "
                        f"[{dlo}, {dhi}] along {ax}"
                    )


def cell_centers(extents, cell_size: float):
    """1D cell-center coordinate arrays for a uniform grid."""
    axes = []
    for lo, hi in extents:
        n = int(round((hi - lo) / cell_size))
        if abs(n * cell_size - (hi - lo)) > 1e-9 * cell_size:
            raise GeometryError(
                f"cell size {cell_size} does not divide extent [{lo}, {hi}]"
            )
        axes.append(lo + (np.arange(n) + 0.5) * cell_size)
    return axes


def rasterize(geometry: Geometry, cell_size: float, extents) -> np.ndarray:
    """Per-cell material index volume by cell-center membership.

    ``extents``: ((xmin, xmax), (ymin, ymax), (zmin, zmax)) in nm; the
    cell size must divide each extent and resolve the smallest solid
    (cell_size <= radius / 3).
    """
    geometry.check_fits(extents)
    for shape, tag in geometry.solids:
        if cell_size > shape.min_radius / 3.0 + 1e-9:
            raise GeometryError(
                f"cell size {cell_size} nm too coarse for solid '{tag}' "
                f"(radius {shape.min_radius} nm)"
            )
    xs, ys, zs = cell_centers(extents, cell_size)
    x, y, z = np.meshgrid(xs, ys, zs, indexing="ij", sparse=True)
    return geometry.material_index_at(x, y, z)
