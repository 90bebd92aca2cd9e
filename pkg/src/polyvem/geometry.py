"""Per-entity geometry: edge frames and cell geometry."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import MeshError


def polygon_area_centroid(vertices: np.ndarray) -> tuple[float, np.ndarray]:
    """Signed area and area centroid of a polygon (shoelace)."""
    v = np.asarray(vertices, dtype=float)
    w = np.roll(v, -1, axis=0)
    cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
    area = 0.5 * cross.sum()
    if area == 0.0:
        raise MeshError("polygon has zero area")
    c = ((v + w) * cross[:, None]).sum(axis=0) / (6.0 * area)
    return float(area), c


def polygon_diameter(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=float)
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d**2).sum(axis=-1).max()))


@dataclass(frozen=True, eq=False)
class EdgeFrame:
    """Globally oriented edge: tangent runs from ``start`` to ``end``.

    The reference normal is the tangent rotated clockwise, (t_y, -t_x); it is
    attached to the edge, not to either neighbouring cell.
    """

    start: np.ndarray
    end: np.ndarray

    @cached_property
    def length(self) -> float:
        return float(np.hypot(*(self.end - self.start)))

    @cached_property
    def tangent(self) -> np.ndarray:
        return (self.end - self.start) / self.length

    @cached_property
    def normal(self) -> np.ndarray:
        t = self.tangent
        return np.array([t[1], -t[0]])

    @cached_property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.start + self.end)

    def key(self) -> tuple[float, ...]:
        return (*self.start.tolist(), *self.end.tolist())

    def point(self, s):
        """Point at edge coordinate s = (x - midpoint) . t / |e|, s in [-1/2, 1/2]."""
        s = np.asarray(s, dtype=float)
        return self.midpoint + (s * self.length)[..., None] * self.tangent


@dataclass(frozen=True, eq=False)
class CellGeometry:
    """Geometry of one polygonal cell with counterclockwise vertices.

    Local edge ``i`` joins local vertices ``i`` and ``i + 1``. Its frame is
    oriented by the global vertex ids (smaller id first); ``edge_signs[i]`` is
    +1 when the cell traverses the edge along the frame tangent, in which case
    the frame normal is the outward normal of the cell.
    """

    vertices: np.ndarray
    vertex_ids: tuple[int, ...]
    edge_frames: tuple[EdgeFrame, ...]
    edge_signs: np.ndarray
    edge_ends: tuple[tuple[int, int], ...]  # local (start, end) vertex of each frame
    area: float
    centroid: np.ndarray
    diameter: float
    name: str = field(default="")

    @classmethod
    def from_polygon(cls, vertices, vertex_ids=None, name: str = "") -> "CellGeometry":
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise MeshError("a cell needs at least 3 vertices in the plane")
        nv = len(v)
        ids = tuple(range(nv)) if vertex_ids is None else tuple(int(i) for i in vertex_ids)
        area, centroid = polygon_area_centroid(v)
        diam = polygon_diameter(v)
        if area <= 1e-14 * diam**2:
            raise MeshError(f"cell {name or ids} is degenerate or clockwise (area {area:.3e})")
        frames, signs, ends = [], [], []
        for i in range(nv):
            j = (i + 1) % nv
            if ids[i] < ids[j]:
                frames.append(EdgeFrame(v[i].copy(), v[j].copy()))
                signs.append(1)
                ends.append((i, j))
            else:
                frames.append(EdgeFrame(v[j].copy(), v[i].copy()))
                signs.append(-1)
                ends.append((j, i))
        return cls(v, ids, tuple(frames), np.array(signs), tuple(ends), area, centroid, diam, name)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def outward_normal(self, e: int) -> np.ndarray:
        return self.edge_signs[e] * self.edge_frames[e].normal

    def transformed(self, scale: float, shift=(0.0, 0.0)) -> "CellGeometry":
        return CellGeometry.from_polygon(
            scale * self.vertices + np.asarray(shift), self.vertex_ids, self.name
        )
