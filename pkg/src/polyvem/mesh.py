"""Polygonal meshes: topology, validation, JSON I/O and generators."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MeshError
from .geometry import CellGeometry, EdgeFrame, polygon_area_centroid, polygon_diameter


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 != 0 and d3 * d4 != 0:
        return True
    return False


def is_simple_polygon(coords: np.ndarray) -> bool:
    n = len(coords)
    for i in range(n):
        a, b = coords[i], coords[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_intersect(a, b, coords[j], coords[(j + 1) % n]):
                return False
    return True


@dataclass(eq=False)
class PolyMesh:
    """Polygonal mesh with globally oriented edges.

    Edge ``e`` runs from ``edges[e, 0]`` to ``edges[e, 1]`` (smaller vertex id
    first). ``cell_edges[c][i]`` is the edge joining local vertices i and i+1
    of cell c, and ``cell_signs[c][i]`` is +1 when the cell traverses it from
    start to end. ``edge_cells[e]`` lists the (one or two) adjacent cells,
    padded with -1.
    """

    vertices: np.ndarray
    cells: list[np.ndarray]
    edges: np.ndarray = field(init=False)
    cell_edges: list[np.ndarray] = field(init=False)
    cell_signs: list[np.ndarray] = field(init=False)
    edge_cells: np.ndarray = field(init=False)
    boundary_edges: np.ndarray = field(init=False)
    boundary_vertices: np.ndarray = field(init=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.cells = [np.asarray(c, dtype=int) for c in self.cells]
        self._build_topology()
        self._geometry_cache: dict[int, CellGeometry] = {}

    def _build_topology(self) -> None:
        V = self.vertices
        if V.ndim != 2 or V.shape[1] != 2:
            raise MeshError("vertices must be an (n, 2) array")
        nv = len(V)
        span = float(np.ptp(V, axis=0).max()) if nv else 0.0
        # duplicate vertices
        order = np.lexsort((V[:, 1], V[:, 0]))
        srt = V[order]
        tol = 1e-12 * max(span, 1e-300)
        for a in range(len(srt) - 1):
            b = a + 1
            while b < len(srt) and srt[b, 0] - srt[a, 0] <= tol:
                if abs(srt[b, 1] - srt[a, 1]) <= tol:
                    raise MeshError(f"duplicate vertices {order[a]} and {order[b]}")
                b += 1

        edge_index: dict[tuple[int, int], int] = {}
        edges, edge_cells, cell_edges, cell_signs = [], [], [], []
        used = np.zeros(nv, dtype=bool)
        for c, loop in enumerate(self.cells):
            if len(loop) < 3:
                raise MeshError(f"cell {c} has fewer than 3 vertices")
            if len(set(loop.tolist())) != len(loop):
                raise MeshError(f"cell {c} repeats a vertex")
            if loop.min() < 0 or loop.max() >= nv:
                raise MeshError(f"cell {c} references a missing vertex")
            coords = V[loop]
            area, _ = polygon_area_centroid(coords)
            diam = polygon_diameter(coords)
            if area <= 1e-14 * diam**2:
                raise MeshError(f"cell {c} is not counterclockwise or is degenerate")
            if not is_simple_polygon(coords):
                raise MeshError(f"cell {c} is not a simple polygon (self-intersecting)")
            used[loop] = True
            ce, cs = [], []
            for i in range(len(loop)):
                a, b = int(loop[i]), int(loop[(i + 1) % len(loop)])
                key = (min(a, b), max(a, b))
                sign = 1 if a < b else -1
                e = edge_index.get(key)
                if e is None:
                    e = len(edges)
                    edge_index[key] = e
                    edges.append(key)
                    edge_cells.append([c, -1, sign])
                else:
                    rec = edge_cells[e]
                    if rec[1] != -1:
                        raise MeshError(f"edge {key} is shared by more than two cells")
                    if rec[2] == sign:
                        raise MeshError(f"cells {rec[0]} and {c} traverse edge {key} in the same direction")
                    rec[1] = c
                ce.append(e)
                cs.append(sign)
            cell_edges.append(np.array(ce))
            cell_signs.append(np.array(cs))
        if nv and not used.all():
            raise MeshError(f"vertex {int(np.flatnonzero(~used)[0])} belongs to no cell")
        self.edges = np.array(edges, dtype=int).reshape(-1, 2)
        self.edge_cells = np.array([r[:2] for r in edge_cells], dtype=int).reshape(-1, 2)
        self.cell_edges = cell_edges
        self.cell_signs = cell_signs
        self.boundary_edges = self.edge_cells[:, 1] < 0
        bv = np.zeros(nv, dtype=bool)
        bv[self.edges[self.boundary_edges].ravel()] = True
        self.boundary_vertices = bv

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def edge_frame(self, e: int) -> EdgeFrame:
        a, b = self.edges[e]
        return EdgeFrame(self.vertices[a].copy(), self.vertices[b].copy())

    def cell_geometry(self, c: int) -> CellGeometry:
        g = self._geometry_cache.get(c)
        if g is None:
            loop = self.cells[c]
            g = CellGeometry.from_polygon(self.vertices[loop], loop, name=f"cell {c}")
            self._geometry_cache[c] = g
        return g

    def cell_sizes(self) -> np.ndarray:
        return np.array([self.cell_geometry(c).diameter for c in range(self.n_cells)])

    def cell_areas(self) -> np.ndarray:
        return np.array([self.cell_geometry(c).area for c in range(self.n_cells)])

    @property
    def h(self) -> float:
        return float(self.cell_sizes().max())


# -- star-shapedness -----------------------------------------------------------


@dataclass
class StarShapedReport:
    star_shaped: np.ndarray  # per cell
    chunkiness: np.ndarray  # per cell: min distance centroid -> edge line / h_K

    @property
    def all_star_shaped(self) -> bool:
        return bool(self.star_shaped.all())

    @property
    def min_chunkiness(self) -> float:
        return float(self.chunkiness.min())


def cell_star_margin(coords: np.ndarray) -> tuple[bool, float]:
    """Star-shapedness w.r.t. the centroid: the centroid must lie strictly in
    every edge's inward half-plane (margin 1e-10 h_K)."""
    _, c = polygon_area_centroid(coords)
    h = polygon_diameter(coords)
    nxt = np.roll(coords, -1, axis=0)
    d = nxt - coords
    lengths = np.hypot(d[:, 0], d[:, 1])
    outward = np.column_stack([d[:, 1], -d[:, 0]]) / lengths[:, None]
    dist = ((coords - c) * outward).sum(axis=1)  # centroid -> edge line, positive inside
    ok = bool((dist >= 1e-10 * h).all())
    return ok, float(dist.min() / h)


def validate_star_shaped(mesh: PolyMesh) -> StarShapedReport:
    flags, chunk = [], []
    for loop in mesh.cells:
        ok, ch = cell_star_margin(mesh.vertices[loop])
        flags.append(ok)
        chunk.append(ch)
    return StarShapedReport(np.array(flags), np.array(chunk))


# -- I/O -------------------------------------------------------------------------


def mesh_to_json(mesh: PolyMesh) -> str:
    verts = ",\n    ".join(f"[{x:.17g}, {y:.17g}]" for x, y in mesh.vertices)
    cells = ",\n    ".join("[" + ", ".join(str(int(i)) for i in c) + "]" for c in mesh.cells)
    return '{\n  "vertices": [\n    ' + verts + '\n  ],\n  "cells": [\n    ' + cells + "\n  ]\n}\n"


def mesh_from_dict(data: dict, require_star_shaped: bool = True) -> PolyMesh:
    try:
        vertices = np.array(data["vertices"], dtype=float)
        cells = [list(map(int, c)) for c in data["cells"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MeshError(f"malformed mesh data: {exc}") from exc
    mesh = PolyMesh(vertices, cells)
    if require_star_shaped:
        report = validate_star_shaped(mesh)
        if not report.all_star_shaped:
            bad = int(np.flatnonzero(~report.star_shaped)[0])
            raise MeshError(f"cell {bad} is not star-shaped with respect to its centroid")
    return mesh


def save_mesh(mesh: PolyMesh, path) -> None:
    Path(path).write_text(mesh_to_json(mesh))


def load_mesh(path, require_star_shaped: bool = True) -> PolyMesh:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MeshError(f"{path}: invalid JSON ({exc})") from exc
    return mesh_from_dict(data, require_star_shaped)


# -- generators ------------------------------------------------------------------

MESH_KINDS = ("squares", "triangles", "polygons-perturbed")


def _square_grid(N: int):
    xs = np.linspace(0.0, 1.0, N + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (N + 1) + i

    return vertices, vid


def _squares(N: int):
    vertices, vid = _square_grid(N)
    cells = [[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)] for j in range(N) for i in range(N)]
    return vertices, cells


def _triangles(N: int):
    vertices, vid = _square_grid(N)
    cells = []
    for j in range(N):
        for i in range(N):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            cells += [[a, b, c], [a, c, d]]
    return vertices, cells


def _bricks(N: int):
    """Staggered brick rows: interior cells are hexagons (two straight angles
    that become genuine corners once perturbed), row ends are quadrilaterals."""

    def breaks(row):
        if row % 2 == 0:
            return [i / N for i in range(N + 1)]
        return [0.0] + [(2 * i + 1) / (2 * N) for i in range(N)] + [1.0]

    vertices: list[tuple[float, float]] = []
    index: dict[tuple[int, int], int] = {}
    lines = []
    for j in range(N + 1):
        xs = set()
        if j > 0:
            xs.update(breaks(j - 1))
        if j < N:
            xs.update(breaks(j))
        pts = sorted(xs)
        for x in pts:
            index[(j, round(x * 2 * N))] = len(vertices)
            vertices.append((x, j / N))
        lines.append(pts)
    cells = []
    for j in range(N):
        b = breaks(j)
        for x0, x1 in zip(b[:-1], b[1:]):
            lo0, hi0 = round(x0 * 2 * N), round(x1 * 2 * N)
            bottom = [index[(j, round(x * 2 * N))] for x in lines[j] if lo0 <= round(x * 2 * N) <= hi0]
            top = [index[(j + 1, round(x * 2 * N))] for x in lines[j + 1] if lo0 <= round(x * 2 * N) <= hi0]
            cells.append(bottom + top[::-1])
    return np.array(vertices), cells


def make_grid(kind: str, N: int, perturb: float = 0.0, seed: int = 0) -> PolyMesh:
    """Mesh of the unit square.

    ``perturb`` moves every interior vertex by a distance of at most
    ``perturb / N``, drawn uniformly from a disc with a generator seeded by
    ``seed``. A perturbation producing
    a cell that is not star-shaped w.r.t. its centroid is retried with half the
    magnitude, up to 5 times.
    """
    if N < 1:
        raise MeshError("N must be >= 1")
    if not 0.0 <= perturb <= 0.3:
        raise MeshError("perturb must lie in [0, 0.3]")
    builders = {"squares": _squares, "triangles": _triangles, "polygons-perturbed": _bricks}
    if kind not in builders:
        raise MeshError(f"unknown mesh kind {kind!r}; expected one of {MESH_KINDS}")
    vertices, cells = builders[kind](N)
    if perturb == 0.0:
        return PolyMesh(vertices, cells)

    on_boundary = (np.abs(vertices) < 1e-14).any(axis=1) | (np.abs(vertices - 1.0) < 1e-14).any(axis=1)
    rng = np.random.default_rng(seed)
    angle = rng.uniform(0.0, 2.0 * np.pi, size=len(vertices))
    radius = np.sqrt(rng.uniform(0.0, 1.0, size=len(vertices)))
    shift = radius[:, None] * np.column_stack([np.cos(angle), np.sin(angle)])
    shift[on_boundary] = 0.0
    amount = perturb / N
    for _ in range(6):
        moved = vertices + amount * shift
        try:
            mesh = PolyMesh(moved, cells)
        except MeshError:
            mesh = None
        if mesh is not None and validate_star_shaped(mesh).all_star_shaped:
            return mesh
        amount *= 0.5
    raise MeshError(f"perturbation of {kind} mesh failed after 5 retries")
