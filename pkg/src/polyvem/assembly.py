"""Global dof numbering, assembly, boundary conditions, solve and error norms."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dofs import ANALYTIC_QUAD_DEGREE, dof_evaluate, dof_layout, edge_counts
from .element import ElementMatrices, element_matrices, project
from .errors import SolverError
from .mesh import PolyMesh
from .polynomials import basis_size, monomial_derivatives
from .quadrature import polygon_rule

DENSE_LIMIT = 6000
RESIDUAL_TOL = 1e-8


@dataclass
class GlobalDofMap:
    """Global numbering: all vertex dofs, then edge dofs, then cell interiors.

    Vertex dofs are stored unscaled (d^alpha v(delta)); the local dof of
    cell K equals ``scale * global`` with scale h_K^j. Edge dofs are defined in
    the global edge frame and shared verbatim, so every sign is +1.
    """

    mesh: PolyMesh
    m: int
    k: int
    per_vertex: int
    per_edge: int
    per_cell: int
    size: int
    boundary: np.ndarray  # bool mask over global dofs
    local_index: list[np.ndarray]  # per cell: global index of each local dof
    local_sign: list[np.ndarray]
    local_scale: list[np.ndarray]

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @property
    def n_free(self) -> int:
        return int((~self.boundary).sum())

    def vertex_block(self, v: int) -> np.ndarray:
        return np.arange(v * self.per_vertex, (v + 1) * self.per_vertex)

    def edge_block(self, e: int) -> np.ndarray:
        start = self.mesh.n_vertices * self.per_vertex + e * self.per_edge
        return np.arange(start, start + self.per_edge)

    def cell_block(self, c: int) -> np.ndarray:
        start = self.mesh.n_vertices * self.per_vertex + self.mesh.n_edges * self.per_edge + c * self.per_cell
        return np.arange(start, start + self.per_cell)

    def to_local(self, c: int, x: np.ndarray) -> np.ndarray:
        return self.local_sign[c] * self.local_scale[c] * x[self.local_index[c]]


def build_dof_map(mesh: PolyMesh, m: int, k: int) -> GlobalDofMap:
    per_vertex = m * (m - 1) // 2
    per_edge = sum(edge_counts(m, k))
    per_cell = basis_size(k - 2 * m)
    nv, ne, nc = mesh.n_vertices, mesh.n_edges, mesh.n_cells
    size = nv * per_vertex + ne * per_edge + nc * per_cell

    boundary = np.zeros(size, dtype=bool)
    boundary[: nv * per_vertex] = np.repeat(mesh.boundary_vertices, per_vertex)
    boundary[nv * per_vertex : nv * per_vertex + ne * per_edge] = np.repeat(mesh.boundary_edges, per_edge)

    vertex_powers = np.concatenate([np.full(j + 1, j) for j in range(m - 1)])
    dmap = GlobalDofMap(mesh, m, k, per_vertex, per_edge, per_cell, size, boundary, [], [], [])
    for c, loop in enumerate(mesh.cells):
        h = mesh.cell_geometry(c).diameter
        idx = [dmap.vertex_block(v) for v in loop]
        idx += [dmap.edge_block(e) for e in mesh.cell_edges[c]]
        idx.append(dmap.cell_block(c))
        index = np.concatenate(idx)
        scale = np.ones(len(index))
        scale[: len(loop) * per_vertex] = np.tile(h**vertex_powers, len(loop))
        dmap.local_index.append(index)
        dmap.local_sign.append(np.ones(len(index)))
        dmap.local_scale.append(scale)
    return dmap


@dataclass
class LinearSystem:
    dofmap: GlobalDofMap
    matrix: sp.csr_matrix
    rhs: np.ndarray
    elements: list[ElementMatrices] = field(repr=False)

    @property
    def free(self) -> np.ndarray:
        return self.dofmap.free

    def reduced(self):
        f = self.free
        return self.matrix[f][:, f], self.rhs[f]


def assemble(mesh: PolyMesh, m: int, k: int, f=None, dofmap: GlobalDofMap | None = None) -> LinearSystem:
    """Scatter every element matrix and load vector into the global system.

    Cells are processed in index order, so the summation is deterministic.
    """
    dofmap = dofmap or build_dof_map(mesh, m, k)
    rows, cols, vals = [], [], []
    rhs = np.zeros(dofmap.size)
    elements = []
    for c in range(mesh.n_cells):
        em = element_matrices(mesh.cell_geometry(c), m, k, f)
        elements.append(em)
        t = dofmap.local_sign[c] * dofmap.local_scale[c]
        g = dofmap.local_index[c]
        rows.append(np.repeat(g, len(g)))
        cols.append(np.tile(g, len(g)))
        vals.append((t[:, None] * em.A * t[None, :]).ravel())
        np.add.at(rhs, g, t * em.b)
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dofmap.size, dofmap.size)
    ).tocsr()
    return LinearSystem(dofmap, A, rhs, elements)


@dataclass
class SolveResult:
    x: np.ndarray
    residual: float
    method: str


def _cholesky_solve(K: np.ndarray, r: np.ndarray) -> np.ndarray:
    c, info = sla.lapack.dpotrf(K, lower=0, clean=1)
    if info > 0:
        raise SolverError(f"non-positive pivot at free dof {info - 1}: matrix is not positive definite")
    if info < 0:
        raise SolverError(f"dpotrf argument error {info}")
    return sla.cho_solve((c, False), r)


def solve_reduced(K, r: np.ndarray) -> tuple[np.ndarray, str]:
    n = K.shape[0]
    if n == 0:
        return np.zeros(0), "empty"
    if n <= DENSE_LIMIT:
        Kd = K.toarray() if sp.issparse(K) else np.asarray(K)
        x = _cholesky_solve(Kd, r)
        x += _cholesky_solve(Kd, r - Kd @ x)  # one step of iterative refinement
        return x, "dense-cholesky"
    lu = spla.splu(sp.csc_matrix(K))
    x = lu.solve(r)
    x += lu.solve(r - K @ x)
    return x, "sparse-lu"


def solve(system: LinearSystem, boundary_values: np.ndarray | None = None, check: bool = False) -> SolveResult:
    """Solve with boundary dofs fixed (zero unless ``boundary_values`` is given)."""
    dm = system.dofmap
    x = np.zeros(dm.size)
    if boundary_values is not None:
        x[dm.boundary] = boundary_values[dm.boundary]
    f = dm.free
    A = system.matrix
    r = system.rhs[f] - A[f] @ x
    K = A[f][:, f]
    xf, method = solve_reduced(K, r)
    x[f] = xf
    denom = np.linalg.norm(r)
    residual = float(np.linalg.norm(K @ xf - r) / denom) if denom > 0 else float(np.linalg.norm(K @ xf))
    if check and residual > RESIDUAL_TOL:
        raise SolverError(f"relative residual {residual:.2e} exceeds {RESIDUAL_TOL:g}")
    return SolveResult(x, residual, method)


def interpolate(dofmap: GlobalDofMap, field) -> np.ndarray:
    """Global dof vector of a smooth field or Polynomial (the global interpolant)."""
    mesh = dofmap.mesh
    x = np.zeros(dofmap.size)
    for c in range(mesh.n_cells):
        layout = dof_layout(mesh.cell_geometry(c), dofmap.m, dofmap.k)
        local = dof_evaluate(layout, field)
        x[dofmap.local_index[c]] = local / (dofmap.local_sign[c] * dofmap.local_scale[c])
    return x


def inhomogeneous_bc_solve(mesh: PolyMesh, m: int, k: int, f, g, check: bool = False):
    """Solve with boundary dofs set to the dofs of ``g``. Returns (SolveResult, system)."""
    system = assemble(mesh, m, k, f)
    gvals = interpolate(system.dofmap, g) if g is not None else None
    return solve(system, gvals, check=check), system


def projections(system: LinearSystem, x: np.ndarray) -> list:
    dm = system.dofmap
    return [project(em.Pi, dm.to_local(c, x), em.cell) for c, em in enumerate(system.elements)]


def error_norms(system: LinearSystem, x: np.ndarray, u, quad_degree: int | None = None) -> list[float]:
    """[e_0, ..., e_m] with e_s^2 = sum_K |u - Pi^K u_h|_{s,K}^2."""
    m, k = system.dofmap.m, system.dofmap.k
    qdeg = quad_degree or max(ANALYTIC_QUAD_DEGREE, 2 * k)
    sq = np.zeros(m + 1)
    for c, em in enumerate(system.elements):
        cell = em.cell
        coeffs = em.Pi @ system.dofmap.to_local(c, x)
        pts, w = polygon_rule(cell.vertices, qdeg, cell.centroid)
        for s in range(m + 1):
            for cc in range(s + 1):
                alpha = (s - cc, cc)
                uh = monomial_derivatives(pts, cell.centroid, cell.diameter, k, alpha) @ coeffs
                ue = np.asarray(u.partial(alpha, pts[:, 0], pts[:, 1]), dtype=float) if u is not None else 0.0
                sq[s] += math.comb(s, cc) * float(w @ (ue - uh) ** 2)
    return [float(v) for v in np.sqrt(sq)]


def solution_to_dict(system: LinearSystem, x: np.ndarray) -> dict:
    return {
        "m": system.dofmap.m,
        "k": system.dofmap.k,
        "dofs": np.asarray(x).tolist(),
        "cells": [p.coeffs.tolist() for p in projections(system, x)],
    }


def dump_solution(system: LinearSystem, x: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        json.dump(solution_to_dict(system, x), fh)
