"""Local degrees of freedom of the H^m-nonconforming virtual element (m > 2).

For a cell K with parameters (m, k) the dofs, in canonical order, are

1. per vertex delta:   h_K^j d^alpha v(delta),  j = 0..m-2, |alpha| = j (graded-lex);
2. per edge e, a = 0..m-1, q = 0..k-2m+1+a:
                       |e|^(a-1) int_e (d^a v / d nu_e^a) s^q ds,
   with nu_e the edge's global reference normal and s the edge coordinate;
3. interior:           |K|^-1 int_K v m_q,  m_q in M_{k-2m}(K).

Boundary dofs (blocks 1-2) precede interior ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError
from .geometry import CellGeometry
from .polynomials import Polynomial, basis_size, directional_weights, monomial_derivatives
from .quadrature import polygon_rule, segment_rule

ANALYTIC_QUAD_DEGREE = 20


def check_parameters(m: int, k: int) -> None:
    if m <= 2:
        raise ParameterError(f"m = {m}: this element requires m > n = 2")
    if k < m:
        raise ParameterError(f"k = {k} < m = {m}: the element requires k >= m")


def edge_counts(m: int, k: int) -> tuple[int, ...]:
    """Number of edge moments for each normal-derivative order a = 0..m-1."""
    return tuple(max(0, k - 2 * m + 2 + a) for a in range(m))


@dataclass(frozen=True)
class DofDescriptor:
    kind: str  # "vertex" | "edge" | "interior"
    entity: int  # local vertex / local edge / 0
    order: int  # derivative order j (vertex) or normal order a (edge)
    index: int  # component (vertex), edge monomial q, interior monomial q
    scale: float


@dataclass(eq=False)
class DofLayout:
    cell: CellGeometry
    m: int
    k: int
    per_vertex: int = field(init=False)
    counts: tuple[int, ...] = field(init=False)
    per_edge: int = field(init=False)
    n_interior: int = field(init=False)

    def __post_init__(self):
        check_parameters(self.m, self.k)
        self.per_vertex = self.m * (self.m - 1) // 2
        self.counts = edge_counts(self.m, self.k)
        self.per_edge = sum(self.counts)
        self.n_interior = basis_size(self.k - 2 * self.m)
        self._edge_offsets = np.concatenate([[0], np.cumsum(self.counts)]).astype(int)

    @property
    def n_vertices(self) -> int:
        return self.cell.n_vertices

    @property
    def n_edges(self) -> int:
        return self.cell.n_vertices

    @property
    def n_boundary(self) -> int:
        return self.n_vertices * self.per_vertex + self.n_edges * self.per_edge

    @property
    def size(self) -> int:
        return self.n_boundary + self.n_interior

    @property
    def n_k(self) -> int:
        return basis_size(self.k)

    @property
    def n_kernel(self) -> int:
        return basis_size(self.m - 1)

    def vertex_dof(self, v: int, j: int, c: int) -> int:
        return v * self.per_vertex + basis_size(j - 1) + c

    def edge_dof(self, e: int, a: int, q: int) -> int:
        return self.n_vertices * self.per_vertex + e * self.per_edge + int(self._edge_offsets[a]) + q

    def interior_dof(self, q: int) -> int:
        return self.n_boundary + q

    def descriptors(self) -> list[DofDescriptor]:
        h = self.cell.diameter
        out = []
        for v in range(self.n_vertices):
            for j in range(self.m - 1):
                out += [DofDescriptor("vertex", v, j, c, h**j) for c in range(j + 1)]
        for e, frame in enumerate(self.cell.edge_frames):
            for a, n in enumerate(self.counts):
                out += [DofDescriptor("edge", e, a, q, frame.length ** (a - 1)) for q in range(n)]
        out += [DofDescriptor("interior", 0, 0, q, 1.0 / self.cell.area) for q in range(self.n_interior)]
        return out

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        mask[: self.n_boundary] = True
        return mask


def dof_layout(cell: CellGeometry, m: int, k: int) -> DofLayout:
    return DofLayout(cell, m, k)


# derivative(alpha, points) -> array (npoints, ncols)
Evaluator = Callable[[tuple[int, int], np.ndarray], np.ndarray]


def dof_rows(layout: DofLayout, derivative: Evaluator, ncols: int, quad_degree: int) -> np.ndarray:
    """Apply every dof to ``ncols`` fields given by their derivative evaluator."""
    cell = layout.cell
    m, h = layout.m, cell.diameter
    out = np.zeros((layout.size, ncols))

    for j in range(m - 1):
        for c in range(j + 1):
            vals = derivative((j - c, c), cell.vertices) * h**j
            for v in range(layout.n_vertices):
                out[layout.vertex_dof(v, j, c)] = vals[v]

    s, w = segment_rule(quad_degree)
    for e, frame in enumerate(cell.edge_frames):
        pts = frame.point(s)
        wl = w * frame.length
        nu = frame.normal
        for a, n in enumerate(layout.counts):
            if n == 0:
                continue
            wts = directional_weights(nu, a, nu, 0)
            vals = sum(wts[c] * derivative((a - c, c), pts) for c in range(a + 1) if wts[c] != 0.0)
            vander = s[:, None] ** np.arange(n)
            out[layout.edge_dof(e, a, 0) : layout.edge_dof(e, a, 0) + n] = (
                frame.length ** (a - 1) * (vander * wl[:, None]).T @ vals
            )

    if layout.n_interior:
        pts, wq = polygon_rule(cell.vertices, quad_degree, cell.centroid)
        V = monomial_derivatives(pts, cell.centroid, h, layout.k - 2 * m)
        out[layout.n_boundary :] = (V * wq[:, None]).T @ derivative((0, 0), pts) / cell.area
    return out


def monomial_dofs(layout: DofLayout) -> np.ndarray:
    """The matrix D: column j holds the dofs of the scaled monomial m_j."""
    cell = layout.cell

    def derivative(alpha, pts):
        return monomial_derivatives(pts, cell.centroid, cell.diameter, layout.k, alpha)

    return dof_rows(layout, derivative, layout.n_k, 2 * layout.k)


def dof_evaluate(layout: DofLayout, field, quad_degree: int | None = None) -> np.ndarray:
    """Dof vector of a Polynomial or ScalarField (the local interpolant I_K)."""
    if isinstance(field, Polynomial):
        poly = field

        def derivative(alpha, pts):
            return poly.derive(alpha)(pts[:, 0], pts[:, 1])[:, None]

        degree = quad_degree or max(poly.degree, 0) + layout.k
    else:

        def derivative(alpha, pts):
            return np.asarray(field.partial(alpha, pts[:, 0], pts[:, 1]), dtype=float).reshape(-1, 1)

        if getattr(field, "is_polynomial", False) and field.degree is not None:
            degree = quad_degree or max(field.degree, 0) + layout.k
        else:
            degree = quad_degree or max(ANALYTIC_QUAD_DEGREE, 2 * layout.k)
    return dof_rows(layout, derivative, 1, degree)[:, 0]


def select_dofs(layout: DofLayout, vertex_orders=(), edge_moments=()) -> list[int]:
    """Indices of a dof subset: all vertex dofs of the listed derivative orders,
    and, on every edge, the listed (normal order a, edge monomial q) moments."""
    idx = []
    for v in range(layout.n_vertices):
        for j in vertex_orders:
            idx += [layout.vertex_dof(v, j, c) for c in range(j + 1)]
    for e in range(layout.n_edges):
        for a, q in edge_moments:
            if q >= layout.counts[a]:
                raise ParameterError(f"edge moment (a={a}, q={q}) does not exist for m={layout.m}, k={layout.k}")
            idx.append(layout.edge_dof(e, a, q))
    return sorted(idx)
