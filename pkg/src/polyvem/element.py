"""Element matrices: D, B, G, Pi = G^-1 B, stabilization, stiffness and load."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .dofs import ANALYTIC_QUAD_DEGREE, DofLayout, dof_layout, dof_rows, monomial_dofs
from .errors import SingularElementError
from .geometry import CellGeometry
from .green import constraint_functionals, constraint_values, pairing_matrix
from .polynomials import Polynomial, basis_size, gram_matrix, monomial_derivatives
from .quadrature import polygon_rule


@dataclass
class ElementMatrices:
    layout: DofLayout
    D: np.ndarray
    B: np.ndarray
    G: np.ndarray
    Pi: np.ndarray
    S: np.ndarray
    A: np.ndarray
    b: np.ndarray
    stiffness: np.ndarray  # (grad^m m_i, grad^m m_j)_K over all of M_k

    @property
    def cell(self) -> CellGeometry:
        return self.layout.cell

    @property
    def m(self) -> int:
        return self.layout.m

    @property
    def k(self) -> int:
        return self.layout.k

    @property
    def G11(self) -> np.ndarray:
        n = self.layout.n_kernel
        return self.G[:n, :n]

    @property
    def G12(self) -> np.ndarray:
        n = self.layout.n_kernel
        return self.G[:n, n:]

    @property
    def G22(self) -> np.ndarray:
        n = self.layout.n_kernel
        return self.G[n:, n:]

    def to_dict(self) -> dict:
        return {
            "cell": self.cell.name,
            "m": self.m,
            "k": self.k,
            **{name: getattr(self, name).tolist() for name in ("D", "B", "G", "Pi", "A", "b")},
        }


def rhs_regime(m: int, k: int) -> int:
    """Load-vector case: 1 for k <= 2m-1, 2 for 2m <= k <= 3m-2, 3 for k >= 3m-1."""
    if k <= 2 * m - 1:
        return 1
    if k <= 3 * m - 2:
        return 2
    return 3


def energy_matrix(cell: CellGeometry, m: int, k: int) -> np.ndarray:
    """(grad^m m_i, grad^m m_j)_K by quadrature, i, j over M_k."""
    pts, w = polygon_rule(cell.vertices, 2 * max(k - m, 0), cell.centroid)
    out = np.zeros((basis_size(k), basis_size(k)))
    for c in range(m + 1):
        V = monomial_derivatives(pts, cell.centroid, cell.diameter, k, (m - c, c))
        out += math.comb(m, c) * (V * w[:, None]).T @ V
    return out


def moments(cell: CellGeometry, f, degree: int) -> np.ndarray:
    """(f, m_i)_K for the scaled monomials m_i of ``degree``; ``f`` may be None."""
    n = basis_size(degree)
    if f is None or n == 0:
        return np.zeros(n)
    if isinstance(f, Polynomial):
        qdeg = max(f.degree, 0) + degree
    elif getattr(f, "is_polynomial", False) and f.degree is not None:
        qdeg = max(f.degree, 0) + degree
    else:
        qdeg = max(ANALYTIC_QUAD_DEGREE, 2 * degree)
    pts, w = polygon_rule(cell.vertices, qdeg, cell.centroid)
    V = monomial_derivatives(pts, cell.centroid, cell.diameter, degree)
    return V.T @ (w * np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float))


def _lu(G: np.ndarray, cell: CellGeometry):
    lu, piv = sla.lu_factor(G, check_finite=True)
    diag = np.abs(np.diag(lu))
    if not diag.min() > np.finfo(float).eps * diag.max():
        raise SingularElementError(f"projection matrix G is singular on cell {cell.name or cell.vertex_ids}")
    return lu, piv


def load_vector(em_parts: dict, layout: DofLayout, f) -> np.ndarray:
    cell, m, k = layout.cell, layout.m, layout.k
    Pi, D = em_parts["Pi"], em_parts["D"]
    if f is None:
        return np.zeros(layout.size)
    regime = rhs_regime(m, k)
    if regime == 1:
        return Pi.T @ moments(cell, f, k)

    F = moments(cell, f, k)
    nt = basis_size(k - 2 * m)
    full = gram_matrix(cell, k)
    Mt = full[:nt, :nt]
    tail = np.zeros(layout.size)
    tail[layout.n_boundary :] = np.linalg.solve(Mt, F[:nt])
    if regime == 3:
        return cell.area * tail

    nb = basis_size(m - 1)
    Mbar, M = full[:nb, :nb], full[:nb, :]
    coarse = M.T @ np.linalg.solve(Mbar, F[:nb])
    residual = np.eye(layout.size) - D @ Pi
    return Pi.T @ coarse + cell.area * residual.T @ tail


def element_matrices(cell: CellGeometry, m: int, k: int, f=None) -> ElementMatrices:
    """Assemble every local matrix of the (m, k) element on ``cell``.

    ``f`` is the load: a ScalarField, a Polynomial in any basis, or None for zero.
    """
    layout = dof_layout(cell, m, k)
    nb, nk = layout.n_kernel, layout.n_k

    D = monomial_dofs(layout)
    B = np.empty((nk, layout.size))
    B[:nb] = constraint_functionals(layout)
    B[nb:] = pairing_matrix(layout)[nb:]

    stiff = energy_matrix(cell, m, k)
    G = np.empty((nk, nk))
    G[:nb] = constraint_values(layout)
    G[nb:] = stiff[nb:]

    Pi = sla.lu_solve(_lu(G, cell), B)

    S = np.zeros((layout.size, layout.size))
    S[np.diag_indices(layout.n_boundary)] = cell.diameter ** (2 - 2 * m)
    residual = np.eye(layout.size) - D @ Pi
    A = Pi.T @ stiff @ Pi + residual.T @ S @ residual
    A = 0.5 * (A + A.T)

    b = load_vector({"Pi": Pi, "D": D}, layout, f)
    return ElementMatrices(layout, D, B, G, Pi, S, A, b, stiff)


def project(Pi: np.ndarray, dofs, cell: CellGeometry) -> Polynomial:
    """Pi^K phi as a Polynomial in the scaled basis of ``cell``."""
    coeffs = Pi @ np.asarray(dofs, dtype=float)
    return Polynomial(coeffs, cell.centroid, cell.diameter, math.isqrt(8 * len(coeffs) + 1) // 2 - 1)


def serendipity_check(cell: CellGeometry, m: int, k: int, k_s: int, selected) -> dict:
    """Rank of [chi_sigma(i)(m_j)] over the scaled monomials of degree k_s."""
    layout = dof_layout(cell, m, k)
    selected = list(selected)
    n = basis_size(k_s)
    if not selected:
        return {"rank": 0, "size": n, "satisfied": n == 0}

    def derivative(alpha, pts):
        return monomial_derivatives(pts, cell.centroid, cell.diameter, k_s, alpha)

    rows = dof_rows(layout, derivative, n, k + k_s)[selected]
    rank = int(np.linalg.matrix_rank(rows))
    return {"rank": rank, "size": n, "satisfied": rank == n}


def dump_element(em: ElementMatrices, path) -> None:
    with open(path, "w") as fh:
        json.dump(em.to_dict(), fh)
