"""Dof functionals for (grad^m p, grad^m phi)_K via the 2D generalized Green identity.

For p in P_k(K), integrating by parts m times on K gives

    (grad^m p, grad^m phi)_K = ((-Delta)^m p, phi)_K
        + sum_e sum_{i<m} (-1)^(m-1-i) (grad^i d_nuK Delta^(m-1-i) p, grad^i phi)_e,

and each edge term is reduced further along the edge (repeated 1D integration
by parts in the tangential direction) into edge moments of normal
derivatives of phi plus point values of derivatives of phi at the edge ends.
Every resulting quantity is one of the element dofs, so the pairing becomes a
row vector acting on the dof vector chi(phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dofs import DofLayout
from .errors import DegreeError
from .polynomials import (
    EdgePolynomial,
    Polynomial,
    TensorPoly,
    basis_size,
    derivative_matrix,
    directional_weights,
    grad_tensor,
    laplacian,
    laplacian_power,
    monomial_derivatives,
    restriction_matrix,
)
from .quadrature import segment_rule


@dataclass
class EdgePairing:
    """The edge integral (tau, grad^order phi)_e for a local edge of the cell."""

    edge: int
    order: int
    tau: TensorPoly  # components are EdgePolynomials on the edge


def reduce_edge_pairing(pairing: EdgePairing, layout: DofLayout) -> np.ndarray:
    cell = layout.cell
    e, i, tau = pairing.edge, pairing.order, pairing.tau
    if i > layout.m - 1:
        raise DegreeError(f"edge pairing of order {i} exceeds m - 1 = {layout.m - 1}")
    frame = cell.edge_frames[e]
    nu, t = frame.normal, frame.tangent
    length, h = frame.length, cell.diameter
    v_start, v_end = cell.edge_ends[e]
    c = np.zeros(layout.size)

    for ell in range(i + 1):
        r = i - ell
        # tau : grad^i phi = sum_ell C(i, ell) tau(nu^ell, t^r) d_nu^ell d_t^r phi
        T: EdgePolynomial = math.comb(i, ell) * tau.frame_component(nu, ell, t, r)

        vol = np.trim_zeros(T.derivative(r).coeffs, "b") * (-1) ** r
        if len(vol) > layout.counts[ell]:
            raise DegreeError(
                f"edge {e}: normal order {ell} needs moments up to degree {len(vol) - 1}, "
                f"only {layout.counts[ell] - 1} available"
            )
        base = layout.edge_dof(e, ell, 0)
        c[base : base + len(vol)] += vol * length ** (1 - ell)

        # endpoint terms  sum_j (-1)^j [d_t^j T * d_t^(r-1-j) d_nu^ell phi]_start^end
        for j in range(r):
            Tj = T.derivative(j)
            d = ell + r - 1 - j
            w = directional_weights(nu, ell, t, r - 1 - j) * h ** (-d)
            for vloc, s, sgn in ((v_end, 0.5, 1.0), (v_start, -0.5, -1.0)):
                val = sgn * (-1) ** j * float(Tj(s))
                if val == 0.0:
                    continue
                first = layout.vertex_dof(vloc, d, 0)
                c[first : first + d + 1] += val * w
    return c


def pairing_functional(p: Polynomial, layout: DofLayout) -> np.ndarray:
    """Row vector c with c . chi(phi) = (grad^m p, grad^m phi)_K."""
    cell, m = layout.cell, layout.m
    if p.h != cell.diameter or not np.array_equal(p.center, cell.centroid):
        raise ValueError("p must be expressed in the cell's scaled monomial basis")
    if p.degree > layout.k:
        raise DegreeError(f"deg p = {p.degree} exceeds k = {layout.k}")
    c = np.zeros(layout.size)

    interior = laplacian_power(p, m)
    if interior.degree >= 0:
        n = basis_size(interior.degree)
        if n > layout.n_interior:
            raise DegreeError("(-Delta)^m p exceeds the interior moment space")
        c[layout.n_boundary : layout.n_boundary + n] += cell.area * interior.coeffs

    # Delta^(m-1-i) p for i = m-1, ..., 0
    laps = [p]
    for _ in range(m - 1):
        laps.append(laplacian(laps[-1]))
    for e, frame in enumerate(cell.edge_frames):
        nu_k = cell.outward_normal(e)
        for i in range(m):
            w = laps[m - 1 - i].directional(nu_k)
            if w.degree < 0:
                continue
            tau = grad_tensor(w, i).restrict(frame)
            c += (-1) ** (m - 1 - i) * reduce_edge_pairing(EdgePairing(e, i, tau), layout)
    return c


def pairing_matrix(layout: DofLayout) -> np.ndarray:
    """All pairing functionals at once: row r is ``pairing_functional(m_r)``.

    The same reduction as :func:`pairing_functional`, carried out on
    coefficient matrices (one column per scaled monomial) instead of on one
    polynomial at a time.
    """
    cell, m, k = layout.cell, layout.m, layout.k
    h, n = cell.diameter, layout.n_k
    out = np.zeros((n, layout.size))

    Dx, Dy = derivative_matrix(k, (1, 0), h), derivative_matrix(k, (0, 1), h)
    lap = Dx @ Dx + Dy @ Dy
    lap_pow = [np.eye(n)]
    for _ in range(m):
        lap_pow.append(lap @ lap_pow[-1])
    if layout.n_interior:
        interior = (-1) ** m * lap_pow[m][: layout.n_interior]
        out[:, layout.n_boundary :] = cell.area * interior.T

    # Cartesian partials of order i of d_nuK Delta^(m-1-i), per edge
    dx_pow = [np.eye(n)]
    dy_pow = [np.eye(n)]
    for _ in range(m):
        dx_pow.append(Dx @ dx_pow[-1])
        dy_pow.append(Dy @ dy_pow[-1])
    ends = {0.5: 0.5 ** np.arange(k + 1), -0.5: (-0.5) ** np.arange(k + 1)}

    for e, frame in enumerate(cell.edge_frames):
        nu, t, length = frame.normal, frame.tangent, frame.length
        nu_k = cell.outward_normal(e)
        v_start, v_end = cell.edge_ends[e]
        R = restriction_matrix(frame, cell.centroid, h, k)
        Ds = np.diag(np.arange(1, k + 1) / length, 1)
        for i in range(m):
            sign = (-1) ** (m - 1 - i)
            W = (nu_k[0] * Dx + nu_k[1] * Dy) @ lap_pow[m - 1 - i]
            partials = [R @ dx_pow[i - c] @ dy_pow[c] @ W for c in range(i + 1)]
            for ell in range(i + 1):
                r = i - ell
                w = directional_weights(nu, ell, t, r)
                T = math.comb(i, ell) * sum(w[c] * partials[c] for c in range(i + 1) if w[c] != 0.0)
                if np.isscalar(T):
                    continue
                vol = (-1) ** r * np.linalg.matrix_power(Ds, r) @ T
                cnt = layout.counts[ell]
                if np.any(vol[cnt:]):
                    raise DegreeError(f"edge {e}: normal order {ell} exceeds the available edge moments")
                base = layout.edge_dof(e, ell, 0)
                out[:, base : base + cnt] += sign * length ** (1 - ell) * vol[:cnt].T

                Tj = T
                for j in range(r):
                    d = ell + r - 1 - j
                    wv = directional_weights(nu, ell, t, r - 1 - j) * h ** (-d)
                    for vloc, s, sgn in ((v_end, 0.5, 1.0), (v_start, -0.5, -1.0)):
                        vals = sign * sgn * (-1) ** j * (ends[s] @ Tj)
                        first = layout.vertex_dof(vloc, d, 0)
                        out[:, first : first + d + 1] += vals[:, None] * wv[None, :]
                    Tj = Ds @ Tj
    return out


def constraint_functionals(layout: DofLayout) -> np.ndarray:
    """Rows of the projection constraints as dof functionals.

    Rows, in order: for j = 0..m-2 the graded-lex components of
    sum_delta d^alpha phi(delta); then the components (|alpha| = m-1) of
    sum_e |e|^-1 int_e d^alpha phi.
    """
    cell, m = layout.cell, layout.m
    h = cell.diameter
    C = np.zeros((basis_size(m - 1), layout.size))
    row = 0
    for j in range(m - 1):
        for cc in range(j + 1):
            for v in range(layout.n_vertices):
                C[row, layout.vertex_dof(v, j, cc)] = h ** (-j)
            row += 1

    d = m - 1
    for e, frame in enumerate(cell.edge_frames):
        nu, t = frame.normal, frame.tangent
        length = frame.length
        v_start, v_end = cell.edge_ends[e]
        # d_x = nu_x d_nu + t_x d_t, d_y = nu_y d_nu + t_y d_t
        for cc in range(d + 1):
            # weights of d_nu^(d-b) d_t^b in d^alpha, alpha = (d - cc, cc)
            frame_w = directional_weights((nu[0], t[0]), d - cc, (nu[1], t[1]), cc)
            for b in range(d + 1):
                wb = frame_w[b]
                if wb == 0.0:
                    continue
                a = d - b  # normal order
                if b == 0:
                    # int_e d_nu^(m-1) phi = |e|^(2-m) * dof(e, m-1, 0)
                    C[row + cc, layout.edge_dof(e, a, 0)] += wb * length ** (1 - a) / length
                else:
                    # int_e d_t (d_nu^a d_t^(b-1) phi) = g(end) - g(start)
                    g = directional_weights(nu, a, t, b - 1) * h ** (-(d - 1)) * wb / length
                    for vloc, sgn in ((v_end, 1.0), (v_start, -1.0)):
                        first = layout.vertex_dof(vloc, d - 1, 0)
                        C[row + cc, first : first + d] += sgn * g
    return C


def constraint_values(layout: DofLayout) -> np.ndarray:
    """The same constraints evaluated directly on the scaled monomials (top rows of G)."""
    cell, m, k = layout.cell, layout.m, layout.k
    center, h = cell.centroid, cell.diameter
    rows = []
    for j in range(m - 1):
        for cc in range(j + 1):
            rows.append(monomial_derivatives(cell.vertices, center, h, k, (j - cc, cc)).sum(axis=0))
    s, w = segment_rule(k)
    d = m - 1
    for cc in range(d + 1):
        total = np.zeros(basis_size(k))
        for frame in cell.edge_frames:
            pts = frame.point(s)
            total += w @ monomial_derivatives(pts, center, h, k, (d - cc, cc))
        rows.append(total)
    return np.array(rows)
