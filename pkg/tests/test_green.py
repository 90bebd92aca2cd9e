import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyvem.dofs import dof_evaluate, dof_layout, monomial_dofs
from polyvem.element import energy_matrix
from polyvem.errors import DegreeError
from polyvem.fields import ScalarField
from polyvem.geometry import CellGeometry
from polyvem.green import (
    EdgePairing,
    constraint_functionals,
    constraint_values,
    pairing_functional,
    pairing_matrix,
    reduce_edge_pairing,
)
from polyvem.harness import POLYGON_ZOO
from polyvem.polynomials import EdgePolynomial, Polynomial, TensorPoly, basis_size, multi_indices
from polyvem.quadrature import polygon_rule, segment_rule

SWEEP = [(3, 3), (3, 4), (3, 6), (4, 4), (4, 7)]


def cell_poly(cell, coeffs):
    coeffs = np.asarray(coeffs, dtype=float)
    return Polynomial(coeffs, cell.centroid, cell.diameter)


def monomial(cell, j, k):
    e = np.zeros(basis_size(k))
    e[j] = 1.0
    return cell_poly(cell, e)


def edge_integral(frame, fn, degree=30):
    s, w = segment_rule(degree)
    pts = frame.point(s)
    return frame.length * (w @ fn(pts[:, 0], pts[:, 1]))


def test_zero_tau_gives_zero_functional(zoo):
    cell = zoo["pentagon"]
    layout = dof_layout(cell, 3, 5)
    frame = cell.edge_frames[1]
    tau = TensorPoly(2, [EdgePolynomial([0.0], frame)] * 3)
    assert not np.any(reduce_edge_pairing(EdgePairing(1, 2, tau), layout))


@pytest.mark.parametrize("m, k", [(3, 5), (3, 6), (4, 7)])  # need an a = 0 edge moment
def test_order_zero_unit_tau_is_edge_integral(zoo, m, k):
    cell = zoo["hexagon"]
    layout = dof_layout(cell, m, k)
    D = monomial_dofs(layout)
    for e, frame in enumerate(cell.edge_frames):
        c = reduce_edge_pairing(EdgePairing(e, 0, TensorPoly(0, [EdgePolynomial([1.0], frame)])), layout)
        nz = np.flatnonzero(c)
        assert list(nz) == [layout.edge_dof(e, 0, 0)]
        assert c[nz[0]] == pytest.approx(frame.length)
        for j in range(basis_size(k)):
            p = monomial(cell, j, k)
            assert c @ D[:, j] == pytest.approx(edge_integral(frame, p), abs=1e-12)


@pytest.mark.parametrize("m, k", [(3, 4), (3, 6), (4, 6)])  # need an a = 1 edge moment
def test_order_one_normal_tau_is_flux(zoo, m, k, rng):
    cell = zoo["pentagon"]
    layout = dof_layout(cell, m, k)
    D = monomial_dofs(layout)
    for e, frame in enumerate(cell.edge_frames):
        nu = cell.outward_normal(e)
        tau = TensorPoly(1, [EdgePolynomial([nu[0]], frame), EdgePolynomial([nu[1]], frame)])
        c = reduce_edge_pairing(EdgePairing(e, 1, tau), layout)
        coeffs = rng.standard_normal(basis_size(k))
        p = cell_poly(cell, coeffs)
        flux = p.directional(nu)
        exact = edge_integral(frame, flux)
        assert c @ D @ coeffs == pytest.approx(exact, rel=1e-10, abs=1e-10)


def test_edge_pairing_order_limit(zoo):
    cell = zoo["square"]
    layout = dof_layout(cell, 3, 5)
    frame = cell.edge_frames[0]
    tau = TensorPoly(3, [EdgePolynomial([1.0], frame)] * 4)
    with pytest.raises(DegreeError):
        reduce_edge_pairing(EdgePairing(0, 3, tau), layout)


@pytest.mark.parametrize("m", [3, 4])
def test_low_degree_polynomials_have_zero_pairing(zoo, m):
    cell = zoo["hexagon"]
    layout = dof_layout(cell, m, m + 2)
    for j in range(basis_size(m - 1)):
        assert np.abs(pairing_functional(monomial(cell, j, m - 1), layout)).max() < 1e-12


@pytest.mark.parametrize("m, k", SWEEP)
def test_pairing_oracle(zoo, m, k):
    for cell in zoo.values():
        layout = dof_layout(cell, m, k)
        D = monomial_dofs(layout)
        stiff = energy_matrix(cell, m, k)
        scale = np.abs(stiff).max()
        C = np.array([pairing_functional(monomial(cell, j, k), layout) for j in range(basis_size(k))])
        assert np.abs(C @ D - stiff).max() <= 1e-10 * scale, cell.name
        assert np.abs(C - pairing_matrix(layout)).max() <= 1e-12 * np.abs(C).max()


def test_triangle_cubic_structure(zoo):
    cell = zoo["triangle"]
    layout = dof_layout(cell, 3, 3)
    assert layout.n_interior == 0
    p = Polynomial.monomial((3, 0), cell.centroid, cell.diameter)
    c = pairing_functional(p, layout)
    assert c.shape == (layout.n_boundary,)
    assert np.any(c)
    stiff = energy_matrix(cell, 3, 3)
    assert c @ monomial_dofs(layout)[:, 6] == pytest.approx(stiff[6, 6], rel=1e-12)


def test_pairing_against_smooth_non_polynomial(zoo):
    """The reduction is an identity for any smooth phi, not only polynomials."""
    m, k = 3, 6
    phi = ScalarField(lambda a, x, y: (1.3) ** a[0] * (-0.7) ** a[1] * np.exp(1.3 * x - 0.7 * y), name="exp")
    for cell in zoo.values():
        layout = dof_layout(cell, m, k)
        chi = dof_evaluate(layout, phi, quad_degree=40)
        pts, w = polygon_rule(cell.vertices, 40, cell.centroid)
        for j in (10, 17, 27):
            p = monomial(cell, j, k)
            exact = sum(
                math.comb(m, c) * w @ (p.derive((m - c, c))(pts[:, 0], pts[:, 1]) * phi.partial((m - c, c), pts[:, 0], pts[:, 1]))
                for c in range(m + 1)
            )
            got = pairing_functional(p, layout) @ chi
            assert got == pytest.approx(exact, rel=1e-10, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(list(POLYGON_ZOO)), st.sampled_from(SWEEP), st.integers(0, 2**31 - 1))
def test_pairing_is_linear(name, mk, seed):
    m, k = mk
    cell = CellGeometry.from_polygon(POLYGON_ZOO[name], name=name)
    layout = dof_layout(cell, m, k)
    gen = np.random.default_rng(seed)
    a, b = gen.standard_normal((2, basis_size(k)))
    ca, cb = pairing_functional(cell_poly(cell, a), layout), pairing_functional(cell_poly(cell, b), layout)
    cab = pairing_functional(cell_poly(cell, a + b), layout)
    assert np.abs(cab - ca - cb).max() <= 1e-12 * max(1.0, np.abs(cab).max())


@pytest.mark.parametrize("name", list(POLYGON_ZOO))
@pytest.mark.parametrize("m, k", [(3, 5), (4, 6)])
def test_orientation_independence(name, m, k, rng):
    verts = POLYGON_ZOO[name]
    n = len(verts)
    cells = []
    for shift in range(n):
        order = np.roll(np.arange(n), -shift)
        ids = list(rng.permutation(n))
        cells.append(CellGeometry.from_polygon(verts[order], ids, name=name))
    a, b = rng.standard_normal((2, basis_size(k)))
    values = []
    for cell in cells:
        layout = dof_layout(cell, m, k)
        c = pairing_functional(cell_poly(cell, a), layout)
        values.append(c @ dof_evaluate(layout, cell_poly(cell, b)))
    assert np.allclose(values, values[0], rtol=1e-10)


def test_constraint_functionals(zoo):
    for cell in zoo.values():
        layout = dof_layout(cell, 3, 6)
        C = constraint_functionals(layout)
        assert C.shape == (6, layout.size)
        one = dof_evaluate(layout, Polynomial([1.0], cell.centroid, cell.diameter))
        expected = np.zeros(6)
        expected[0] = cell.n_vertices
        assert np.allclose(C @ one, expected, atol=1e-13)
        D = monomial_dofs(layout)
        G_top = constraint_values(layout)
        assert np.abs(C @ D - G_top).max() <= 1e-11 * max(1.0, np.abs(G_top).max())


def test_pairing_rejects_foreign_basis_and_high_degree(zoo):
    cell = zoo["square"]
    layout = dof_layout(cell, 3, 4)
    with pytest.raises(ValueError):
        pairing_functional(Polynomial([1.0, 2.0, 3.0], (0.0, 0.0), 1.0), layout)
    with pytest.raises(DegreeError):
        pairing_functional(monomial(cell, 20, 5), layout)


def test_multi_index_order_used_by_rows():
    # row r of pairing_matrix corresponds to the r-th graded-lex monomial
    assert multi_indices(2)[3] == (2, 0)
