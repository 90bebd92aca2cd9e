import numpy as np
import pytest

from polyvem.dofs import (
    check_parameters,
    dof_evaluate,
    dof_layout,
    edge_counts,
    monomial_dofs,
    select_dofs,
)
from polyvem.errors import ParameterError
from polyvem.fields import polynomial_field
from polyvem.mesh import make_grid
from polyvem.polynomials import Polynomial, basis_size


def test_triangle_m3_k3_has_twelve_dofs(unit_triangle):
    layout = dof_layout(unit_triangle, 3, 3)
    assert layout.size == 12
    assert layout.per_vertex == 3 and layout.per_edge == 1 and layout.n_interior == 0


def test_square_m3_k6_has_49_dofs(unit_square):
    layout = dof_layout(unit_square, 3, 6)
    assert layout.size == 4 * 3 + 4 * 9 + 1


def test_m4_k4_single_edge_moment():
    assert edge_counts(4, 4) == (0, 0, 0, 1)


@pytest.mark.parametrize("m, k", [(3, 3), (3, 5), (3, 8), (4, 4), (4, 9), (5, 7)])
def test_layout_count_formula(zoo, m, k):
    for cell in zoo.values():
        layout = dof_layout(cell, m, k)
        n = cell.n_vertices
        expected = n * m * (m - 1) // 2 + n * sum(max(0, k - 2 * m + 2 + a) for a in range(m)) + basis_size(k - 2 * m)
        assert layout.size == expected == len(layout.descriptors())
        kinds = [d.kind for d in layout.descriptors()]
        # boundary-first ordering
        assert kinds == sorted(kinds, key=["vertex", "edge", "interior"].index)
        assert layout.boundary_mask().sum() == layout.n_boundary


@pytest.mark.parametrize("m, k", [(2, 3), (1, 1), (3, 2)])
def test_parameter_constraints(m, k):
    with pytest.raises(ParameterError):
        check_parameters(m, k)


def test_dofs_of_constant_one(unit_square):
    layout = dof_layout(unit_square, 3, 6)
    one = Polynomial([1.0], unit_square.centroid, unit_square.diameter, 0)
    dofs = dof_evaluate(layout, one)
    expected = np.zeros(layout.size)
    for v in range(4):
        expected[layout.vertex_dof(v, 0, 0)] = 1.0
    for e in range(4):
        expected[layout.edge_dof(e, 0, 0)] = 1.0  # |e|^-1 int_e 1
    expected[layout.interior_dof(0)] = 1.0
    assert np.allclose(dofs, expected, atol=1e-14)


def test_vertex_dofs_unscale_to_gradients(zoo, rng):
    cell = zoo["pentagon"]
    layout = dof_layout(cell, 3, 5)
    p = Polynomial(rng.standard_normal(21), cell.centroid, cell.diameter, 5)
    dofs = dof_evaluate(layout, p)
    for v, xy in enumerate(cell.vertices):
        grad = [p.derive(a)(xy[0], xy[1]) for a in ((1, 0), (0, 1))]
        got = [dofs[layout.vertex_dof(v, 1, c)] / cell.diameter for c in range(2)]
        assert np.allclose(got, grad, rtol=1e-12, atol=1e-12)


def test_monomial_dofs_columns_match_dof_evaluate(zoo):
    cell = zoo["hexagon"]
    layout = dof_layout(cell, 3, 7)
    D = monomial_dofs(layout)
    for j in (0, 5, 17, 35):
        e = np.zeros(basis_size(7))
        e[j] = 1.0
        col = dof_evaluate(layout, Polynomial(e, cell.centroid, cell.diameter, 7))
        assert np.allclose(D[:, j], col, atol=1e-13)


def test_polynomial_and_field_give_same_dofs(zoo, rng):
    cell = zoo["triangle"]
    layout = dof_layout(cell, 4, 8)
    p = Polynomial(rng.standard_normal(21), (0.2, 0.1), 0.7, 5)
    assert np.allclose(dof_evaluate(layout, p), dof_evaluate(layout, polynomial_field(p)), atol=1e-12)


def test_edge_dofs_shared_between_neighbours():
    # the same global edge seen from two cells gives identical moments
    mesh = make_grid("triangles", 2, 0.2, seed=1)
    p = Polynomial(np.random.default_rng(0).standard_normal(28), (0.5, 0.5), 1.0, 6)
    per_cell = {}
    for c in range(mesh.n_cells):
        layout = dof_layout(mesh.cell_geometry(c), 3, 6)
        d = dof_evaluate(layout, p)
        for i, e in enumerate(mesh.cell_edges[c]):
            block = d[layout.edge_dof(i, 0, 0) : layout.edge_dof(i, 0, 0) + layout.per_edge]
            if e in per_cell:
                assert np.allclose(block, per_cell[e], atol=1e-12)
            per_cell[e] = block


def test_select_dofs(unit_triangle):
    layout = dof_layout(unit_triangle, 3, 5)
    idx = select_dofs(layout, vertex_orders=(0, 1), edge_moments=((0, 0), (2, 0)))
    assert len(idx) == 3 * 3 + 3 * 2
    assert idx == sorted(set(idx))
    with pytest.raises(ParameterError):
        select_dofs(layout, edge_moments=((0, 9),))
