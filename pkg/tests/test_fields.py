import numpy as np
import pytest

from polyvem.fields import get_solution, polynomial_field, sin_power_solution, zero_field
from polyvem.polynomials import Polynomial, laplacian_power


@pytest.fixture
def interior_points(rng):
    return rng.uniform(0.1, 0.9, size=(10, 2))


@pytest.mark.parametrize("m", [3, 4])
def test_sin_power_solution_is_consistent(m, interior_points):
    sol = sin_power_solution(m, m)
    assert sol.consistency_error(interior_points[:5]) < 1e-4
    assert sol.u.check_derivatives(m, interior_points) < 1e-5
    assert sol.f.check_derivatives(2, interior_points) < 1e-5


@pytest.mark.parametrize("p, m", [(3, 3), (4, 3), (4, 4)])
def test_sin_power_clamped_on_boundary(p, m):
    sol = sin_power_solution(p, m)
    t = np.linspace(0, 1, 7)
    for s in range(m):
        for c in range(s + 1):
            for x, y in ((t, 0 * t), (t, 0 * t + 1), (0 * t, t), (0 * t + 1, t)):
                assert np.abs(sol.u.partial((s - c, c), x, y)).max() < 1e-12


def test_sin_power_requires_enough_vanishing_derivatives():
    with pytest.raises(ValueError):
        sin_power_solution(2, 3)


def test_get_solution_names():
    assert get_solution("sin3", 3).name == "sin3"
    zero = get_solution("zero", 3)
    assert np.all(zero.u(np.array([0.3]), np.array([0.4])) == 0)
    with pytest.raises(ValueError):
        get_solution("cos3", 3)


def test_polynomial_field_rhs(rng):
    p = Polynomial(rng.standard_normal(28), (0.5, 0.5), 1.0, 6)
    field = polynomial_field(p, 3)
    x, y = rng.uniform(size=(2, 4))
    assert np.allclose(field.rhs(x, y), laplacian_power(p, 3)(x, y))
    assert field.is_polynomial and field.degree == 6
    assert field.check_derivatives(3, np.column_stack([x, y])) < 1e-6


def test_zero_field_shapes():
    z = zero_field()
    assert z.partial((2, 1), np.zeros(3), np.zeros(3)).shape == (3,)
    assert z.rhs is z
