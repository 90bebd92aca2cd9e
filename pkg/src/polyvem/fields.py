"""Scalar fields with analytic derivatives, and manufactured solutions."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .polynomials import MultiIndex, Polynomial, laplacian_power

DerivativeFn = Callable[[MultiIndex, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class ScalarField:
    """A function of (x, y) with callable partial derivatives.

    ``derivative(alpha, x, y)`` returns d^alpha f at the given points.
    ``rhs`` optionally holds the exact (-Delta)^m of this field.
    """

    derivative: DerivativeFn
    name: str = "field"
    is_polynomial: bool = False
    degree: int | None = None
    rhs: "ScalarField | None" = None

    def __call__(self, x, y):
        return self.derivative((0, 0), np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def partial(self, alpha: MultiIndex, x, y):
        return self.derivative(alpha, np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def check_derivatives(self, order: int, points, step: float = 1e-4) -> float:
        """Max relative mismatch between each derivative callback of total order
        1..``order`` and a central difference of its lower-order parent."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        worst = 0.0
        for d in range(1, order + 1):
            for c in range(d + 1):
                alpha = (d - c, c)
                if alpha[0] > 0:
                    parent, ex = (alpha[0] - 1, alpha[1]), (step, 0.0)
                else:
                    parent, ex = (alpha[0], alpha[1] - 1), (0.0, step)
                fd = (self.partial(parent, x + ex[0], y + ex[1]) - self.partial(parent, x - ex[0], y - ex[1])) / (2 * step)
                exact = self.partial(alpha, x, y)
                scale = max(np.abs(exact).max(), np.abs(fd).max(), 1.0)
                worst = max(worst, float(np.abs(fd - exact).max() / scale))
        return worst


def polynomial_field(p: Polynomial, m: int | None = None, name: str = "polynomial") -> ScalarField:
    """Wrap a Polynomial; with ``m`` given, attach (-Delta)^m p as ``rhs``."""

    def derivative(alpha, x, y):
        return p.derive(alpha)(x, y)

    rhs = polynomial_field(laplacian_power(p, m), name=f"(-lap)^{m} {name}") if m is not None else None
    return ScalarField(derivative, name=name, is_polynomial=True, degree=p.degree, rhs=rhs)


def zero_field() -> ScalarField:
    def derivative(alpha, x, y):
        return np.zeros(np.broadcast(x, y).shape)

    f = ScalarField(derivative, name="zero", is_polynomial=True, degree=-1)
    f.rhs = f
    return f


# -- (sin(pi x) sin(pi y))^p ---------------------------------------------------------


def _sin_power_derivative(p: int, n: int, t: np.ndarray) -> np.ndarray:
    """n-th derivative of sin(pi t)^p, from the exponential expansion
    sin^p(theta) = (2i)^-p sum_j C(p, j) (-1)^(p-j) exp(i (2j - p) theta)."""
    theta = np.pi * np.asarray(t, dtype=float)
    total = np.zeros(theta.shape, dtype=complex)
    for j in range(p + 1):
        freq = 2 * j - p
        if freq == 0 and n > 0:
            continue
        coef = math.comb(p, j) * (-1) ** (p - j) * (1j * freq * np.pi) ** n
        total += coef * np.exp(1j * freq * theta)
    return (total / (2j) ** p).real


@dataclass
class ManufacturedSolution:
    """Exact solution u of (-Delta)^m u = f with clamped boundary data."""

    name: str
    u: ScalarField
    f: ScalarField
    m: int
    bc: str = "homogeneous"

    def consistency_error(self, points, step: float = 1e-3) -> float:
        """Relative mismatch between f and a central-difference (-Delta)^m u.

        Differences are taken of the analytic second derivatives, one
        Laplacian at a time, so only the outermost application is discrete.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        # (-Delta)^m u = -Delta [(-Delta)^(m-1) u]; inner part analytic
        inner = _poly_laplacian_derivative(self.u, self.m - 1)

        def lap_fd(g):
            return (
                g(x + step, y) + g(x - step, y) + g(x, y + step) + g(x, y - step) - 4.0 * g(x, y)
            ) / step**2

        fd = -lap_fd(inner)
        exact = self.f(x, y)
        return float(np.abs(fd - exact).max() / max(np.abs(exact).max(), 1e-300))


def _poly_laplacian_derivative(u: ScalarField, r: int):
    """Callable (x, y) -> (-Delta)^r u via the analytic partials of u."""

    def g(x, y):
        total = 0.0
        for j in range(r + 1):
            total = total + math.comb(r, j) * u.partial((2 * j, 2 * (r - j)), x, y)
        return (-1) ** r * total

    return g


def sin_power_solution(power: int, m: int) -> ManufacturedSolution:
    """u = (sin(pi x) sin(pi y))^power on the unit square.

    All derivatives of order < power vanish on the boundary, so ``power >= m``
    gives the clamped conditions u = d_n u = ... = d_n^{m-1} u = 0.
    """
    if power < m:
        raise ValueError(f"(sin sin)^{power} does not satisfy clamped conditions of order {m - 1}")

    def du(alpha, x, y):
        return _sin_power_derivative(power, alpha[0], x) * _sin_power_derivative(power, alpha[1], y)

    def df(alpha, x, y):
        # (-Delta)^m = (-1)^m sum_j C(m, j) d_x^{2j} d_y^{2(m-j)}
        total = 0.0
        for j in range(m + 1):
            total = total + math.comb(m, j) * (
                _sin_power_derivative(power, 2 * j + alpha[0], x) * _sin_power_derivative(power, 2 * (m - j) + alpha[1], y)
            )
        return (-1) ** m * total

    name = f"sin{power}"
    f = ScalarField(df, name=f"(-lap)^{m} {name}")
    u = ScalarField(du, name=name, rhs=f)
    return ManufacturedSolution(name, u, f, m)


def zero_solution(m: int) -> ManufacturedSolution:
    z = zero_field()
    return ManufacturedSolution("zero", z, z, m)


def get_solution(name: str, m: int) -> ManufacturedSolution:
    if name == "zero":
        return zero_solution(m)
    match = re.fullmatch(r"sin(\d+)", name)
    if match:
        return sin_power_solution(int(match.group(1)), m)
    raise ValueError(f"unknown solution {name!r}; expected 'zero' or 'sin<p>'")
