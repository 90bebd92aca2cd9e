"""Scaled monomials, bivariate/edge polynomials and symmetric tensor polynomials.

A bivariate polynomial lives in the scaled monomial basis of its owning
entity: ``m_alpha(x) = ((x - x_G) / h_G) ** alpha`` with multi-indices
enumerated in graded-lexicographic order (total degree, then alpha_1
descending). Edge polynomials use the 1D coordinate
``s = (x - x_e) . t_e / |e|`` which ranges over [-1/2, 1/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial as Poly1D
from numpy.polynomial import polynomial as npoly

from .quadrature import polygon_rule, segment_rule

MultiIndex = tuple[int, int]


def basis_size(degree: int) -> int:
    """dim P_degree in 2D; zero for negative degree."""
    return (degree + 1) * (degree + 2) // 2 if degree >= 0 else 0


@lru_cache(maxsize=None)
def _multi_indices(degree: int) -> tuple[MultiIndex, ...]:
    return tuple((d - i, i) for d in range(degree + 1) for i in range(d + 1))


def multi_indices(degree: int) -> list[MultiIndex]:
    """All (a1, a2) with a1 + a2 <= degree in graded-lex order."""
    return list(_multi_indices(degree))


def index_of(alpha: MultiIndex) -> int:
    """Position of ``alpha`` in the graded-lex enumeration."""
    d = alpha[0] + alpha[1]
    return basis_size(d - 1) + alpha[1]


def degree_of_size(n: int) -> int:
    d = -1
    while basis_size(d) < n:
        d += 1
    if basis_size(d) != n:
        raise ValueError(f"{n} is not the size of a full 2D monomial basis")
    return d


def _falling(n: int, r: int) -> int:
    return math.perm(n, r) if r <= n else 0


def directional_weights(u, a: int, v, b: int) -> np.ndarray:
    """Cartesian expansion of the mixed directional derivative (u.grad)^a (v.grad)^b.

    Returns ``w`` of length a + b + 1 with
    ``(u.grad)^a (v.grad)^b f = sum_c w[c] d^{a+b} f / dx^{a+b-c} dy^c``.
    """
    pu = npoly.polypow([u[0], u[1]], a) if a else np.array([1.0])
    pv = npoly.polypow([v[0], v[1]], b) if b else np.array([1.0])
    w = np.zeros(a + b + 1)
    prod = npoly.polymul(pu, pv)
    w[: len(prod)] = prod
    return w


def monomial_derivatives(points, center, h: float, degree: int, alpha: MultiIndex = (0, 0)) -> np.ndarray:
    """Values of d^alpha m_j at ``points`` for all scaled monomials of ``degree``.

    Returns an array of shape (npoints, basis_size(degree)).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xi = (pts[:, 0] - center[0]) / h
    eta = (pts[:, 1] - center[1]) / h
    p, q = alpha
    out = np.zeros((len(pts), basis_size(degree)))
    if degree < 0:
        return out
    xp = xi[:, None] ** np.arange(degree + 1)
    yp = eta[:, None] ** np.arange(degree + 1)
    scale = h ** -(p + q)
    for j, (a, b) in enumerate(_multi_indices(degree)):
        if a >= p and b >= q:
            out[:, j] = (_falling(a, p) * _falling(b, q) * scale) * xp[:, a - p] * yp[:, b - q]
    return out


class Polynomial:
    """Bivariate polynomial in a scaled monomial basis (center, h, degree)."""

    __slots__ = ("coeffs", "center", "h", "degree")

    def __init__(self, coeffs, center, h: float, degree: int | None = None):
        coeffs = np.asarray(coeffs, dtype=float).ravel()
        if degree is None:
            degree = degree_of_size(len(coeffs))
        if len(coeffs) != basis_size(degree):
            raise ValueError(f"expected {basis_size(degree)} coefficients for degree {degree}, got {len(coeffs)}")
        self.coeffs = coeffs
        self.center = np.asarray(center, dtype=float)
        self.h = float(h)
        self.degree = degree

    @classmethod
    def monomial(cls, alpha: MultiIndex, center, h: float, degree: int | None = None) -> "Polynomial":
        degree = alpha[0] + alpha[1] if degree is None else degree
        c = np.zeros(basis_size(degree))
        c[index_of(alpha)] = 1.0
        return cls(c, center, h, degree)

    @classmethod
    def zero(cls, center, h: float) -> "Polynomial":
        return cls(np.zeros(0), center, h, -1)

    def same_basis(self, other: "Polynomial") -> bool:
        return self.h == other.h and np.array_equal(self.center, other.center)

    def grid(self) -> np.ndarray:
        """Coefficients as a dense array g[a, b] of xi^a eta^b."""
        d = max(self.degree, 0)
        g = np.zeros((d + 1, d + 1))
        for c, (a, b) in zip(self.coeffs, _multi_indices(self.degree)):
            g[a, b] = c
        return g

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        if self.degree < 0:
            return np.zeros(np.broadcast(x, np.asarray(y)).shape)
        xi = (x - self.center[0]) / self.h
        eta = (np.asarray(y, dtype=float) - self.center[1]) / self.h
        return npoly.polyval2d(xi, eta, self.grid())

    def elevate(self, degree: int) -> "Polynomial":
        if degree < self.degree:
            raise ValueError("cannot lower the degree by elevation")
        c = np.zeros(basis_size(degree))
        c[: len(self.coeffs)] = self.coeffs
        return Polynomial(c, self.center, self.h, degree)

    def derive(self, alpha: MultiIndex) -> "Polynomial":
        """Exact partial derivative d^alpha, kept in the same scaled basis."""
        p, q = alpha
        nd = self.degree - p - q
        if nd < 0:
            return Polynomial.zero(self.center, self.h)
        scale = self.h ** -(p + q)
        c = np.empty(basis_size(nd))
        for j, (a, b) in enumerate(_multi_indices(nd)):
            c[j] = self.coeffs[index_of((a + p, b + q))] * (_falling(a + p, p) * _falling(b + q, q) * scale)
        return Polynomial(c, self.center, self.h, nd)

    def directional(self, u, a: int = 1, v=(0.0, 0.0), b: int = 0) -> "Polynomial":
        """(u.grad)^a (v.grad)^b applied to self."""
        w = directional_weights(u, a, v, b)
        d = a + b
        out = Polynomial.zero(self.center, self.h)
        for c in range(d + 1):
            if w[c] != 0.0:
                out = out + w[c] * self.derive((d - c, c))
        return out

    def _binary(self, other: "Polynomial", sign: float) -> "Polynomial":
        if not self.same_basis(other):
            raise ValueError("polynomials live in different scaled bases")
        d = max(self.degree, other.degree)
        c = np.zeros(basis_size(d))
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += sign * other.coeffs
        return Polynomial(c, self.center, self.h, d)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return self._binary(other, 1.0)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self._binary(other, -1.0)

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs, self.center, self.h, self.degree)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if not self.same_basis(other):
                raise ValueError("polynomials live in different scaled bases")
            d = self.degree + other.degree
            if self.degree < 0 or other.degree < 0:
                return Polynomial.zero(self.center, self.h)
            g1, g2 = self.grid(), other.grid()
            g = np.zeros((d + 1, d + 1))
            for (a, b), c in np.ndenumerate(g1):
                if c != 0.0:
                    g[a : a + g2.shape[0], b : b + g2.shape[1]] += c * g2
            return Polynomial([g[a, b] for a, b in _multi_indices(d)], self.center, self.h, d)
        return Polynomial(self.coeffs * float(other), self.center, self.h, self.degree)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Polynomial(degree={self.degree}, center={self.center.tolist()}, h={self.h:g})"


@lru_cache(maxsize=256)
def _derivative_matrix(degree: int, alpha: MultiIndex) -> np.ndarray:
    p, q = alpha
    n = basis_size(degree)
    out = np.zeros((n, n))
    for j, (a, b) in enumerate(_multi_indices(degree)):
        if a >= p and b >= q:
            out[index_of((a - p, b - q)), j] = _falling(a, p) * _falling(b, q)
    out.setflags(write=False)
    return out


def derivative_matrix(degree: int, alpha: MultiIndex, h: float) -> np.ndarray:
    """Matrix of d^alpha on the scaled monomials of ``degree``: column j holds
    the coefficients of d^alpha m_j in the same basis."""
    return _derivative_matrix(degree, tuple(alpha)) * h ** -(alpha[0] + alpha[1])


def poly_derive(p: Polynomial, alpha: MultiIndex) -> Polynomial:
    return p.derive(alpha)


def laplacian(p: Polynomial) -> Polynomial:
    return p.derive((2, 0)) + p.derive((0, 2))


def laplacian_power(p: Polynomial, m: int) -> Polynomial:
    """(-Delta)^m p."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    out = p
    for _ in range(m):
        out = -laplacian(out)
    return out


class EdgePolynomial:
    """Polynomial on an edge in the coordinate s = (x - x_e) . t_e / |e|."""

    __slots__ = ("frame", "poly")

    def __init__(self, coeffs, frame):
        self.frame = frame
        self.poly = Poly1D(np.asarray(coeffs, dtype=float))

    @property
    def coeffs(self) -> np.ndarray:
        return self.poly.coef

    @property
    def degree(self) -> int:
        c = np.trim_zeros(self.poly.coef, "b")
        return len(c) - 1

    def __call__(self, s):
        return self.poly(s)

    def at_point(self, x):
        """Evaluate at plane points lying on the edge."""
        x = np.asarray(x, dtype=float)
        s = (x - self.frame.midpoint) @ self.frame.tangent / self.frame.length
        return self.poly(s)

    def derivative(self, r: int = 1) -> "EdgePolynomial":
        """r-th derivative with respect to arclength along the tangent."""
        if r == 0:
            return self
        return EdgePolynomial(self.poly.deriv(r).coef * self.frame.length ** (-r), self.frame)

    def __add__(self, other: "EdgePolynomial") -> "EdgePolynomial":
        return EdgePolynomial((self.poly + other.poly).coef, self.frame)

    def __sub__(self, other: "EdgePolynomial") -> "EdgePolynomial":
        return EdgePolynomial((self.poly - other.poly).coef, self.frame)

    def __neg__(self) -> "EdgePolynomial":
        return EdgePolynomial(-self.poly.coef, self.frame)

    def __mul__(self, other):
        if isinstance(other, EdgePolynomial):
            return EdgePolynomial((self.poly * other.poly).coef, self.frame)
        return EdgePolynomial(self.poly.coef * float(other), self.frame)

    __rmul__ = __mul__


@lru_cache(maxsize=4096)
def _restriction_matrix(frame_key: tuple, center: tuple, h: float, degree: int) -> np.ndarray:
    sx, sy, ex, ey = frame_key
    length = math.hypot(ex - sx, ey - sy)
    tx, ty = (ex - sx) / length, (ey - sy) / length
    mx, my = 0.5 * (sx + ex), 0.5 * (sy + ey)
    X = np.array([(mx - center[0]) / h, length * tx / h])
    Y = np.array([(my - center[1]) / h, length * ty / h])
    xp = [np.array([1.0])]
    yp = [np.array([1.0])]
    for _ in range(degree):
        xp.append(np.convolve(xp[-1], X))
        yp.append(np.convolve(yp[-1], Y))
    R = np.zeros((max(degree, 0) + 1, basis_size(degree)))
    for j, (a, b) in enumerate(_multi_indices(degree)):
        col = np.convolve(xp[a], yp[b])
        R[: len(col), j] = col
    return R


def restriction_matrix(frame, center, h: float, degree: int) -> np.ndarray:
    """Linear map from bivariate coefficients (degree) to edge coefficients."""
    return _restriction_matrix(frame.key(), (float(center[0]), float(center[1])), float(h), degree)


def restrict_to_edge(p: Polynomial, frame) -> EdgePolynomial:
    """Substitute the edge parameterization x(s) = x_e + s |e| t_e into ``p``."""
    if p.degree < 0:
        return EdgePolynomial([0.0], frame)
    R = restriction_matrix(frame, p.center, p.h, p.degree)
    return EdgePolynomial(R @ p.coeffs, frame)


def integrate_edge(q: EdgePolynomial) -> float:
    """Gauss integral of an edge polynomial over its edge (arclength measure)."""
    s, w = segment_rule(max(q.degree, 0))
    return float(q.frame.length * np.dot(w, q(s)))


def integrate_polygon(p: Polynomial, polygon) -> float:
    """Integral of ``p`` over a polygon (vertex array, counterclockwise)."""
    pts, w = polygon_rule(np.asarray(polygon, dtype=float), max(p.degree, 0))
    return float(np.dot(w, p(pts[:, 0], pts[:, 1])))


def scaled_basis_polynomials(cell, degree: int) -> list[Polynomial]:
    return [Polynomial.monomial(a, cell.centroid, cell.diameter, degree) for a in _multi_indices(degree)]


def gram_matrix(cell, degree: int) -> np.ndarray:
    """(m_i, m_j)_K for the scaled monomials of ``degree`` on ``cell``."""
    if degree < 0:
        return np.zeros((0, 0))
    pts, w = polygon_rule(cell.vertices, 2 * degree, cell.centroid)
    V = monomial_derivatives(pts, cell.centroid, cell.diameter, degree)
    return (V * w[:, None]).T @ V


def mass_matrices(cell, m: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Mbar, Mtilde, M): Gram blocks over M_{m-1}, M_{k-2m} and M_{m-1} x M_k."""
    if k < m:
        raise ValueError("k must be >= m")
    full = gram_matrix(cell, k)
    nbar = basis_size(m - 1)
    ntil = basis_size(k - 2 * m)
    return full[:nbar, :nbar].copy(), full[:ntil, :ntil].copy(), full[:nbar, :].copy()


@dataclass
class TensorPoly:
    """Symmetric tensor of order s with polynomial entries.

    ``components[c]`` holds the entry whose index tuple contains ``s - c``
    ones and ``c`` twos (i.e. d^s / dx^{s-c} dy^c for a gradient tensor);
    each such entry represents C(s, c) index tuples.
    """

    order: int
    components: list

    def multiplicity(self, c: int) -> int:
        return math.comb(self.order, c)

    def entry(self, index: tuple[int, ...]):
        """Entry for a full index tuple over {1, 2}."""
        if len(index) != self.order:
            raise ValueError("index length must equal tensor order")
        return self.components[sum(1 for i in index if i == 2)]

    def ddot(self, other: "TensorPoly"):
        """Full contraction tau : sigma."""
        if other.order != self.order:
            raise ValueError("order mismatch")
        total = None
        for c in range(self.order + 1):
            term = self.multiplicity(c) * (self.components[c] * other.components[c])
            total = term if total is None else total + term
        return total

    def dot(self, v) -> "TensorPoly":
        """Contract the last index with the vector ``v``."""
        if self.order == 0:
            raise ValueError("cannot contract a scalar")
        comps = [v[0] * self.components[c] + v[1] * self.components[c + 1] for c in range(self.order)]
        return TensorPoly(self.order - 1, comps)

    def frame_component(self, u, a: int, v, b: int):
        """tau(u, ..., u, v, ..., v) with ``a`` copies of u and ``b`` of v."""
        if a + b != self.order:
            raise ValueError("a + b must equal tensor order")
        w = directional_weights(u, a, v, b)
        total = None
        for c in range(self.order + 1):
            if w[c] != 0.0 or total is None:
                term = w[c] * self.components[c]
                total = term if total is None else total + term
        return total

    def restrict(self, frame) -> "TensorPoly":
        return TensorPoly(self.order, [restrict_to_edge(p, frame) for p in self.components])


def grad_tensor(p: Polynomial, s: int) -> TensorPoly:
    """Symmetric tensor of all s-th partial derivatives of ``p``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return TensorPoly(s, [p.derive((s - c, c)) for c in range(s + 1)])
