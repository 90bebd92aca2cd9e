"""Gauss rules on segments, triangles and star-shaped polygons."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import MeshError


@lru_cache(maxsize=None)
def segment_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [-1/2, 1/2] exact up to ``degree``.

    Weights sum to 1.
    """
    n = max(1, (degree + 2) // 2)
    x, w = leggauss(n)
    return 0.5 * x, 0.5 * w


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on the unit triangle (0,0), (1,0), (0,1).

    The square [0,1]^2 is mapped onto the triangle by collapsing one side onto
    the origin; the radial direction uses Gauss-Jacobi points with weight s so
    the Jacobian is absorbed exactly. Exact for total degree ``degree``; the
    weights sum to 1/2.
    """
    n = max(1, (degree + 2) // 2)
    r, wr = leggauss(n)
    r = 0.5 * (r + 1.0)
    wr = 0.5 * wr
    s, ws = roots_jacobi(n, 0.0, 1.0)
    s = 0.5 * (s + 1.0)
    ws = 0.25 * ws
    # x = s * ((1 - r) e1 + r e2)
    R, S = np.meshgrid(r, s, indexing="ij")
    WR, WS = np.meshgrid(wr, ws, indexing="ij")
    pts = np.column_stack([(S * (1.0 - R)).ravel(), (S * R).ravel()])
    return pts, (WR * WS).ravel()


def signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_rule(
    vertices: np.ndarray, degree: int, center: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on a polygon by a fan of triangles from ``center``.

    ``center`` defaults to the area centroid. Fan triangles carry signed
    weights, so the rule is exact on any simple polygon, but the mesh layer
    only ever passes polygons that are star-shaped w.r.t. the centroid.
    """
    vertices = np.asarray(vertices, dtype=float)
    area = signed_area(vertices)
    diam2 = max(np.sum((vertices[:, None, :] - vertices[None, :, :]) ** 2, axis=-1).max(), 0.0)
    if area <= 1e-14 * diam2:
        raise MeshError(f"degenerate or clockwise polygon (signed area {area:.3e})")
    if center is None:
        from .geometry import polygon_area_centroid

        center = polygon_area_centroid(vertices)[1]
    ref_pts, ref_w = triangle_rule(degree)
    a = vertices - center
    b = np.roll(vertices, -1, axis=0) - center
    det = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    # point = center + X a + Y b for each fan triangle
    pts = center + ref_pts[None, :, 0, None] * a[:, None, :] + ref_pts[None, :, 1, None] * b[:, None, :]
    w = det[:, None] * ref_w[None, :]
    return pts.reshape(-1, 2), w.ravel()
