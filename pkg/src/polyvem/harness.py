"""Verification harness: element identities, patch tests and convergence studies."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .assembly import assemble, error_norms, inhomogeneous_bc_solve, interpolate, solve
from .dofs import check_parameters
from .element import element_matrices, energy_matrix
from .errors import ParameterError, VEMError
from .fields import get_solution, polynomial_field
from .geometry import CellGeometry
from .green import pairing_matrix
from .mesh import MESH_KINDS, make_grid
from .polynomials import Polynomial, basis_size

PI_D_TOL = 1e-9
G_BD_TOL = 1e-9
PAIRING_TOL = 1e-10
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-9
RANK_TOL = 1e-8
PATCH_TOL = 1e-6
RATE_SLACK = 0.25


def _hexagon() -> np.ndarray:
    angles = np.pi / 3 * np.arange(6)
    radii = np.array([1.0, 1.05, 0.95, 1.1, 0.9, 1.0])
    wiggle = np.array([0.0, 0.06, -0.04, 0.05, -0.07, 0.03])
    return np.column_stack([radii * np.cos(angles + wiggle), radii * np.sin(angles + wiggle)])


POLYGON_ZOO: dict[str, np.ndarray] = {
    "triangle": np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    "square": np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
    "pentagon": np.column_stack([np.cos(2 * np.pi * np.arange(5) / 5), np.sin(2 * np.pi * np.arange(5) / 5)]),
    "hexagon": _hexagon(),
    "thin-quad": np.array([[0.0, 0.0], [1.0, 0.0], [1.05, 0.1], [0.05, 0.1]]),
}


def zoo_cells(polygons: dict[str, np.ndarray] | None = None) -> list[CellGeometry]:
    """Zoo polygons as cells. Vertex ids run backwards around the loop so that
    most edge frames are traversed against the cell orientation."""
    polygons = POLYGON_ZOO if polygons is None else polygons
    cells = []
    for name, verts in polygons.items():
        n = len(verts)
        ids = [(n - i) % n for i in range(n)]
        cells.append(CellGeometry.from_polygon(verts, ids, name=name))
    return cells


def load_polygon(path) -> dict[str, np.ndarray]:
    data = json.loads(Path(path).read_text())
    verts = np.asarray(data["vertices"] if isinstance(data, dict) else data, dtype=float)
    return {Path(path).stem: verts}


# -- element identities ----------------------------------------------------------


@dataclass
class CheckRecord:
    cell: str
    m: int
    k: int
    identity: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        status = "ok" if self.passed else "FAIL"
        return f"{status:4s} {self.cell:10s} m={self.m} k={self.k} {self.identity:14s} {self.value:.3e} (tol {self.tol:g})"


def element_identities(cell: CellGeometry, m: int, k: int) -> list[CheckRecord]:
    em = element_matrices(cell, m, k)
    nk = em.layout.n_k
    rec = []

    def add(identity, value, tol, passed=None):
        ok = value <= tol if passed is None else passed
        rec.append(CheckRecord(cell.name, m, k, identity, float(value), tol, bool(ok)))

    add("pi_d", np.abs(em.Pi @ em.D - np.eye(nk)).max(), PI_D_TOL)
    add("g_bd", np.abs(em.G - em.B @ em.D).max() / np.abs(em.G).max(), G_BD_TOL)

    stiff = energy_matrix(cell, m, k)
    oracle = pairing_matrix(em.layout) @ em.D
    add("pairing", np.abs(oracle - stiff).max() / np.abs(stiff).max(), PAIRING_TOL)

    A = em.A
    scale = np.abs(A).max()
    add("a_symmetric", np.abs(A - A.T).max() / scale, SYMMETRY_TOL)
    ev = np.linalg.eigvalsh(A)
    lmax = ev.max()
    add("a_psd", max(-ev.min() / lmax, 0.0), PSD_TOL)
    rank = int((ev > RANK_TOL * lmax).sum())
    expected = em.layout.size - em.layout.n_kernel
    add("a_rank", abs(rank - expected), 0, rank == expected)
    return rec


def check_element(m: int, k: int, cells: list[CellGeometry] | None = None) -> list[CheckRecord]:
    check_parameters(m, k)
    cells = zoo_cells() if cells is None else cells
    out = []
    for cell in cells:
        out += element_identities(cell, m, k)
    return out


# -- patch test ------------------------------------------------------------------


@dataclass
class PatchResult:
    m: int
    k: int
    mesh: str
    N: int
    degree: int
    ndofs: int
    error: float
    residual: float
    passed: bool


def random_polynomial(degree: int, seed: int = 0) -> Polynomial:
    rng = np.random.default_rng(seed)
    return Polynomial(rng.standard_normal(basis_size(degree)), (0.5, 0.5), 1.0, degree)


def patch_test(
    m: int, k: int, kind: str = "squares", N: int = 4, perturb: float = 0.0, seed: int = 0, degree: int | None = None
) -> PatchResult:
    """Solve with u = p (random, degree ``degree`` <= k), f = (-Delta)^m p and the
    boundary dofs of p; the computed dofs must equal the interpolant of p."""
    check_parameters(m, k)
    degree = k if degree is None else degree
    if degree > k:
        raise ParameterError(f"patch polynomial degree {degree} exceeds k = {k}")
    u = polynomial_field(random_polynomial(degree, seed), m)
    mesh = make_grid(kind, N, perturb, seed)
    result, system = inhomogeneous_bc_solve(mesh, m, k, u.rhs, u)
    exact = interpolate(system.dofmap, u)
    error = float(np.abs(result.x - exact).max() / max(np.abs(exact).max(), 1e-300))
    return PatchResult(m, k, kind, N, degree, system.dofmap.size, error, result.residual, error <= PATCH_TOL)


# -- convergence -----------------------------------------------------------------


@dataclass
class RunConfig:
    m: int = 3
    k: int = 3
    mesh: str = "squares"
    sizes: list[int] = field(default_factory=lambda: [4, 8, 16])
    perturb: float | None = None
    seed: int = 0
    solution: str | None = None
    out: str | None = None

    def __post_init__(self):
        if self.perturb is None:
            self.perturb = 0.2 if self.mesh == "polygons-perturbed" else 0.0
        if self.solution is None:
            self.solution = f"sin{self.m}"
        self.sizes = [int(s) for s in self.sizes]

    def validate(self) -> "RunConfig":
        check_parameters(self.m, self.k)
        if self.mesh not in MESH_KINDS:
            raise ParameterError(f"unknown mesh kind {self.mesh!r}")
        if not self.sizes or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ParameterError(f"mesh sizes must be strictly increasing, got {self.sizes}")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class ConvergenceResult:
    config: RunConfig
    rows: list[dict]
    expected_rate: float
    final_rate: float | None

    @property
    def passed(self) -> bool:
        if self.final_rate is None:
            return True  # zero solution or a single mesh: nothing to check
        return self.final_rate >= self.expected_rate - RATE_SLACK


def rate(e_coarse: float, e_fine: float, h_coarse: float, h_fine: float) -> float | None:
    if e_coarse <= 0.0 or e_fine <= 0.0:
        return None
    return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)


def convergence(config: RunConfig) -> ConvergenceResult:
    config.validate()
    m, k = config.m, config.k
    sol = get_solution(config.solution, m)
    rows = []
    for N in config.sizes:
        mesh = make_grid(config.mesh, N, config.perturb, config.seed)
        system = assemble(mesh, m, k, sol.f)
        result = solve(system, check=True)
        errs = error_norms(system, result.x, sol.u)
        row = {"h": mesh.h, "ncells": mesh.n_cells, "ndofs": system.dofmap.n_free}
        row.update({f"e{s}": errs[s] for s in range(m + 1)})
        row["rate_m"] = rate(rows[-1][f"e{m}"], errs[m], rows[-1]["h"], mesh.h) if rows else None
        rows.append(row)
    final = rows[-1]["rate_m"] if len(rows) > 1 else None
    return ConvergenceResult(config, rows, float(k + 1 - m), final)


def csv_columns(m: int) -> list[str]:
    return ["h", "ncells", "ndofs"] + [f"e{s}" for s in range(m + 1)] + ["rate_m"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.12e}"


def rows_to_csv(rows: list[dict], m: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = csv_columns(m)
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in cols])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    text = Path(path).read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise VEMError(f"{path}: no data rows")
    return rows


def report(rows: list[dict]) -> tuple[str, str]:
    """Aligned text table and a whitespace-separated data file.

    The rate column is recomputed from the error of highest order and h.
    """
    if not rows:
        raise VEMError("empty convergence table")
    err_cols = sorted((c for c in rows[0] if c.startswith("e") and c[1:].isdigit()), key=lambda c: int(c[1:]))
    top = err_cols[-1]
    h = [float(r["h"]) for r in rows]
    e = [float(r[top]) for r in rows]
    rates = [None] + [rate(e[i], e[i + 1], h[i], h[i + 1]) for i in range(len(rows) - 1)]
    header = ["h", "ncells", "ndofs"] + err_cols + ["rate"]
    table = []
    for r, rt in zip(rows, rates):
        table.append(
            [f"{float(r['h']):.4e}", str(r["ncells"]), str(r["ndofs"])]
            + [f"{float(r[c]):.4e}" for c in err_cols]
            + ["-" if rt is None else f"{rt:.3f}"]
        )
    widths = [max(len(header[i]), *(len(t[i]) for t in table)) for i in range(len(header))]
    lines = ["  ".join(h_.rjust(w) for h_, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(t, widths)) for t in table]
    data = ["# " + " ".join(header)]
    data += [" ".join("nan" if c == "-" else c for c in t) for t in table]
    return "\n".join(lines) + "\n", "\n".join(data) + "\n"
