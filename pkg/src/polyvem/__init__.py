"""H^m-nonconforming virtual elements for polyharmonic Dirichlet problems on polygonal meshes."""

from .assembly import (
    GlobalDofMap,
    LinearSystem,
    SolveResult,
    assemble,
    build_dof_map,
    error_norms,
    inhomogeneous_bc_solve,
    interpolate,
    solve,
)
from .dofs import DofLayout, dof_evaluate, dof_layout, monomial_dofs, select_dofs
from .element import ElementMatrices, element_matrices, rhs_regime, serendipity_check
from .errors import DegreeError, MeshError, ParameterError, SingularElementError, SolverError, VEMError
from .fields import ManufacturedSolution, ScalarField, get_solution, polynomial_field
from .geometry import CellGeometry, EdgeFrame
from .green import pairing_functional, pairing_matrix
from .mesh import PolyMesh, load_mesh, make_grid, save_mesh
from .polynomials import Polynomial, basis_size

__all__ = [
    "CellGeometry", "DegreeError", "DofLayout", "EdgeFrame", "ElementMatrices", "GlobalDofMap",
    "LinearSystem", "ManufacturedSolution", "MeshError", "ParameterError", "PolyMesh", "Polynomial",
    "ScalarField", "SingularElementError", "SolveResult", "SolverError", "VEMError", "assemble",
    "basis_size", "build_dof_map", "dof_evaluate", "dof_layout", "element_matrices", "error_norms",
    "get_solution", "inhomogeneous_bc_solve", "interpolate", "load_mesh", "make_grid", "monomial_dofs",
    "pairing_functional", "pairing_matrix", "polynomial_field", "rhs_regime", "save_mesh",
    "select_dofs", "serendipity_check", "solve",
]
