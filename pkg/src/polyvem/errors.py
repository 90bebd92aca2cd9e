"""Exception hierarchy."""


class VEMError(Exception):
    """Base class for all errors raised by polyvem."""


class ParameterError(VEMError, ValueError):
    """Invalid discretization parameters (m, k, ...)."""


class MeshError(VEMError, ValueError):
    """Malformed or invalid mesh / polygon input."""


class DegreeError(VEMError):
    """A polynomial exceeded the degree a dof block can represent (caller bug)."""


class SingularElementError(VEMError):
    """The projection system G of an element is singular."""


class SolverError(VEMError):
    """Global factorization failed (non-positive pivot)."""
