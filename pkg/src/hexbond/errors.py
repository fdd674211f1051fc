"""Exception hierarchy used across the package."""


class HexbondError(Exception):
    """Base class for all errors raised by hexbond."""


class MeshError(HexbondError):
    """Invalid mesh construction, topology or file content."""


class InterfaceError(HexbondError):
    """Interface detection or slave/master pairing failed."""


class SingularMapError(HexbondError):
    """Isoparametric map has (near) zero Jacobian determinant."""


class DegenerateFaceError(HexbondError):
    """Face points are collinear or coincident; no plane can be fitted."""


class ProjectionError(HexbondError):
    """Newton inverse mapping broke down or left the master element."""


class MaterialError(HexbondError):
    """Material parameters outside the admissible range."""


class SolverError(HexbondError):
    """Global system could not be factorized or solved."""


class ConfigError(HexbondError):
    """Run configuration is malformed or inconsistent."""
