"""Linear elasticity on hexahedral meshes with one non-conforming interface."""

from .elasticity import Material, b_matrix, d_matrix, element_stiffness, jacobian, shape_eval
from .errors import HexbondError
from .interface import CouplingBlocks, normal_matrix, pair_coupling_blocks, surface_quadrature
from .mesh import InterfacePair, InterfaceSpec, Mesh, build_two_region_mesh, detect_interface, face_nodes
from .projection import PlaneEquation, ProjectionResult, fit_plane, inverse_map_newton, oriented_normal
from .solver import BoundaryConditions, SolveReport, apply_dirichlet, assemble_global, build_dof_map, recover_stresses, solve

__version__ = "0.1.0"
