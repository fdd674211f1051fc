"""Built-in verification cases: constant-stress patch, cantilever beams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elasticity import Material, d_matrix
from .mesh import Mesh, build_block_mesh, build_two_region_mesh, detect_interface, merge_coincident_nodes
from .solver import (
    BoundaryConditions,
    SolveReport,
    apply_dirichlet,
    assemble_global,
    faces_in_node_set,
    recover_stresses,
    solve,
)

ALPHAS = (1.0, 10.0, 100.0, 1000.0)


@dataclass
class CaseResult:
    mesh: Mesh
    material: Material
    report: SolveReport
    stresses: np.ndarray
    exact_U: np.ndarray | None = None
    exact_stress: np.ndarray | None = None

    @property
    def stress_deviation(self) -> float:
        return float(np.abs(self.stresses - self.exact_stress).max())

    @property
    def displacement_error(self) -> float:
        """Max nodal error relative to the max exact displacement."""
        return float(np.abs(self.report.U - self.exact_U).max() / np.abs(self.exact_U).max())

    @property
    def relative_penetration(self) -> float:
        return self.report.max_penetration / self.report.max_displacement


def run_case(mesh, material, interface, bcs, epsilon=None, alpha=10.0, mode="augmented", tol=None):
    system = assemble_global(mesh, material, interface, epsilon, mode, alpha, bcs.neumann, tol)
    system = apply_dirichlet(system, bcs)
    report = solve(system)
    return report, recover_stresses(mesh, material, report.U)


def patch_mesh(ratio: int = 2) -> Mesh:
    """Fine ratio x ratio x 1 block on [0,1]^3 below a single coarse cube on [0,1]^2 x [1,2]."""
    return build_two_region_mesh(
        (ratio, ratio, 1),
        (1, 1, 1),
        (((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)), ((0.0, 0.0, 1.0), (1.0, 1.0, 2.0))),
        "z",
    )


def patch_test(ratio: int = 2, alpha: float = 10.0, material: Material | None = None, sigma: float = 1.0,
               mode: str = "augmented") -> CaseResult:
    """Uniaxial tension across the interface with minimal (non-restraining) supports.

    Exact field: u = (-nu x, -nu y, z) * sigma / E, sigma_33 = sigma.
    """
    material = material or Material(1.0, 0.3)
    mesh = patch_mesh(ratio)
    interface = detect_interface(mesh, "z", 1.0)
    bcs = BoundaryConditions()
    bcs.load_faces(faces_in_node_set(mesh, mesh.node_sets["zmax"]), (0.0, 0.0, sigma))
    bcs.fix_nodes(mesh.node_sets["zmin"], (2,))
    bcs.fix_nodes(mesh.nodes_near((0.0, 0.0, 0.0)), (0, 1))
    bcs.fix_nodes(mesh.nodes_near((1.0, 0.0, 0.0)), (1,))
    report, stresses = run_case(mesh, material, interface, bcs, alpha=alpha, mode=mode)
    E, nu = material.youngs_modulus, material.poisson_ratio
    x = mesh.nodes
    exact_U = (np.column_stack([-nu * x[:, 0], -nu * x[:, 1], x[:, 2]]) * sigma / E).ravel()
    exact_stress = np.array([0.0, 0.0, sigma, 0.0, 0.0, 0.0])
    return CaseResult(mesh, material, report, stresses, exact_U, exact_stress)


def general_patch_test(stress_voigt, ratio: int = 2, alpha: float = 10.0, material: Material | None = None) -> CaseResult:
    """Arbitrary constant stress state: tractions sigma.n on every outer face.

    Rigid modes are removed by pinning three corner nodes to the exact field
    ``u = eps . x`` (zero rotation), so the exact solution is that field.
    """
    material = material or Material(1.0, 0.3)
    s = np.asarray(stress_voigt, dtype=float)
    sig = np.array([[s[0], s[3], s[5]], [s[3], s[1], s[4]], [s[5], s[4], s[2]]])
    strain_v = np.linalg.solve(d_matrix(material), s)
    eps = np.array(
        [
            [strain_v[0], strain_v[3] / 2, strain_v[5] / 2],
            [strain_v[3] / 2, strain_v[1], strain_v[4] / 2],
            [strain_v[5] / 2, strain_v[4] / 2, strain_v[2]],
        ]
    )
    mesh = patch_mesh(ratio)
    interface = detect_interface(mesh, "z", 1.0)
    bcs = BoundaryConditions()
    normals = {"xmin": (-1, 0, 0), "xmax": (1, 0, 0), "ymin": (0, -1, 0), "ymax": (0, 1, 0),
               "zmin": (0, 0, -1), "zmax": (0, 0, 1)}
    for name, n in normals.items():
        bcs.load_faces(faces_in_node_set(mesh, mesh.node_sets[name]), sig @ np.asarray(n, dtype=float))
    exact = mesh.nodes @ eps.T
    p0 = mesh.nodes_near((0.0, 0.0, 0.0))
    p1 = mesh.nodes_near((1.0, 0.0, 0.0))
    p2 = mesh.nodes_near((0.0, 1.0, 0.0))
    for n in p0:
        bcs.fix_nodes([n], (0, 1, 2), 0.0)
    for n in p1:
        bcs.fix_nodes([n], (1,), exact[n, 1])
        bcs.fix_nodes([n], (2,), exact[n, 2])
    for n in p2:
        bcs.fix_nodes([n], (2,), exact[n, 2])
    report, stresses = run_case(mesh, material, interface, bcs, alpha=alpha)
    return CaseResult(mesh, material, report, stresses, exact.ravel(), s)


def _cantilever_bcs(mesh: Mesh, length: float, traction) -> BoundaryConditions:
    bcs = BoundaryConditions()
    bcs.fix_nodes(mesh.node_sets["xmin"])
    bcs.load_faces(faces_in_node_set(mesh, mesh.node_sets["xmax"]), traction)
    return bcs


def tip_deflection(mesh: Mesh, U, component: int = 2) -> float:
    tip = mesh.node_sets["xmax"]
    return float(np.asarray(U).reshape(-1, 3)[tip, component].mean())


@dataclass
class BeamResult:
    mesh: Mesh
    report: SolveReport
    tip: float


BEAM_TRACTION = (0.0, 0.0, -1e-3)
BEAM_LENGTH = 8.0
BEAM_WIDTH = 1.0
BEAM_HEIGHT = 2.0


def beam_mesh(ratio: int = 2) -> Mesh:
    """Cantilever 8 x 1 x 2 split across the span at x = 4.

    The clamped half carries 8 fine elements along the span with a
    ``ratio x 2*ratio`` cross-section; the tip half has 4 coarse elements
    with a 1 x 2 cross-section, so each coarse face meets ``ratio**2`` fine
    faces.
    """
    if ratio < 1:
        raise ValueError(f"ratio must be >= 1, got {ratio}")
    half = BEAM_LENGTH / 2
    return build_two_region_mesh(
        (8, ratio, 2 * ratio),
        (4, 1, 2),
        (((0.0, 0.0, 0.0), (half, BEAM_WIDTH, BEAM_HEIGHT)), ((half, 0.0, 0.0), (BEAM_LENGTH, BEAM_WIDTH, BEAM_HEIGHT))),
        "x",
    )


def split_beam(ratio: int = 2, alpha: float = 10.0, material: Material | None = None, epsilon=None,
               mode: str = "augmented") -> BeamResult:
    """Non-conforming cantilever (see :func:`beam_mesh`), shear traction at the tip."""
    material = material or Material(1.0, 0.3)
    mesh = beam_mesh(ratio)
    interface = detect_interface(mesh, "x", BEAM_LENGTH / 2)
    bcs = _cantilever_bcs(mesh, BEAM_LENGTH, BEAM_TRACTION)
    report, _ = run_case(mesh, material, interface, bcs, epsilon=epsilon, alpha=alpha, mode=mode)
    return BeamResult(mesh, report, tip_deflection(mesh, report.U))


def conforming_beam(ratio: int = 2, material: Material | None = None) -> BeamResult:
    """Uniformly fine conforming reference with the fine-half element size everywhere."""
    material = material or Material(1.0, 0.3)
    mesh = build_block_mesh((16, ratio, 2 * ratio), ((0.0, 0.0, 0.0), (BEAM_LENGTH, BEAM_WIDTH, BEAM_HEIGHT)))
    bcs = _cantilever_bcs(mesh, BEAM_LENGTH, BEAM_TRACTION)
    report, _ = run_case(mesh, material, None, bcs)
    return BeamResult(mesh, report, tip_deflection(mesh, report.U))


def conforming_consistency(alpha: float = 10.0, material: Material | None = None, ratio: int = 2):
    """1:1 interface cantilever against the same mesh with merged nodes.

    Returns (interface_result, merged_result, relative 2-norm difference),
    comparing displacements node-by-node through the merge map.
    """
    material = material or Material(1.0, 0.3)
    half = BEAM_LENGTH / 2
    div = (8, ratio, 2 * ratio)
    mesh = build_two_region_mesh(
        div,
        div,
        (((0.0, 0.0, 0.0), (half, BEAM_WIDTH, BEAM_HEIGHT)), ((half, 0.0, 0.0), (BEAM_LENGTH, BEAM_WIDTH, BEAM_HEIGHT))),
        "x",
    )
    interface = detect_interface(mesh, "x", half)
    bcs = _cantilever_bcs(mesh, BEAM_LENGTH, BEAM_TRACTION)
    rep_i, _ = run_case(mesh, material, interface, bcs, alpha=alpha)
    merged = merge_coincident_nodes(mesh)
    rep_m, _ = run_case(merged, material, None, _cantilever_bcs(merged, BEAM_LENGTH, BEAM_TRACTION))
    # expand the merged solution back onto the duplicated node numbering
    idx = np.array([merged.nodes_near(x)[0] for x in mesh.nodes])
    U_m = rep_m.displacements[idx].ravel()
    diff = float(np.linalg.norm(rep_i.U - U_m) / np.linalg.norm(U_m))
    return (
        BeamResult(mesh, rep_i, tip_deflection(mesh, rep_i.U)),
        BeamResult(merged, rep_m, tip_deflection(merged, rep_m.U)),
        diff,
    )
