"""Surface coupling terms for one non-conforming interface.

For every slave face the coupling integral is evaluated with the 2x2 Gauss
rule on the face. Each Gauss point is mapped to the physical slave surface,
projected into the master element, and the four 24x24 blocks

    k_ss = sum [ 1/2 F_s^T N_s + 1/2 N_s^T F_s + eps N_s^T N_s ] J
    k_sm = sum [-1/2 F_s^T N_m + 1/2 N_s^T F_m - eps N_s^T N_m ] J
    k_ms = sum [ 1/2 F_m^T N_s - 1/2 N_m^T F_s - eps N_m^T N_s ] J
    k_mm = sum [-1/2 F_m^T N_m - 1/2 N_m^T F_m + eps N_m^T N_m ] J

are accumulated, where ``N`` are 3x24 interpolation matrices and ``F`` the
3x24 traction operators ``normal_matrix(n) @ D @ B``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elasticity import (
    Material,
    b_matrix,
    d_matrix,
    map_point,
    shape_eval,
    shape_matrix,
)
from .errors import InterfaceError, ProjectionError
from .mesh import FACE_AXIS, InterfacePair, Mesh, face_nodes
from .projection import fit_plane, inverse_map_newton, oriented_normal

MODES = ("augmented", "penalty_only")

_GP = 1.0 / np.sqrt(3.0)
FACE_GAUSS = np.array([[-_GP, -_GP], [_GP, -_GP], [_GP, _GP], [-_GP, _GP]])


@dataclass(frozen=True)
class SurfaceGaussPoint:
    face_coords: np.ndarray  # (alpha, beta) on the reference square
    weight: float
    slave_ref: np.ndarray
    master_ref: np.ndarray
    x_s: np.ndarray
    surf_jac: float
    slave_normal: np.ndarray
    master_normal: np.ndarray
    iterations: int = 0


@dataclass(frozen=True)
class CouplingBlocks:
    k_ss: np.ndarray
    k_sm: np.ndarray
    k_ms: np.ndarray
    k_mm: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """48x48 pair matrix acting on (u_slave_elem, u_master_elem)."""
        return np.block([[self.k_ss, self.k_sm], [self.k_ms, self.k_mm]])


def face_to_volume(local_face: int, face_coords) -> np.ndarray:
    """Embed face coordinates (alpha, beta) into element reference coordinates.

    The two free reference axes are taken in increasing order, and the fixed
    axis is pinned to the face value.
    """
    axis, value = FACE_AXIS[local_face]
    free = [t for t in range(3) if t != axis]
    r = np.empty(3)
    r[axis] = value
    r[free[0]], r[free[1]] = face_coords
    return r


def surface_jacobian(elem_coords, local_face: int, face_coords) -> float:
    """Area scale |a_alpha x a_beta| of the face parameterisation."""
    axis, _ = FACE_AXIS[local_face]
    free = [t for t in range(3) if t != axis]
    r = face_to_volume(local_face, face_coords)
    T = shape_eval(r).gradients.T @ np.asarray(elem_coords, dtype=float)
    return float(np.linalg.norm(np.cross(T[free[0]], T[free[1]])))


def pair_normals(mesh: Mesh, pair: InterfacePair) -> tuple[np.ndarray, np.ndarray]:
    """Unit normals of the fitted slave and master face planes, commonly oriented.

    Both point from the master element toward the slave element.
    """
    s_plane = fit_plane(mesh.face_coords(pair.slave_elem, pair.slave_face))
    m_plane = fit_plane(mesh.face_coords(pair.master_elem, pair.master_face))
    s_cent = mesh.element_coords(pair.slave_elem).mean(axis=0)
    m_cent = mesh.element_coords(pair.master_elem).mean(axis=0)
    return oriented_normal(s_plane, m_cent, s_cent), oriented_normal(m_plane, m_cent, s_cent)


def surface_quadrature(pair: InterfacePair, mesh: Mesh, tol: float | None = None) -> list[SurfaceGaussPoint]:
    """Four Gauss points of the slave face with their master-element images.

    Raises
    ------
    InterfaceError
        If a projection fails to converge or lands outside the master element.
    """
    Xs = mesh.element_coords(pair.slave_elem)
    Xm = mesh.element_coords(pair.master_elem)
    n_s, n_m = pair_normals(mesh, pair)
    points = []
    for g, fc in enumerate(FACE_GAUSS):
        r_s = face_to_volume(pair.slave_face, fc)
        x_s = map_point(Xs, r_s)
        try:
            res = inverse_map_newton(Xm, x_s, tol=tol)
        except ProjectionError as exc:
            raise InterfaceError(f"pair {pair}: Gauss point {g}: {exc}") from exc
        if not res.converged:
            raise InterfaceError(
                f"pair {pair}: Gauss point {g} did not converge after {res.iterations} iterations "
                f"(residual {res.residual:.3e})"
            )
        if not res.inside:
            raise InterfaceError(
                f"pair {pair}: Gauss point {g} projects outside the master element "
                f"(ref coords {np.round(res.ref_coords, 8).tolist()})"
            )
        points.append(
            SurfaceGaussPoint(
                face_coords=fc.copy(),
                weight=1.0,
                slave_ref=r_s,
                master_ref=np.clip(res.ref_coords, -1.0, 1.0),
                x_s=x_s,
                surf_jac=surface_jacobian(Xs, pair.slave_face, fc),
                slave_normal=n_s,
                master_normal=n_m,
                iterations=res.iterations,
            )
        )
    return points


def normal_matrix(n) -> np.ndarray:
    """3x6 matrix mapping Voigt stress to the traction sigma @ n."""
    n1, n2, n3 = np.asarray(n, dtype=float)
    return np.array(
        [
            [n1, 0.0, 0.0, n2, 0.0, n3],
            [0.0, n2, 0.0, n1, n3, 0.0],
            [0.0, 0.0, n3, 0.0, n2, n1],
        ]
    )


def traction_operator(elem_coords, r, n, D) -> np.ndarray:
    return normal_matrix(n) @ D @ b_matrix(elem_coords, r)


def pair_coupling_blocks(
    pair: InterfacePair,
    mesh: Mesh,
    material: Material,
    epsilon: float,
    mode: str = "augmented",
    tol: float | None = None,
    points: list[SurfaceGaussPoint] | None = None,
) -> CouplingBlocks:
    """Accumulate the four coupling blocks of one slave/master pair.

    ``mode="penalty_only"`` drops every traction term and keeps the
    ``epsilon`` terms.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if points is None:
        points = surface_quadrature(pair, mesh, tol)
    Xs = mesh.element_coords(pair.slave_elem)
    Xm = mesh.element_coords(pair.master_elem)
    D = d_matrix(material)
    k_ss = np.zeros((24, 24))
    k_sm = np.zeros((24, 24))
    k_ms = np.zeros((24, 24))
    k_mm = np.zeros((24, 24))
    for gp in points:
        Ns = shape_matrix(shape_eval(gp.slave_ref).values)
        Nm = shape_matrix(shape_eval(gp.master_ref).values)
        w = gp.weight * gp.surf_jac
        k_ss += epsilon * Ns.T @ Ns * w
        k_sm -= epsilon * Ns.T @ Nm * w
        k_ms -= epsilon * Nm.T @ Ns * w
        k_mm += epsilon * Nm.T @ Nm * w
        if mode == "augmented":
            Fs = traction_operator(Xs, gp.slave_ref, gp.slave_normal, D)
            Fm = traction_operator(Xm, gp.master_ref, gp.master_normal, D)
            k_ss += 0.5 * (Fs.T @ Ns + Ns.T @ Fs) * w
            k_sm += 0.5 * (-Fs.T @ Nm + Ns.T @ Fm) * w
            k_ms += 0.5 * (Fm.T @ Ns - Nm.T @ Fs) * w
            k_mm -= 0.5 * (Fm.T @ Nm + Nm.T @ Fm) * w
    return CouplingBlocks(k_ss, k_sm, k_ms, k_mm)


def evaluate_penetration(pair: InterfacePair, gp: SurfaceGaussPoint, U_s_elem, U_m_elem) -> np.ndarray:
    """Displacement jump u_s - u_m at one interface Gauss point."""
    del pair  # geometry already resolved in gp
    us = shape_eval(gp.slave_ref).values @ np.asarray(U_s_elem, dtype=float).reshape(8, 3)
    um = shape_eval(gp.master_ref).values @ np.asarray(U_m_elem, dtype=float).reshape(8, 3)
    return us - um


def element_diameter(elem_coords) -> float:
    X = np.asarray(elem_coords, dtype=float)
    diffs = X[:, None, :] - X[None, :, :]
    return float(np.sqrt((diffs**2).sum(axis=-1)).max())


def default_penalty(mesh: Mesh, pair: InterfacePair, material: Material, alpha: float = 10.0) -> float:
    """eps = alpha * E / h_s with h_s the slave element diameter."""
    return alpha * material.youngs_modulus / element_diameter(mesh.element_coords(pair.slave_elem))


def slave_face_node_ids(mesh: Mesh, pair: InterfacePair) -> list[int]:
    return face_nodes(mesh.elements[pair.slave_elem], pair.slave_face)
