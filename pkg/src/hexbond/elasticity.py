"""Trilinear 8-node hexahedron kernels for small-strain isotropic elasticity.

Voigt order used throughout is (11, 22, 33, 12, 23, 13) with engineering
shear strains, so the traction pattern ``N(n) @ sigma`` of the interface
module reads off ``sigma @ n`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaterialError, SingularMapError

# Reference-corner signs (xi, eta, mu) of local nodes 0..7.
CORNER_SIGNS = np.array(
    [
        [-1, -1, -1],
        [+1, -1, -1],
        [+1, +1, -1],
        [-1, +1, -1],
        [-1, -1, +1],
        [+1, -1, +1],
        [+1, +1, +1],
        [-1, +1, +1],
    ],
    dtype=float,
)

_GP = 1.0 / np.sqrt(3.0)
GAUSS_2X2X2 = np.array(
    [[a, b, c] for c in (-_GP, _GP) for b in (-_GP, _GP) for a in (-_GP, _GP)]
)


@dataclass(frozen=True)
class Material:
    """Isotropic linear elastic material."""

    youngs_modulus: float
    poisson_ratio: float

    def __post_init__(self):
        E, nu = self.youngs_modulus, self.poisson_ratio
        if not np.isfinite(E) or E <= 0.0:
            raise MaterialError(f"Young's modulus must be positive, got {E}")
        if nu == 0.5:
            raise MaterialError("poisson_ratio = 0.5 is incompressible; displacement formulation undefined")
        if not (-1.0 < nu < 0.5):
            raise MaterialError(f"poisson_ratio must lie in (-1, 0.5), got {nu}")

    @property
    def lame_lambda(self) -> float:
        E, nu = self.youngs_modulus, self.poisson_ratio
        return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))

    @property
    def shear_modulus(self) -> float:
        return self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))


@dataclass(frozen=True)
class ShapeEval:
    values: np.ndarray  # (8,)
    gradients: np.ndarray  # (8, 3) derivatives w.r.t. (xi, eta, mu)


def shape_eval(r) -> ShapeEval:
    """Trilinear shape functions and their reference gradients at ``r``."""
    r = np.asarray(r, dtype=float)
    f = 1.0 + CORNER_SIGNS * r  # (8, 3) factors (1 + s_i r_i)
    values = 0.125 * f[:, 0] * f[:, 1] * f[:, 2]
    gradients = 0.125 * np.column_stack(
        [
            CORNER_SIGNS[:, 0] * f[:, 1] * f[:, 2],
            CORNER_SIGNS[:, 1] * f[:, 0] * f[:, 2],
            CORNER_SIGNS[:, 2] * f[:, 0] * f[:, 1],
        ]
    )
    return ShapeEval(values, gradients)


def shape_hessian(r) -> np.ndarray:
    """Second reference derivatives, shape (8, 3, 3).

    Pure second derivatives vanish for trilinear functions; only the mixed
    terms survive.
    """
    r = np.asarray(r, dtype=float)
    f = 1.0 + CORNER_SIGNS * r
    s = CORNER_SIGNS
    h = np.zeros((8, 3, 3))
    h[:, 0, 1] = h[:, 1, 0] = 0.125 * s[:, 0] * s[:, 1] * f[:, 2]
    h[:, 0, 2] = h[:, 2, 0] = 0.125 * s[:, 0] * s[:, 2] * f[:, 1]
    h[:, 1, 2] = h[:, 2, 1] = 0.125 * s[:, 1] * s[:, 2] * f[:, 0]
    return h


def map_point(elem_coords, r) -> np.ndarray:
    """Forward isoparametric map: physical point of reference coordinates ``r``."""
    return shape_eval(r).values @ np.asarray(elem_coords, dtype=float)


def _volume_scale(elem_coords: np.ndarray) -> float:
    span = elem_coords.max(axis=0) - elem_coords.min(axis=0)
    return float(np.linalg.norm(span)) ** 3


def jacobian(elem_coords, r) -> tuple[np.ndarray, float]:
    """Jacobian of the isoparametric map at ``r``.

    Row ``i`` holds the tangent vector dx/dr_i, i.e. ``J = G.T @ X`` with
    ``G`` the (8, 3) reference gradients and ``X`` the (8, 3) nodal
    coordinates.

    Raises
    ------
    SingularMapError
        If ``|det J|`` is below ``1e-14`` times the element volume scale.
    """
    X = np.asarray(elem_coords, dtype=float)
    J = shape_eval(r).gradients.T @ X
    det = float(np.linalg.det(J))
    if abs(det) < 1e-14 * _volume_scale(X):
        raise SingularMapError(f"singular isoparametric map at r={tuple(np.round(r, 6))}: det J = {det:.3e}")
    return J, det


def physical_gradients(elem_coords, r) -> tuple[np.ndarray, float]:
    """Physical shape-function gradients (8, 3) and det J at ``r``."""
    grads = shape_eval(r).gradients
    J, det = jacobian(elem_coords, r)
    return np.linalg.solve(J, grads.T).T, det


def _b_from_gradients(dN: np.ndarray) -> np.ndarray:
    B = np.zeros((6, 24))
    B[0, 0::3] = dN[:, 0]
    B[1, 1::3] = dN[:, 1]
    B[2, 2::3] = dN[:, 2]
    # gamma_12
    B[3, 0::3] = dN[:, 1]
    B[3, 1::3] = dN[:, 0]
    # gamma_23
    B[4, 1::3] = dN[:, 2]
    B[4, 2::3] = dN[:, 1]
    # gamma_13
    B[5, 0::3] = dN[:, 2]
    B[5, 2::3] = dN[:, 0]
    return B


def b_matrix(elem_coords, r) -> np.ndarray:
    """6x24 strain-displacement matrix at reference point ``r``."""
    dN, _ = physical_gradients(elem_coords, r)
    return _b_from_gradients(dN)


def d_matrix(material: Material) -> np.ndarray:
    """6x6 isotropic constitutive matrix in the package Voigt order."""
    lam, G = material.lame_lambda, material.shear_modulus
    D = np.zeros((6, 6))
    D[:3, :3] = lam
    D[[0, 1, 2], [0, 1, 2]] = lam + 2.0 * G
    D[[3, 4, 5], [3, 4, 5]] = G
    return D


def element_stiffness(elem_coords, material: Material) -> np.ndarray:
    """24x24 element stiffness via 2x2x2 Gauss-Legendre quadrature (unit weights)."""
    X = np.asarray(elem_coords, dtype=float)
    D = d_matrix(material)
    K = np.zeros((24, 24))
    for r in GAUSS_2X2X2:
        dN, det = physical_gradients(X, r)
        B = _b_from_gradients(dN)
        K += B.T @ D @ B * det
    return 0.5 * (K + K.T)


def shape_matrix(values: np.ndarray) -> np.ndarray:
    """3x24 displacement interpolation matrix from the 8 shape values."""
    N = np.zeros((3, 24))
    for i in range(3):
        N[i, i::3] = values
    return N


def rigid_body_modes(elem_coords) -> np.ndarray:
    """(24, 6) nodal vectors of 3 translations and 3 rotations about the centroid."""
    X = np.asarray(elem_coords, dtype=float)
    x = X - X.mean(axis=0)
    modes = np.zeros((24, 6))
    for i in range(3):
        modes[i::3, i] = 1.0
    for a in range(3):
        axis = np.zeros(3)
        axis[a] = 1.0
        modes[:, 3 + a] = np.cross(axis, x).ravel()
    return modes
