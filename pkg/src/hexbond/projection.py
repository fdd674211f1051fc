"""Face plane fitting and Newton inverse mapping onto master elements."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .elasticity import shape_eval, shape_hessian
from .errors import DegenerateFaceError, HexbondError, ProjectionError

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 25
# Slack allowed on converged reference coordinates before the point is
# considered outside the master element.
REF_SLACK = 1e-6


def default_tol() -> float:
    """Projection tolerance, overridable through ``HEXBOND_TOL``."""
    raw = os.environ.get("HEXBOND_TOL")
    if raw is None or not raw.strip():
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise HexbondError(f"HEXBOND_TOL is not a number: {raw!r}") from exc
    if not tol > 0.0:
        raise HexbondError(f"HEXBOND_TOL must be positive, got {tol}")
    return tol


@dataclass(frozen=True)
class PlaneEquation:
    """Plane ``unit_normal . x = offset``."""

    unit_normal: np.ndarray
    offset: float

    def signed_distance(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.unit_normal - self.offset


def fit_plane(points) -> PlaneEquation:
    """Least-squares plane through a set of points by SVD.

    The normal is the right singular vector belonging to the smallest
    singular value of the centred point matrix.
    """
    P = np.asarray(points, dtype=float)
    c = P.mean(axis=0)
    _, s, vt = np.linalg.svd(P - c)
    if s[0] == 0.0 or s[1] <= 1e-12 * s[0]:
        raise DegenerateFaceError(f"face points are collinear or coincident (singular values {s})")
    n = vt[-1]
    n = n / np.linalg.norm(n)
    return PlaneEquation(n, float(n @ c))


def oriented_normal(plane: PlaneEquation, from_point, to_point) -> np.ndarray:
    """Plane normal signed to point from ``from_point`` toward ``to_point``."""
    d = np.asarray(to_point, dtype=float) - np.asarray(from_point, dtype=float)
    proj = float(plane.unit_normal @ d)
    if abs(proj) <= 1e-12 * max(np.linalg.norm(d), 1e-300):
        raise HexbondError("cannot orient normal: reference points are parallel to the plane")
    return plane.unit_normal if proj > 0.0 else -plane.unit_normal


@dataclass
class ProjectionResult:
    ref_coords: np.ndarray
    iterations: int
    converged: bool
    residual: float  # max |f_i| of the orthogonality system
    inside: bool = True
    trace: list = field(default_factory=list, repr=False)


def _orthogonality_system(X: np.ndarray, x_s: np.ndarray, r: np.ndarray):
    se = shape_eval(r)
    E = se.gradients.T @ X  # rows: tangent vectors e1, e2, e3
    chi = x_s - se.values @ X
    f = E @ chi
    # d e_i / d r_j . chi  -  e_i . e_j
    H = shape_hessian(r)
    dE = np.einsum("kij,kc->ijc", H, X)
    jac = dE @ chi - E @ E.T
    return f, jac, chi


def inverse_map_newton(
    master_coords, x_s, tol: float | None = None, max_iter: int = DEFAULT_MAX_ITER, initial=None
) -> ProjectionResult:
    """Reference coordinates of ``x_s`` in the master element.

    Solves ``e_i . (x_s - x(r)) = 0`` for ``i = 1..3`` by Newton iteration
    from ``r = 0``. Iteration stops when the update satisfies
    ``|dr| < tol * |r|`` (relative, for ``|r| >= 1``) or ``|dr| < tol``
    (absolute, for ``|r| < 1``), or when the physical gap
    ``|x_s - x(r)|`` is already below ``tol`` times the element diameter.

    Raises
    ------
    ProjectionError
        If the Newton matrix is singular.
    """
    tol = default_tol() if tol is None else tol
    X = np.asarray(master_coords, dtype=float)
    x_s = np.asarray(x_s, dtype=float)
    diam = float(np.linalg.norm(X.max(axis=0) - X.min(axis=0)))
    r = np.zeros(3) if initial is None else np.array(initial, dtype=float)
    trace = [r.copy()]
    converged = False
    it = 0
    f, jac, chi = _orthogonality_system(X, x_s, r)
    while it < max_iter:
        if np.linalg.norm(chi) <= tol * diam:
            converged = True
            break
        try:
            dr = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError as exc:
            raise ProjectionError(f"singular Newton matrix at iterate {r}") from exc
        if not np.all(np.isfinite(dr)):
            raise ProjectionError(f"non-finite Newton update at iterate {r}")
        r_norm = np.linalg.norm(r)
        r = r - dr
        it += 1
        trace.append(r.copy())
        f, jac, chi = _orthogonality_system(X, x_s, r)
        step = np.linalg.norm(dr)
        if step < (tol * r_norm if r_norm >= 1.0 else tol):
            converged = True
            break
    inside = bool(np.all(np.abs(r) <= 1.0 + REF_SLACK))
    return ProjectionResult(
        ref_coords=r,
        iterations=it,
        converged=converged,
        residual=float(np.max(np.abs(f))),
        inside=inside,
        trace=trace,
    )
