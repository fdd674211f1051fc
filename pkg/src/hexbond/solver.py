"""Global assembly, boundary conditions, linear solve and post-processing."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elasticity import GAUSS_2X2X2, Material, b_matrix, d_matrix, element_stiffness, shape_eval, shape_matrix
from .errors import SolverError
from .interface import (
    FACE_GAUSS,
    MODES,
    CouplingBlocks,
    SurfaceGaussPoint,
    default_penalty,
    evaluate_penetration,
    face_to_volume,
    pair_coupling_blocks,
    surface_jacobian,
    surface_quadrature,
    traction_operator,
)
from .mesh import InterfacePair, InterfaceSpec, Mesh, face_nodes

log = logging.getLogger(__name__)

RESIDUAL_BOUND = 1e-10
PIVOT_RATIO = 1e-13


@dataclass(frozen=True)
class DofMap:
    """Three DOFs per node (``3*node + component``) with r/s/m partition labels."""

    node_labels: np.ndarray  # (N,) of 'r' | 's' | 'm'

    @property
    def n_dofs(self) -> int:
        return 3 * len(self.node_labels)

    @property
    def labels(self) -> np.ndarray:
        return np.repeat(self.node_labels, 3)

    def dofs(self, label: str) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    @staticmethod
    def node_dofs(nodes) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=np.int64)
        return (3 * nodes[:, None] + np.arange(3)).ravel()


def build_dof_map(mesh: Mesh, interface: InterfaceSpec | None) -> DofMap:
    labels = np.full(mesh.n_nodes, "r", dtype="<U1")
    if interface is not None:
        m_nodes = np.unique(mesh.elements[interface.master_elements]) if interface.pairs else []
        s_nodes = np.unique(mesh.elements[interface.slave_elements]) if interface.pairs else []
        labels[m_nodes] = "m"
        labels[s_nodes] = "s"
    return DofMap(labels)


@dataclass
class BoundaryConditions:
    dirichlet: list = field(default_factory=list)  # (dof, value)
    neumann: list = field(default_factory=list)  # ((elem, local_face), traction 3-vector)

    def fix_nodes(self, nodes, components=(0, 1, 2), value=0.0):
        for n in np.asarray(nodes, dtype=np.int64).ravel():
            for c in components:
                self.dirichlet.append((3 * int(n) + int(c), float(value)))
        return self

    def prescribe(self, nodes, values):
        """Impose a full displacement vector per node, ``values`` shape (len(nodes), 3)."""
        values = np.asarray(values, dtype=float).reshape(-1, 3)
        for n, v in zip(np.asarray(nodes, dtype=np.int64).ravel(), values):
            for c in range(3):
                self.dirichlet.append((3 * int(n) + c, float(v[c])))
        return self

    def load_faces(self, faces, traction):
        for ef in faces:
            self.neumann.append((tuple(int(i) for i in ef), np.asarray(traction, dtype=float)))
        return self


@dataclass
class PairData:
    pair: InterfacePair
    points: list  # SurfaceGaussPoint
    blocks: CouplingBlocks
    epsilon: float


@dataclass
class GlobalSystem:
    stiffness: sp.csr_matrix
    load: np.ndarray
    dof_map: DofMap
    mesh: Mesh
    material: Material
    mode: str = "augmented"
    interface: InterfaceSpec | None = None
    pair_data: list = field(default_factory=list)
    # pre-elimination copies, kept for reactions and energy
    raw_stiffness: sp.csr_matrix | None = None
    raw_load: np.ndarray | None = None
    prescribed: dict = field(default_factory=dict)


def neumann_load(mesh: Mesh, neumann) -> np.ndarray:
    """Consistent nodal forces of constant face tractions (2x2 face quadrature)."""
    P = np.zeros(3 * mesh.n_nodes)
    for (e, f), t in neumann:
        X = mesh.element_coords(e)
        dofs = DofMap.node_dofs(mesh.elements[e])
        for fc in FACE_GAUSS:
            r = face_to_volume(f, fc)
            N = shape_matrix(shape_eval(r).values)
            P[dofs] += N.T @ np.asarray(t, dtype=float) * surface_jacobian(X, f, fc)
    return P


def assemble_global(
    mesh: Mesh,
    material: Material,
    interface: InterfaceSpec | None,
    epsilon=None,
    mode: str = "augmented",
    alpha: float = 10.0,
    neumann=(),
    tol: float | None = None,
) -> GlobalSystem:
    """Assemble K^d plus the interface coupling blocks and the Neumann load.

    ``epsilon`` may be a float (shared by all pairs), a callable
    ``(mesh, pair, material) -> float``, or ``None`` to use
    ``alpha * E / h_s`` per pair.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    ndof = 3 * mesh.n_nodes
    rows, cols, vals = [], [], []
    for e in range(mesh.n_elements):
        dofs = DofMap.node_dofs(mesh.elements[e])
        ke = element_stiffness(mesh.element_coords(e), material)
        rows.append(np.repeat(dofs, 24))
        cols.append(np.tile(dofs, 24))
        vals.append(ke.ravel())
    pair_data = []
    for pair in interface or ():
        if epsilon is None:
            eps = default_penalty(mesh, pair, material, alpha)
        elif callable(epsilon):
            eps = float(epsilon(mesh, pair, material))
        else:
            eps = float(epsilon)
        points = surface_quadrature(pair, mesh, tol)
        blocks = pair_coupling_blocks(pair, mesh, material, eps, mode, points=points)
        pair_data.append(PairData(pair, points, blocks, eps))
        dofs = np.concatenate(
            [DofMap.node_dofs(mesh.elements[pair.slave_elem]), DofMap.node_dofs(mesh.elements[pair.master_elem])]
        )
        rows.append(np.repeat(dofs, 48))
        cols.append(np.tile(dofs, 48))
        vals.append(blocks.as_matrix().ravel())
    if rows:
        K = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(ndof, ndof))
    else:
        K = sp.coo_matrix((ndof, ndof))
    K = K.tocsr()
    K.sum_duplicates()
    P = neumann_load(mesh, neumann)
    return GlobalSystem(
        stiffness=K,
        load=P,
        dof_map=build_dof_map(mesh, interface),
        mesh=mesh,
        material=material,
        mode=mode,
        interface=interface,
        pair_data=pair_data,
        raw_stiffness=K.copy(),
        raw_load=P.copy(),
    )


def apply_dirichlet(system: GlobalSystem, bcs: BoundaryConditions) -> GlobalSystem:
    """Symmetric elimination of prescribed DOFs.

    Prescribed columns are moved to the right-hand side, and each prescribed
    row/column is replaced by a diagonal entry equal to the mean absolute
    diagonal of the matrix.
    """
    prescribed = {}
    for dof, value in bcs.dirichlet:
        dof = int(dof)
        if dof in prescribed:
            raise SolverError(f"DOF {dof} is constrained twice")
        if not 0 <= dof < system.dof_map.n_dofs:
            raise SolverError(f"DOF {dof} out of range")
        prescribed[dof] = float(value)
    if not prescribed:
        return system
    K = system.stiffness.tocsr()
    n = K.shape[0]
    idx = np.fromiter(prescribed.keys(), dtype=np.int64)
    vals = np.fromiter(prescribed.values(), dtype=float)
    u_bar = np.zeros(n)
    u_bar[idx] = vals
    P = system.load - K @ u_bar
    diag = np.abs(K.diagonal())
    scale = float(diag[diag > 0].mean()) if np.any(diag > 0) else 1.0
    keep = np.ones(n)
    keep[idx] = 0.0
    mask = sp.diags(keep)
    fixed = np.zeros(n)
    fixed[idx] = scale
    K = (mask @ K @ mask + sp.diags(fixed)).tocsr()
    K.eliminate_zeros()
    P[idx] = scale * vals
    out = GlobalSystem(**{**system.__dict__})
    out.stiffness = K
    out.load = P
    out.prescribed = {**system.prescribed, **prescribed}
    return out


@dataclass
class SolveReport:
    U: np.ndarray
    mode: str
    max_penetration: float
    interface_traction_gap: float
    residual_norm: float
    load_norm: float
    energy: float
    n_dofs: int
    n_pairs: int
    factor_nnz: int
    max_displacement: float
    reactions: np.ndarray = field(repr=False, default=None)
    warnings: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def displacements(self) -> np.ndarray:
        return self.U.reshape(-1, 3)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_dofs": self.n_dofs,
            "n_pairs": self.n_pairs,
            "max_displacement": self.max_displacement,
            "max_penetration": self.max_penetration,
            "relative_penetration": self.max_penetration / self.max_displacement if self.max_displacement else 0.0,
            "interface_traction_gap": self.interface_traction_gap,
            "residual_norm": self.residual_norm,
            "load_norm": self.load_norm,
            "energy": self.energy,
            "factor_nnz": self.factor_nnz,
            "warnings": len(self.warnings),
            "errors": len(self.errors),
        }


def _factorize(K: sp.csc_matrix, mode: str):
    try:
        lu = spla.splu(
            K,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise SolverError(f"factorization failed in {mode} mode ({exc}); check constraints or increase epsilon") from exc
    d = np.abs(lu.U.diagonal())
    if d.size and (d.min() <= PIVOT_RATIO * d.max()):
        raise SolverError(
            f"system is singular in {mode} mode (pivot ratio {d.min() / d.max():.2e}); "
            "check that rigid-body modes are constrained or increase epsilon"
        )
    return lu


def interface_diagnostics(system: GlobalSystem, U: np.ndarray) -> tuple[float, float]:
    """(max |g|, max |t_s - t_m|) over all interface Gauss points."""
    mesh = system.mesh
    D = d_matrix(system.material)
    max_g = 0.0
    max_gap = 0.0
    for pd in system.pair_data:
        p = pd.pair
        us = U[DofMap.node_dofs(mesh.elements[p.slave_elem])]
        um = U[DofMap.node_dofs(mesh.elements[p.master_elem])]
        Xs, Xm = mesh.element_coords(p.slave_elem), mesh.element_coords(p.master_elem)
        for gp in pd.points:
            g = evaluate_penetration(p, gp, us, um)
            max_g = max(max_g, float(np.linalg.norm(g)))
            ts = traction_operator(Xs, gp.slave_ref, gp.slave_normal, D) @ us
            tm = traction_operator(Xm, gp.master_ref, gp.master_normal, D) @ um
            max_gap = max(max_gap, float(np.linalg.norm(ts - tm)))
    return max_g, max_gap


def solve(system: GlobalSystem) -> SolveReport:
    """Direct solve with symmetric-mode sparse LU, then diagnostics from ``U``.

    Raises
    ------
    SolverError
        If the matrix is singular (e.g. unconstrained rigid-body modes).
    """
    K = system.stiffness.tocsc()
    P = system.load
    lu = _factorize(K, system.mode)
    U = lu.solve(P)
    # one step of iterative refinement; pivots are restricted to the diagonal
    U += lu.solve(P - K @ U)
    res = float(np.linalg.norm(K @ U - P))
    pnorm = float(np.linalg.norm(P))
    warnings = []
    if res > RESIDUAL_BOUND * max(pnorm, 1e-300):
        msg = f"residual {res:.3e} exceeds {RESIDUAL_BOUND:g} * |P| = {RESIDUAL_BOUND * pnorm:.3e}"
        log.warning(msg)
        warnings.append(msg)
    Kraw = system.raw_stiffness if system.raw_stiffness is not None else system.stiffness
    Praw = system.raw_load if system.raw_load is not None else system.load
    KU = Kraw @ U
    reactions = KU - Praw
    energy = 0.5 * float(U @ KU) - float(U @ Praw)
    max_g, gap = interface_diagnostics(system, U)
    return SolveReport(
        U=U,
        mode=system.mode,
        max_penetration=max_g,
        interface_traction_gap=gap,
        residual_norm=res,
        load_norm=pnorm,
        energy=energy,
        n_dofs=len(U),
        n_pairs=len(system.pair_data),
        factor_nnz=int(lu.L.nnz + lu.U.nnz),
        max_displacement=float(np.abs(U).max()) if len(U) else 0.0,
        reactions=reactions,
        warnings=warnings,
    )


def recover_stresses(mesh: Mesh, material: Material, U) -> np.ndarray:
    """Voigt stresses at the 2x2x2 Gauss points, shape (E, 8, 6)."""
    U = np.asarray(U, dtype=float)
    D = d_matrix(material)
    out = np.zeros((mesh.n_elements, len(GAUSS_2X2X2), 6))
    for e in range(mesh.n_elements):
        X = mesh.element_coords(e)
        ue = U[DofMap.node_dofs(mesh.elements[e])]
        for q, r in enumerate(GAUSS_2X2X2):
            out[e, q] = D @ (b_matrix(X, r) @ ue)
    return out


def faces_in_node_set(mesh: Mesh, nodes) -> list[tuple[int, int]]:
    """Boundary faces (elem, local_face) whose four corners all belong to ``nodes``."""
    nodes = set(int(n) for n in np.asarray(nodes).ravel())
    out = []
    for e in range(mesh.n_elements):
        for f in range(6):
            if all(n in nodes for n in face_nodes(mesh.elements[e], f)):
                out.append((e, f))
    return out
