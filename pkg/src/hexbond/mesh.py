"""Hexahedral meshes, two-region generators and interface detection.

Faces are numbered ``0..5 = (xi=-1, xi=+1, eta=-1, eta=+1, mu=-1, mu=+1)``
and their corner lists run counter-clockwise seen from outside the element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .elasticity import CORNER_SIGNS, jacobian
from .errors import InterfaceError, MeshError, SingularMapError
from .projection import fit_plane

FACE_NODES = (
    (0, 4, 7, 3),  # xi = -1
    (1, 2, 6, 5),  # xi = +1
    (0, 1, 5, 4),  # eta = -1
    (3, 7, 6, 2),  # eta = +1
    (0, 3, 2, 1),  # mu = -1
    (4, 5, 6, 7),  # mu = +1
)
# (fixed reference axis, its value) for each local face
FACE_AXIS = ((0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0), (2, -1.0), (2, 1.0))

TAGS = ("fine", "coarse", "untagged")
AXES = {"x": 0, "y": 1, "z": 2}


def axis_index(axis) -> int:
    if isinstance(axis, str):
        try:
            return AXES[axis.lower()]
        except KeyError:
            raise MeshError(f"unknown axis {axis!r}") from None
    if axis not in (0, 1, 2):
        raise MeshError(f"axis must be 0, 1 or 2, got {axis!r}")
    return int(axis)


@dataclass(frozen=True)
class Node:
    id: int
    coords: np.ndarray


@dataclass(frozen=True)
class HexElement:
    id: int
    node_ids: tuple


@dataclass(frozen=True)
class Mesh:
    """Nodes (N, 3), hex connectivity (E, 8), per-element tags and node sets."""

    nodes: np.ndarray
    elements: np.ndarray
    tags: tuple
    node_sets: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).reshape(-1, 3)
        elements = np.array(self.elements, dtype=np.int64).reshape(-1, 8)
        if not np.all(np.isfinite(nodes)):
            raise MeshError("node coordinates must be finite")
        if elements.size and (elements.min() < 0 or elements.max() >= len(nodes)):
            raise MeshError("element references a node index out of range")
        tags = tuple(self.tags)
        if len(tags) != len(elements):
            raise MeshError(f"{len(tags)} tags for {len(elements)} elements")
        bad = sorted(set(tags) - set(TAGS))
        if bad:
            raise MeshError(f"unknown region tags {bad}")
        sets = {}
        for name, ids in self.node_sets.items():
            ids = np.array(sorted(set(int(i) for i in ids)), dtype=np.int64)
            if ids.size and (ids.min() < 0 or ids.max() >= len(nodes)):
                raise MeshError(f"node set {name!r} references a node out of range")
            ids.setflags(write=False)
            sets[name] = ids
        nodes.setflags(write=False)
        elements.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "tags", tags)
        object.__setattr__(self, "node_sets", sets)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def tolerance(self) -> float:
        """Coincidence tolerance: 1e-9 of the bounding-box diagonal."""
        if not len(self.nodes):
            return 1e-9
        return 1e-9 * float(np.linalg.norm(self.nodes.max(axis=0) - self.nodes.min(axis=0)))

    def node(self, i: int) -> Node:
        return Node(int(i), self.nodes[i])

    def element(self, e: int) -> HexElement:
        return HexElement(int(e), tuple(int(n) for n in self.elements[e]))

    def element_coords(self, e: int) -> np.ndarray:
        return self.nodes[self.elements[e]]

    def face_coords(self, e: int, local_face: int) -> np.ndarray:
        return self.nodes[face_nodes(self.elements[e], local_face)]

    def check_orientation(self):
        """Raise MeshError unless every element has det J > 0 at all 8 corners."""
        for e in range(self.n_elements):
            X = self.element_coords(e)
            for r in CORNER_SIGNS:
                try:
                    _, det = jacobian(X, r)
                except SingularMapError as exc:
                    raise MeshError(f"element {e}: {exc}") from exc
                if det <= 0.0:
                    raise MeshError(f"element {e} is inverted at corner {tuple(r)} (det J = {det:.3e})")

    def nodes_near(self, point, tol: float | None = None) -> np.ndarray:
        tol = self.tolerance if tol is None else tol
        d = np.linalg.norm(self.nodes - np.asarray(point, dtype=float), axis=1)
        return np.flatnonzero(d <= max(tol, 1e-300))

    def nodes_on_plane(self, axis, coord: float) -> np.ndarray:
        a = axis_index(axis)
        return np.flatnonzero(np.abs(self.nodes[:, a] - coord) <= self.tolerance)


def face_nodes(element, local_face: int) -> list[int]:
    """Corner node ids of ``local_face``, counter-clockwise from outside."""
    ids = element.node_ids if isinstance(element, HexElement) else element
    return [int(ids[k]) for k in FACE_NODES[local_face]]


def quad_area(points) -> float:
    P = np.asarray(points, dtype=float)
    return 0.5 * float(np.linalg.norm(np.cross(P[2] - P[0], P[3] - P[1])))


def _block(divisions, box, offset: int):
    nx, ny, nz = (int(d) for d in divisions)
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    xs = [np.linspace(lo[a], hi[a], n + 1) for a, n in enumerate((nx, ny, nz))]
    grid = np.array([[x, y, z] for z in xs[2] for y in xs[1] for x in xs[0]])

    def nid(i, j, k):
        return offset + i + (nx + 1) * (j + (ny + 1) * k)

    elems = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                elems.append(
                    [
                        nid(i, j, k),
                        nid(i + 1, j, k),
                        nid(i + 1, j + 1, k),
                        nid(i, j + 1, k),
                        nid(i, j, k + 1),
                        nid(i + 1, j, k + 1),
                        nid(i + 1, j + 1, k + 1),
                        nid(i, j + 1, k + 1),
                    ]
                )
    return grid, np.array(elems, dtype=np.int64)


def _check_divisions(divisions, name):
    if len(divisions) != 3 or any(int(d) != d or d < 1 for d in divisions):
        raise MeshError(f"{name} divisions must be three positive integers, got {divisions}")


def _check_box(box, name):
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    if lo.shape != (3,) or hi.shape != (3,) or np.any(hi - lo <= 0.0):
        raise MeshError(f"degenerate {name} extents {box}")


def _boundary_sets(nodes: np.ndarray, tol: float) -> dict:
    lo, hi = nodes.min(axis=0), nodes.max(axis=0)
    sets = {}
    for a, name in enumerate("xyz"):
        sets[f"{name}min"] = np.flatnonzero(np.abs(nodes[:, a] - lo[a]) <= tol)
        sets[f"{name}max"] = np.flatnonzero(np.abs(nodes[:, a] - hi[a]) <= tol)
    return sets


def build_block_mesh(divisions, box, tag: str = "untagged") -> Mesh:
    """Single structured block of hexahedra."""
    _check_divisions(divisions, "block")
    _check_box(box, "block")
    nodes, elems = _block(divisions, box, 0)
    tol = 1e-9 * float(np.linalg.norm(nodes.max(axis=0) - nodes.min(axis=0)))
    return Mesh(nodes, elems, (tag,) * len(elems), _boundary_sets(nodes, tol))


def build_two_region_mesh(fine_divisions, coarse_divisions, region_extents, split_axis) -> Mesh:
    """Two abutting structured blocks, fine and coarse, with duplicated interface nodes.

    Parameters
    ----------
    fine_divisions, coarse_divisions
        Element counts per axis of each block.
    region_extents
        ``(fine_box, coarse_box)``, each ``((x0, y0, z0), (x1, y1, z1))``.
    split_axis
        Axis normal to the shared face (``0, 1, 2`` or ``"x", "y", "z"``).
    """
    a = axis_index(split_axis)
    fine_box, coarse_box = region_extents
    _check_divisions(fine_divisions, "fine")
    _check_divisions(coarse_divisions, "coarse")
    _check_box(fine_box, "fine")
    _check_box(coarse_box, "coarse")
    flo, fhi = (np.asarray(b, dtype=float) for b in fine_box)
    clo, chi = (np.asarray(b, dtype=float) for b in coarse_box)
    scale = float(np.linalg.norm(np.maximum(fhi, chi) - np.minimum(flo, clo)))
    tol = 1e-9 * scale
    if not (abs(fhi[a] - clo[a]) <= tol or abs(chi[a] - flo[a]) <= tol):
        raise MeshError(f"region boxes do not abut along axis {a}")
    for t in range(3):
        if t == a:
            continue
        if abs(flo[t] - clo[t]) > tol or abs(fhi[t] - chi[t]) > tol:
            raise MeshError("region boxes must share one full face orthogonal to the split axis")
        fd, cd = int(fine_divisions[t]), int(coarse_divisions[t])
        if fd % cd:
            raise MeshError(
                f"non-integer refinement ratio {fd}/{cd} along axis {t}; "
                "fine divisions must be an integer multiple of coarse divisions"
            )
    fnodes, felems = _block(fine_divisions, fine_box, 0)
    cnodes, celems = _block(coarse_divisions, coarse_box, len(fnodes))
    nodes = np.vstack([fnodes, cnodes])
    elems = np.vstack([felems, celems])
    tags = ("fine",) * len(felems) + ("coarse",) * len(celems)
    sets = _boundary_sets(nodes, tol)
    plane = fhi[a] if abs(fhi[a] - clo[a]) <= tol else flo[a]
    on_plane = np.abs(nodes[:, a] - plane) <= tol
    nf = len(fnodes)
    sets["fine_interface"] = np.flatnonzero(on_plane[:nf])
    sets["coarse_interface"] = nf + np.flatnonzero(on_plane[nf:])
    return Mesh(nodes, elems, tags, sets)


def interface_plane(fine_box, coarse_box, split_axis) -> tuple[int, float]:
    """(axis, coordinate) of the face shared by two abutting region boxes."""
    a = axis_index(split_axis)
    fhi = float(fine_box[1][a])
    clo = float(coarse_box[0][a])
    return a, fhi if np.isclose(fhi, clo) else float(fine_box[0][a])


def hanging_nodes(mesh: Mesh) -> np.ndarray:
    """Fine interface nodes that coincide with no coarse node."""
    fine = mesh.node_sets.get("fine_interface", np.array([], dtype=np.int64))
    coarse = mesh.node_sets.get("coarse_interface", np.array([], dtype=np.int64))
    tol = mesh.tolerance
    out = []
    for n in fine:
        d = np.linalg.norm(mesh.nodes[coarse] - mesh.nodes[n], axis=1) if len(coarse) else np.array([np.inf])
        if d.min() > tol:
            out.append(int(n))
    return np.array(out, dtype=np.int64)


def merge_coincident_nodes(mesh: Mesh) -> Mesh:
    """Merge nodes closer than the mesh tolerance (conforming reference meshes)."""
    tol = mesh.tolerance
    keys = np.round(mesh.nodes / max(tol, 1e-300) / 10.0).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(first)
    remap_unique = np.empty_like(order)
    remap_unique[order] = np.arange(len(order))
    remap = remap_unique[inverse]
    new_nodes = mesh.nodes[first[order]]
    new_elems = remap[mesh.elements]
    sets = {k: remap[v] for k, v in mesh.node_sets.items() if not k.endswith("_interface")}
    tags = tuple("untagged" for _ in mesh.tags)
    return Mesh(new_nodes, new_elems, tags, sets)


@dataclass(frozen=True)
class InterfacePair:
    slave_elem: int
    slave_face: int
    master_elem: int
    master_face: int


@dataclass(frozen=True)
class InterfaceSpec:
    pairs: tuple
    axis: int = 2
    coordinate: float = 0.0

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def slave_elements(self) -> list[int]:
        return sorted({p.slave_elem for p in self.pairs})

    @property
    def master_elements(self) -> list[int]:
        return sorted({p.master_elem for p in self.pairs})


def _faces_on_plane(mesh: Mesh, tag: str, axis: int, coord: float, tol: float):
    out = []
    for e in range(mesh.n_elements):
        if mesh.tags[e] != tag:
            continue
        for f in range(6):
            P = mesh.face_coords(e, f)
            if np.all(np.abs(P[:, axis] - coord) <= tol):
                out.append((e, f, P))
    return out


def _inside_quad_2d(pt: np.ndarray, quad: np.ndarray, tol: float) -> bool:
    # quad vertices in cyclic order; accept either winding
    signs = []
    for i in range(4):
        a, b = quad[i], quad[(i + 1) % 4]
        cross = (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0])
        scale = np.linalg.norm(b - a)
        signs.append(cross / max(scale, 1e-300))
    signs = np.array(signs)
    return bool(np.all(signs >= -tol) or np.all(signs <= tol))


def detect_interface(mesh: Mesh, axis, coordinate: float) -> InterfaceSpec:
    """Pair fine-region faces on the plane ``x[axis] = coordinate`` with containing coarse faces.

    Pairs are ordered by (slave element, slave face).

    Raises
    ------
    InterfaceError
        No fine face on the plane, a fine face without a containing coarse
        face, or a pair violating the coplanarity/area invariants.
    """
    a = axis_index(axis)
    tol = mesh.tolerance
    slaves = _faces_on_plane(mesh, "fine", a, coordinate, tol)
    masters = _faces_on_plane(mesh, "coarse", a, coordinate, tol)
    if not slaves:
        raise InterfaceError(f"no interface found on plane axis={a} coordinate={coordinate}")
    tan = [t for t in range(3) if t != a]
    pairs = []
    orphans = []
    for se, sf, SP in slaves:
        centroid = SP.mean(axis=0)
        hit = None
        for me, mf, MP in masters:
            if _inside_quad_2d(centroid[tan], MP[:, tan], tol):
                hit = (me, mf, MP)
                break
        if hit is None:
            orphans.append((se, sf))
            continue
        me, mf, MP = hit
        plane = fit_plane(MP)
        dist = np.abs(plane.signed_distance(SP))
        if np.any(dist > tol):
            raise InterfaceError(
                f"slave face (elem {se}, face {sf}) is off the master plane by {dist.max():.3e}"
            )
        if quad_area(SP) > quad_area(MP) + tol**2:
            raise InterfaceError(
                f"slave face (elem {se}, face {sf}) is larger than its master face (elem {me}, face {mf})"
            )
        pairs.append(InterfacePair(se, sf, me, mf))
    if orphans:
        listing = ", ".join(f"(elem {e}, face {f})" for e, f in orphans)
        raise InterfaceError(f"orphan slave faces with no containing master face: {listing}")
    pairs.sort(key=lambda p: (p.slave_elem, p.slave_face))
    return InterfaceSpec(tuple(pairs), a, float(coordinate))


def read_mesh(path) -> Mesh:
    """Parse the line-oriented mesh text format."""
    lines = [ln.split() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln and not ln[0].startswith("#")]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise MeshError(f"{path}: unexpected end of file")
        ln = lines[pos]
        pos += 1
        return ln

    try:
        head = take()
        if head[0] != "nodes":
            raise MeshError(f"{path}: expected 'nodes <N>'")
        n = int(head[1])
        nodes = np.zeros((n, 3))
        for _ in range(n):
            ln = take()
            nodes[int(ln[0])] = [float(v) for v in ln[1:4]]
        head = take()
        if head[0] != "elements":
            raise MeshError(f"{path}: expected 'elements <E>'")
        ne = int(head[1])
        elems = np.zeros((ne, 8), dtype=np.int64)
        tags = [""] * ne
        for _ in range(ne):
            ln = take()
            e = int(ln[0])
            tags[e] = ln[1]
            elems[e] = [int(v) for v in ln[2:10]]
        sets = {}
        while pos < len(lines):
            head = take()
            if head[0] != "nodeset":
                raise MeshError(f"{path}: unexpected line {' '.join(head)!r}")
            name, count = head[1], int(head[2])
            sets[name] = [int(take()[0]) for _ in range(count)]
    except (IndexError, ValueError) as exc:
        raise MeshError(f"{path}: malformed mesh file ({exc})") from exc
    return Mesh(nodes, elems, tuple(tags), sets)


def write_mesh(mesh: Mesh, path) -> None:
    out = [f"nodes {mesh.n_nodes}"]
    out += [f"{i} {x!r} {y!r} {z!r}" for i, (x, y, z) in enumerate(mesh.nodes.tolist())]
    out.append(f"elements {mesh.n_elements}")
    for e, conn in enumerate(mesh.elements.tolist()):
        out.append(f"{e} {mesh.tags[e]} " + " ".join(str(n) for n in conn))
    for name, ids in mesh.node_sets.items():
        out.append(f"nodeset {name} {len(ids)}")
        out += [str(int(i)) for i in ids]
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
