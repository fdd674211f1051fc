"""Field export (VTK legacy ASCII, CSV) and key-value report text."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .mesh import Mesh

VTK_HEXAHEDRON = 12
VOIGT_LABELS = ("s11", "s22", "s33", "s12", "s23", "s13")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_report(entries: dict) -> str:
    """``key = value`` lines in insertion order, floats at full precision."""
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in entries.items())


def parse_report(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if "=" not in line or line.lstrip().startswith("#"):
            continue
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def write_vtk(path, mesh: Mesh, U, cell_stress, title: str = "hexbond solution") -> None:
    """ASCII legacy unstructured grid with point displacements and cell stresses."""
    U = np.asarray(U, dtype=float).reshape(-1, 3)
    S = np.asarray(cell_stress, dtype=float).reshape(-1, 6)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.n_nodes} double")
    lines += [" ".join(repr(float(c)) for c in x) for x in mesh.nodes]
    lines.append(f"CELLS {mesh.n_elements} {9 * mesh.n_elements}")
    lines += ["8 " + " ".join(str(int(n)) for n in conn) for conn in mesh.elements]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += [str(VTK_HEXAHEDRON)] * mesh.n_elements
    lines.append(f"POINT_DATA {mesh.n_nodes}")
    lines.append("VECTORS displacement double")
    lines += [" ".join(repr(float(c)) for c in u) for u in U]
    lines.append(f"CELL_DATA {mesh.n_elements}")
    lines.append("FIELD FieldData 1")
    lines.append(f"stress 6 {mesh.n_elements} double")
    lines += [" ".join(repr(float(c)) for c in s) for s in S]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_csv(path, mesh: Mesh, U) -> None:
    U = np.asarray(U, dtype=float).reshape(-1, 3)
    rows = ["node,x,y,z,ux,uy,uz"]
    for i, (x, u) in enumerate(zip(mesh.nodes, U)):
        rows.append(",".join([str(i)] + [repr(float(c)) for c in (*x, *u)]))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_displacements(path, U) -> None:
    U = np.asarray(U, dtype=float).reshape(-1, 3)
    lines = [f"{i} {u[0]!r} {u[1]!r} {u[2]!r}" for i, u in enumerate(U.tolist())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_displacements(path, n_nodes: int) -> np.ndarray:
    U = np.zeros((n_nodes, 3))
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        parts = line.split()
        if parts:
            U[int(parts[0])] = [float(v) for v in parts[1:4]]
    return U.ravel()


def format_table(header, rows, sep: str = ",") -> str:
    out = [sep.join(header)]
    out += [sep.join(_fmt(v) for v in row) for row in rows]
    return "\n".join(out) + "\n"
