"""Flat ``key = value`` run configuration.

Recognised keys (``fix`` and ``traction`` may repeat)::

    mesh = meshes/two_region.txt        # or the generator keys below
    interface_axis = z
    interface_coordinate = 1.0
    fine_divisions = 2 2 1
    coarse_divisions = 1 1 1
    fine_box = 0 0 0 1 1 1
    coarse_box = 0 0 1 1 1 2
    split_axis = z
    E = 1.0
    nu = 0.3
    alpha = 10
    epsilon = 25.0                      # absolute override of alpha * E / h_s
    mode = augmented                    # or penalty_only
    tol = 1e-12
    fix = zmin z                        # <selector> <components> [value]
    fix = @0,0,0 xy
    traction = zmax 0 0 1               # <selector> tx ty tz
    output_dir = out
    export = vtk, csv

A selector is a node-set name or ``@x,y,z`` (all nodes at that point).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, MeshError
from .mesh import Mesh, axis_index, build_two_region_mesh, interface_plane, read_mesh
from .projection import default_tol

REPEATABLE = {"fix", "traction"}
KNOWN = {
    "mesh", "interface_axis", "interface_coordinate", "fine_divisions", "coarse_divisions",
    "fine_box", "coarse_box", "split_axis", "E", "nu", "alpha", "epsilon", "mode", "tol",
    "fix", "traction", "output_dir", "export",
}
GENERATOR_KEYS = ("fine_divisions", "coarse_divisions", "fine_box", "coarse_box", "split_axis")


@dataclass
class RunConfig:
    mesh_path: Path | None = None
    generator: dict | None = None
    interface_axis: int | None = None
    interface_coordinate: float | None = None
    youngs_modulus: float = 1.0
    poisson_ratio: float = 0.3
    alpha: float = 10.0
    epsilon: float | None = None
    mode: str = "augmented"
    tol: float = field(default_factory=default_tol)
    fixes: list = field(default_factory=list)  # (selector, components, value)
    tractions: list = field(default_factory=list)  # (selector, 3-vector)
    output_dir: Path = Path("out")
    export: tuple = ()

    def build_mesh(self) -> Mesh:
        if self.mesh_path is not None:
            return read_mesh(self.mesh_path)
        g = self.generator
        return build_two_region_mesh(
            g["fine_divisions"], g["coarse_divisions"], (g["fine_box"], g["coarse_box"]), g["split_axis"]
        )

    def plane(self) -> tuple[int, float]:
        if self.interface_axis is not None and self.interface_coordinate is not None:
            return self.interface_axis, self.interface_coordinate
        if self.generator is None:
            raise ConfigError("interface_axis and interface_coordinate are required with a mesh file")
        g = self.generator
        return interface_plane(g["fine_box"], g["coarse_box"], g["split_axis"])

    def select(self, mesh: Mesh, selector: str) -> np.ndarray:
        if selector.startswith("@"):
            try:
                point = [float(v) for v in selector[1:].split(",")]
            except ValueError:
                raise ConfigError(f"bad point selector {selector!r}") from None
            if len(point) != 3:
                raise ConfigError(f"point selector needs 3 coordinates: {selector!r}")
            ids = mesh.nodes_near(point)
            if not len(ids):
                raise ConfigError(f"no node at {selector}")
            return ids
        if selector not in mesh.node_sets:
            raise ConfigError(f"node set {selector!r} does not exist (have: {', '.join(sorted(mesh.node_sets))})")
        return mesh.node_sets[selector]


def _floats(value: str, n: int, key: str) -> tuple:
    parts = value.replace(",", " ").split()
    try:
        out = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{key}: expected {n} numbers, got {value!r}") from None
    if len(out) != n:
        raise ConfigError(f"{key}: expected {n} numbers, got {len(out)}")
    return out


def _components(spec: str) -> tuple:
    comps = []
    for ch in spec.lower():
        if ch not in "xyz":
            raise ConfigError(f"bad component list {spec!r}")
        comps.append("xyz".index(ch))
    return tuple(comps)


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    base_dir = Path(base_dir or ".")
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in REPEATABLE:
            raw.setdefault(key, []).append(value)
        elif key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        else:
            raw[key] = value

    cfg = RunConfig()
    has_gen = any(k in raw for k in GENERATOR_KEYS)
    if ("mesh" in raw) == has_gen:
        raise ConfigError("exactly one mesh source required: 'mesh' or the generator keys")
    if "mesh" in raw:
        cfg.mesh_path = base_dir / raw["mesh"]
    else:
        missing = [k for k in GENERATOR_KEYS if k not in raw]
        if missing:
            raise ConfigError(f"generator keys missing: {', '.join(missing)}")
        fb = _floats(raw["fine_box"], 6, "fine_box")
        cb = _floats(raw["coarse_box"], 6, "coarse_box")
        try:
            cfg.generator = {
                "fine_divisions": tuple(int(v) for v in _floats(raw["fine_divisions"], 3, "fine_divisions")),
                "coarse_divisions": tuple(int(v) for v in _floats(raw["coarse_divisions"], 3, "coarse_divisions")),
                "fine_box": (fb[:3], fb[3:]),
                "coarse_box": (cb[:3], cb[3:]),
                "split_axis": axis_index(raw["split_axis"]),
            }
        except MeshError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        if "interface_axis" in raw:
            cfg.interface_axis = axis_index(raw["interface_axis"])
        if "interface_coordinate" in raw:
            cfg.interface_coordinate = float(raw["interface_coordinate"])
        if "E" in raw:
            cfg.youngs_modulus = float(raw["E"])
        if "nu" in raw:
            cfg.poisson_ratio = float(raw["nu"])
        if "alpha" in raw:
            cfg.alpha = float(raw["alpha"])
        if "epsilon" in raw:
            cfg.epsilon = float(raw["epsilon"])
        if "tol" in raw:
            cfg.tol = float(raw["tol"])
    except (ValueError, MeshError) as exc:
        raise ConfigError(str(exc)) from exc
    if "mode" in raw:
        if raw["mode"] not in ("augmented", "penalty_only"):
            raise ConfigError(f"mode must be augmented or penalty_only, got {raw['mode']!r}")
        cfg.mode = raw["mode"]
    for value in raw.get("fix", []):
        parts = value.split()
        if len(parts) not in (2, 3):
            raise ConfigError(f"fix: expected '<selector> <components> [value]', got {value!r}")
        val = float(parts[2]) if len(parts) == 3 else 0.0
        cfg.fixes.append((parts[0], _components(parts[1]), val))
    for value in raw.get("traction", []):
        parts = value.split(None, 1)
        if len(parts) != 2:
            raise ConfigError(f"traction: expected '<selector> tx ty tz', got {value!r}")
        cfg.tractions.append((parts[0], np.array(_floats(parts[1], 3, "traction"))))
    if "output_dir" in raw:
        cfg.output_dir = base_dir / raw["output_dir"]
    if "export" in raw:
        fmts = tuple(f.strip() for f in raw["export"].replace(",", " ").split())
        bad = [f for f in fmts if f not in ("vtk", "csv")]
        if bad:
            raise ConfigError(f"unknown export formats {bad}")
        cfg.export = fmts
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, path.parent)
