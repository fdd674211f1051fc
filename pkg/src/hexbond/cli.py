"""Command-line front end: ``hexbond run|patch-test|beam|project|export``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import cases
from .config import RunConfig, load_config
from .elasticity import Material
from .errors import HexbondError
from .export import (
    format_report,
    format_table,
    parse_report,
    read_displacements,
    write_csv,
    write_displacements,
    write_vtk,
)
from .mesh import detect_interface, read_mesh, write_mesh
from .projection import DEFAULT_MAX_ITER, default_tol, inverse_map_newton
from .solver import BoundaryConditions, apply_dirichlet, assemble_global, faces_in_node_set, recover_stresses, solve

log = logging.getLogger("hexbond")

PATCH_TOL = 1e-8


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"stage {stage}: {exc}")
        self.stage = stage


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (HexbondError, OSError, ValueError) as exc:
        raise StageError(name, exc) from exc


def _projection_tol(cfg_tol: float | None = None) -> float:
    if os.environ.get("HEXBOND_TOL", "").strip():
        return default_tol()
    return cfg_tol if cfg_tol is not None else default_tol()


def _boundary_conditions(cfg: RunConfig, mesh) -> BoundaryConditions:
    bcs = BoundaryConditions()
    for selector, comps, value in cfg.fixes:
        bcs.fix_nodes(cfg.select(mesh, selector), comps, value)
    for selector, t in cfg.tractions:
        faces = faces_in_node_set(mesh, cfg.select(mesh, selector))
        if not faces:
            raise HexbondError(f"traction selector {selector!r} covers no element face")
        bcs.load_faces(faces, t)
    return bcs


def cell_average_stress(stresses: np.ndarray) -> np.ndarray:
    return stresses.mean(axis=1)


def execute_run(cfg: RunConfig) -> dict:
    """Run the full pipeline for a parsed config and write artifacts.

    Returns the report entries. Raises StageError naming the failing stage.
    """
    tol = _projection_tol(cfg.tol)
    material = _stage("config", Material, cfg.youngs_modulus, cfg.poisson_ratio)
    mesh = _stage("mesh", cfg.build_mesh)
    _stage("mesh", mesh.check_orientation)
    axis, coord = _stage("interface", cfg.plane)
    interface = _stage("interface", detect_interface, mesh, axis, coord)
    bcs = _stage("boundary", _boundary_conditions, cfg, mesh)
    system = _stage(
        "assembly", assemble_global, mesh, material, interface, cfg.epsilon, cfg.mode, cfg.alpha, bcs.neumann, tol
    )
    system = _stage("boundary", apply_dirichlet, system, bcs)
    report = _stage("solve", solve, system)
    stresses = recover_stresses(mesh, material, report.U)
    eps = [pd.epsilon for pd in system.pair_data]
    entries = {
        "status": "ok",
        "mode": cfg.mode,
        "E": material.youngs_modulus,
        "nu": material.poisson_ratio,
        "alpha": cfg.alpha if cfg.epsilon is None else "override",
        "epsilon_min": min(eps),
        "epsilon_max": max(eps),
        "tol": tol,
        "n_nodes": mesh.n_nodes,
        "n_elements": mesh.n_elements,
        "interface_axis": "xyz"[interface.axis],
        "interface_coordinate": interface.coordinate,
        "slave_elements": len(interface.slave_elements),
        "master_elements": len(interface.master_elements),
        "newton_iterations_max": max(gp.iterations for pd in system.pair_data for gp in pd.points),
    }
    entries.update(report.as_dict())
    entries["max_stress"] = float(np.abs(stresses).max())
    for i, w in enumerate(report.warnings):
        entries[f"warning_{i}"] = w
    out = cfg.output_dir
    _stage("export", out.mkdir, parents=True, exist_ok=True)
    _stage("export", write_mesh, mesh, out / "mesh.txt")
    _stage("export", write_displacements, out / "displacement.txt", report.U)
    if "vtk" in cfg.export:
        _stage("export", write_vtk, out / "solution.vtk", mesh, report.U, cell_average_stress(stresses))
    if "csv" in cfg.export:
        _stage("export", write_csv, out / "solution.csv", mesh, report.U)
    _stage("export", (out / "report.txt").write_text, format_report(entries), encoding="utf-8")
    return entries


def cmd_run(args) -> int:
    try:
        cfg = _stage("config", load_config, args.config)
        entries = execute_run(cfg)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(format_report(entries))
    return 0 if entries.get("errors", 0) == 0 else 1


def _parse_alphas(text: str) -> list[float]:
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None


def patch_sweep(ratio: int, alphas) -> list[dict]:
    rows = []
    for a in alphas:
        r = cases.patch_test(ratio=ratio, alpha=a)
        rows.append(
            {
                "ratio": ratio,
                "alpha": a,
                "pairs": r.report.n_pairs,
                "stress_deviation": r.stress_deviation,
                "max_penetration": r.report.max_penetration,
                "relative_penetration": r.relative_penetration,
                "pass": r.stress_deviation <= PATCH_TOL and r.relative_penetration <= PATCH_TOL,
            }
        )
    return rows


def beam_sweep(ratio: int, alphas) -> tuple[list[dict], float]:
    ref = cases.conforming_beam(ratio).tip
    rows = []
    prev = None
    for a in alphas:
        tip = cases.split_beam(ratio, alpha=a).tip
        rows.append(
            {
                "ratio": ratio,
                "alpha": a,
                "tip": tip,
                "reference_tip": ref,
                "relative_error": abs(tip - ref) / abs(ref),
                "change_from_previous": abs(tip - prev) / abs(prev) if prev is not None else 0.0,
            }
        )
        prev = tip
    return rows, ref


def _emit(rows, keys, args, extra: str = "") -> None:
    text = format_table(keys, [[r[k] for k in keys] for r in rows]) + extra
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")


def cmd_patch_test(args) -> int:
    if args.ratio < 1:
        print("error: ratio must be >= 1", file=sys.stderr)
        return 2
    try:
        rows = patch_sweep(args.ratio, args.alphas)
        extra = ""
        if args.ratio == 1:
            cons = [(a, cases.conforming_consistency(alpha=a)[2]) for a in args.alphas]
            extra = "\n" + format_table(["alpha", "conforming_relative_difference"], cons)
    except HexbondError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    keys = ["ratio", "alpha", "pairs", "stress_deviation", "max_penetration", "relative_penetration", "pass"]
    _emit(rows, keys, args, extra)
    if args.plot_dir:
        from .plotting import plot_patch_sweep

        plot_patch_sweep(rows, Path(args.plot_dir) / f"patch_ratio{args.ratio}.png", PATCH_TOL)
    return 0 if all(r["pass"] for r in rows) else 1


def cmd_beam(args) -> int:
    try:
        rows, ref = beam_sweep(args.ratio, args.alphas)
    except (HexbondError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    keys = ["ratio", "alpha", "tip", "reference_tip", "relative_error", "change_from_previous"]
    _emit(rows, keys, args)
    if args.plot_dir:
        from .plotting import plot_beam_sweep

        plot_beam_sweep(rows, ref, Path(args.plot_dir) / f"beam_ratio{args.ratio}.png")
    return 0


def cmd_project(args) -> int:
    try:
        mesh = read_mesh(args.mesh)
    except (HexbondError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not 0 <= args.elem < mesh.n_elements:
        print(f"error: element {args.elem} out of range (mesh has {mesh.n_elements})", file=sys.stderr)
        return 2
    try:
        res = inverse_map_newton(mesh.element_coords(args.elem), args.point, tol=_projection_tol(), max_iter=args.max_iter)
    except HexbondError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    xi, eta, mu = res.ref_coords
    sys.stdout.write(
        format_report(
            {
                "xi": float(xi),
                "eta": float(eta),
                "mu": float(mu),
                "iterations": res.iterations,
                "converged": res.converged,
                "inside": res.inside,
                "residual": res.residual,
            }
        )
    )
    if not res.converged:
        for k, r in enumerate(res.trace):
            print(f"iterate {k}: {' '.join(repr(float(v)) for v in r)}")
        return 1
    return 0


def cmd_export(args) -> int:
    case = Path(args.case_dir)
    try:
        mesh = read_mesh(case / "mesh.txt")
        U = read_displacements(case / "displacement.txt", mesh.n_nodes)
        rep = parse_report((case / "report.txt").read_text(encoding="utf-8"))
        material = Material(float(rep.get("E", 1.0)), float(rep.get("nu", 0.3)))
        if args.format == "vtk":
            stresses = recover_stresses(mesh, material, U)
            target = Path(args.output or case / "solution.vtk")
            write_vtk(target, mesh, U, cell_average_stress(stresses))
        else:
            target = Path(args.output or case / "solution.csv")
            write_csv(target, mesh, U)
    except (HexbondError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {target}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hexbond", description="Hexahedral FE solver with a non-conforming interface.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a case from a key-value config file")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)

    pt = sub.add_parser("patch-test", help="uniaxial-tension patch test over a penalty sweep")
    pt.add_argument("--ratio", type=int, default=2)
    pt.add_argument("--alphas", type=_parse_alphas, default=list(cases.ALPHAS))
    pt.add_argument("--out", help="also write the table to this file")
    pt.add_argument("--plot-dir", help="write a sweep figure into this directory")
    pt.set_defaults(func=cmd_patch_test)

    b = sub.add_parser("beam", help="non-conforming cantilever against a conforming fine reference")
    b.add_argument("--ratio", type=int, default=2)
    b.add_argument("--alphas", type=_parse_alphas, default=list(cases.ALPHAS))
    b.add_argument("--out")
    b.add_argument("--plot-dir")
    b.set_defaults(func=cmd_beam)

    pr = sub.add_parser("project", help="inverse-map one physical point into an element")
    pr.add_argument("mesh")
    pr.add_argument("elem", type=int)
    pr.add_argument("point", type=float, nargs=3, metavar=("X", "Y", "Z"))
    pr.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    pr.set_defaults(func=cmd_project)

    ex = sub.add_parser("export", help="export a run directory to VTK or CSV")
    ex.add_argument("case_dir")
    ex.add_argument("--format", choices=("vtk", "csv"), required=True)
    ex.add_argument("--output")
    ex.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
