import numpy as np
import pytest

from hexbond.cli import main
from hexbond.export import parse_report
from hexbond.mesh import Mesh, build_block_mesh, build_two_region_mesh, write_mesh

PATCH_CONFIG = """\
# uniaxial tension on the 2x2 / 1x1 patch
fine_divisions = 2 2 1
coarse_divisions = 1 1 1
fine_box = 0 0 0 1 1 1
coarse_box = 0 0 1 1 1 2
split_axis = z
interface_axis = z
interface_coordinate = 1.0
E = 1.0
nu = 0.3
alpha = 10
mode = {mode}
fix = zmin z
fix = @0,0,0 xy
fix = @1,0,0 y
traction = zmax 0 0 1
output_dir = {out}
export = vtk, csv
"""


def write_config(tmp_path, mode="augmented", name="case"):
    path = tmp_path / f"{name}.cfg"
    path.write_text(PATCH_CONFIG.format(mode=mode, out=tmp_path / name))
    return path


def test_run_patch_config(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", str(cfg)]) == 0
    rep = parse_report((tmp_path / "case" / "report.txt").read_text())
    assert rep["status"] == "ok" and int(rep["n_pairs"]) == 4
    assert float(rep["relative_penetration"]) < 1e-12
    assert float(rep["max_stress"]) == pytest.approx(1.0, rel=1e-10)
    for name in ("mesh.txt", "displacement.txt", "solution.vtk", "solution.csv"):
        assert (tmp_path / "case" / name).exists()
    assert "n_pairs = 4" in capsys.readouterr().out


def test_run_penalty_only(tmp_path):
    assert main(["run", str(write_config(tmp_path, mode="penalty_only"))]) == 0
    rep = parse_report((tmp_path / "case" / "report.txt").read_text())
    assert rep["mode"] == "penalty_only"


def test_run_is_bit_identical(tmp_path):
    main(["run", str(write_config(tmp_path, name="a"))])
    main(["run", str(write_config(tmp_path, name="b"))])
    a = (tmp_path / "a" / "report.txt").read_bytes()
    b = (tmp_path / "b" / "report.txt").read_bytes()
    assert a == b
    assert (tmp_path / "a" / "displacement.txt").read_bytes() == (tmp_path / "b" / "displacement.txt").read_bytes()


def test_run_orphan_face_names_face(tmp_path, capsys):
    fine = build_block_mesh((2, 1, 1), ((0, 0, 0), (2, 1, 1)), "fine")
    coarse = build_block_mesh((1, 1, 1), ((0, 0, 1), (1, 1, 2)), "coarse")
    mesh = Mesh(
        np.vstack([fine.nodes, coarse.nodes]),
        np.vstack([fine.elements, coarse.elements + fine.n_nodes]),
        fine.tags + coarse.tags,
    )
    write_mesh(mesh, tmp_path / "orphan.txt")
    cfg = tmp_path / "orphan.cfg"
    cfg.write_text(
        f"mesh = orphan.txt\ninterface_axis = z\ninterface_coordinate = 1\nfix = @0,0,0 xyz\noutput_dir = {tmp_path / 'o'}\n"
    )
    assert main(["run", str(cfg)]) != 0
    err = capsys.readouterr().err
    assert "stage interface" in err and "(elem 1, face 5)" in err


def test_run_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("interface_axis = z\nfrobnicate = 3\n")
    assert main(["run", str(cfg)]) == 1
    assert "stage config" in capsys.readouterr().err


def test_env_tol_overrides_config(tmp_path, monkeypatch):
    cfg = write_config(tmp_path)
    cfg.write_text(cfg.read_text() + "tol = 1e-10\n")
    main(["run", str(cfg)])
    assert float(parse_report((tmp_path / "case" / "report.txt").read_text())["tol"]) == 1e-10
    monkeypatch.setenv("HEXBOND_TOL", "1e-9")
    main(["run", str(cfg)])
    assert float(parse_report((tmp_path / "case" / "report.txt").read_text())["tol"]) == 1e-9


def test_project_command(tmp_path, capsys):
    write_mesh(build_two_region_mesh((2, 2, 1), (1, 1, 1), (((0, 0, 0), (1, 1, 1)), ((0, 0, 1), (1, 1, 2))), "z"),
               tmp_path / "m.txt")
    assert main(["project", str(tmp_path / "m.txt"), "4", "0.25", "0.75", "1.0"]) == 0
    rep = parse_report(capsys.readouterr().out)
    assert float(rep["xi"]) == pytest.approx(-0.5, abs=1e-14)
    assert float(rep["eta"]) == pytest.approx(0.5, abs=1e-14)
    assert float(rep["mu"]) == pytest.approx(-1.0, abs=1e-14)
    assert rep["converged"] == "true" and int(rep["iterations"]) <= 2
    assert main(["project", str(tmp_path / "m.txt"), "9", "0", "0", "0"]) == 2
    assert "out of range" in capsys.readouterr().err


def test_project_non_convergence_prints_trace(tmp_path, capsys):
    rng = np.random.default_rng(3)
    nodes = build_block_mesh((1, 1, 1), ((0, 0, 0), (1, 1, 1))).nodes + 0.2 * rng.uniform(-1, 1, (8, 3))
    write_mesh(Mesh(nodes, [list(range(8))], ("untagged",)), tmp_path / "w.txt")
    assert main(["project", str(tmp_path / "w.txt"), "0", "0.9", "0.1", "0.95", "--max-iter", "1"]) == 1
    out = capsys.readouterr().out
    assert "converged = false" in out and "iterate 1:" in out


def test_export_round_trip(tmp_path):
    cfg = write_config(tmp_path)
    main(["run", str(cfg)])
    case = tmp_path / "case"
    assert main(["export", str(case), "--format", "vtk", "--output", str(tmp_path / "x.vtk")]) == 0
    text = (tmp_path / "x.vtk").read_text()
    assert text.startswith("# vtk DataFile Version")
    assert "CELL_TYPES 5" in text
    assert main(["export", str(case), "--format", "csv", "--output", str(tmp_path / "x.csv")]) == 0
    rows = (tmp_path / "x.csv").read_text().strip().splitlines()
    assert rows[0] == "node,x,y,z,ux,uy,uz" and len(rows) == 1 + 26


def test_export_zero_solution(tmp_path):
    mesh = build_block_mesh((1, 1, 1), ((0, 0, 0), (1, 1, 1)))
    case = tmp_path / "z"
    case.mkdir()
    write_mesh(mesh, case / "mesh.txt")
    from hexbond.export import write_displacements

    write_displacements(case / "displacement.txt", np.zeros(24))
    (case / "report.txt").write_text("E = 1.0\nnu = 0.3\n")
    assert main(["export", str(case), "--format", "vtk"]) == 0
    text = (case / "solution.vtk").read_text()
    stress_block = text.split("stress")[1].split("\n", 2)[1]
    assert all(float(v) == 0.0 for v in stress_block.split())


def test_patch_test_command(tmp_path, capsys):
    assert main(["patch-test", "--ratio", "2", "--alphas", "1,1000", "--plot-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("ratio,alpha,pairs")
    assert len(out.strip().splitlines()) == 3
    assert (tmp_path / "patch_ratio2.png").stat().st_size > 0


def test_patch_test_ratio_one_adds_consistency(capsys):
    main(["patch-test", "--ratio", "1", "--alphas", "10"])
    assert "conforming_relative_difference" in capsys.readouterr().out


def test_beam_command(tmp_path, capsys):
    out_file = tmp_path / "beam.csv"
    assert main(["beam", "--alphas", "10,100", "--out", str(out_file), "--plot-dir", str(tmp_path)]) == 0
    lines = out_file.read_text().strip().splitlines()
    assert lines[0] == "ratio,alpha,tip,reference_tip,relative_error,change_from_previous"
    assert len(lines) == 3
    assert float(lines[1].split(",")[4]) < 0.05
    assert (tmp_path / "beam_ratio2.png").exists()
    capsys.readouterr()


def test_bad_ratio(capsys):
    assert main(["patch-test", "--ratio", "0"]) == 2
