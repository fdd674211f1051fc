import matplotlib.image as mpimg

from hexbond.plotting import plot_beam_sweep, plot_patch_sweep


def test_patch_figure(tmp_path):
    rows = [
        {"alpha": 1.0, "stress_deviation": 3e-13, "relative_penetration": 0.0},
        {"alpha": 10.0, "stress_deviation": 1e-14, "relative_penetration": 2e-16},
    ]
    path = plot_patch_sweep(rows, tmp_path / "sub" / "patch.png")
    img = mpimg.imread(path)
    assert img.ndim == 3 and img.shape[0] > 100


def test_beam_figure(tmp_path):
    rows = [{"alpha": a, "tip": -t} for a, t in ((1, 0.98), (10, 0.985), (100, 0.985))]
    path = plot_beam_sweep(rows, -1.0, tmp_path / "beam.png")
    assert path.exists() and path.stat().st_size > 1000
