import numpy as np
import pytest

from hexbond.mesh import Mesh

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


UNIT_CUBE = np.array(
    [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]], dtype=float
)


def random_hex(rng, perturb=0.15, affine=True):
    """Unit cube under a random well-conditioned affine map plus corner jitter."""
    X = UNIT_CUBE.copy()
    if affine:
        A = np.eye(3) + 0.3 * rng.uniform(-1, 1, (3, 3))
        X = X @ A.T + rng.uniform(-2, 2, 3)
    return X + perturb * rng.uniform(-1, 1, X.shape)


def random_parallelepiped(rng):
    A = np.eye(3) + 0.4 * rng.uniform(-1, 1, (3, 3))
    if np.linalg.det(A) < 0.2:
        A = np.eye(3)
    return UNIT_CUBE @ A.T + rng.uniform(-1, 1, 3)


def transformed(mesh: Mesh, A, b=None) -> Mesh:
    b = np.zeros(3) if b is None else b
    return Mesh(mesh.nodes @ np.asarray(A).T + b, mesh.elements, mesh.tags, dict(mesh.node_sets))


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)
