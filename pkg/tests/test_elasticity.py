import numpy as np
import pytest

from conftest import UNIT_CUBE, random_hex, random_parallelepiped
from hexbond.elasticity import (
    CORNER_SIGNS,
    Material,
    b_matrix,
    d_matrix,
    element_stiffness,
    jacobian,
    map_point,
    rigid_body_modes,
    shape_eval,
)
from hexbond.errors import MaterialError, SingularMapError


def oracle_stiffness(X, E, nu, order=5):
    """Stiffness from the tensor form sum grad(phi_a) : C : grad(phi_b), Gauss order^3.

    Independent of the Voigt/B-matrix path: shape gradients come from the
    1D factors and the elasticity tensor is built index by index.
    """
    lam = E * nu / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    d = np.eye(3)
    C = (
        lam * np.einsum("ij,kl->ijkl", d, d)
        + mu * (np.einsum("ik,jl->ijkl", d, d) + np.einsum("il,jk->ijkl", d, d))
    )
    pts, wts = np.polynomial.legendre.leggauss(order)
    corners = [(-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1), (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1)]
    K = np.zeros((24, 24))
    for a, wa in zip(pts, wts):
        for b, wb in zip(pts, wts):
            for c, wc in zip(pts, wts):
                G = np.zeros((8, 3))
                for k, (sx, sy, sz) in enumerate(corners):
                    fx, fy, fz = (1 + sx * a) / 2, (1 + sy * b) / 2, (1 + sz * c) / 2
                    G[k] = [sx / 2 * fy * fz, fx * sy / 2 * fz, fx * fy * sz / 2]
                J = X.T @ G  # dx_i / dr_j
                dN = G @ np.linalg.inv(J)  # (8, 3) physical gradients
                w = wa * wb * wc * np.linalg.det(J)
                for p in range(8):
                    for q in range(8):
                        blk = np.einsum("j,ijkl,l->ik", dN[p], C, dN[q])
                        K[3 * p:3 * p + 3, 3 * q:3 * q + 3] += blk * w
    return K


def test_shape_center_and_corner():
    se = shape_eval([0, 0, 0])
    assert np.allclose(se.values, 1 / 8)
    assert np.allclose(np.abs(se.gradients), 1 / 8)
    se = shape_eval([1, 1, 1])
    expect = np.zeros(8)
    expect[6] = 1.0
    assert np.array_equal(se.values, expect)


def test_partition_of_unity_random(rng):
    for r in rng.uniform(-1, 1, (1000, 3)):
        se = shape_eval(r)
        assert abs(se.values.sum() - 1.0) < 1e-14
        assert np.all(np.abs(se.gradients.sum(axis=0)) < 1e-14)


def test_interpolation_at_corners():
    for k, r in enumerate(CORNER_SIGNS):
        assert np.allclose(shape_eval(r).values, np.eye(8)[k], atol=0)


def test_gradients_match_finite_differences(rng):
    r = rng.uniform(-1, 1, 3)
    h = 1e-6
    fd = np.column_stack([(shape_eval(r + h * e).values - shape_eval(r - h * e).values) / (2 * h) for e in np.eye(3)])
    assert np.allclose(shape_eval(r).gradients, fd, atol=1e-9)


@pytest.mark.parametrize("h", [0.5, 1.0, 3.0])
def test_jacobian_cube(h):
    J, det = jacobian(h * UNIT_CUBE, [0.2, -0.4, 0.7])
    assert np.allclose(J, h / 2 * np.eye(3), atol=1e-15)
    assert det == pytest.approx(h**3 / 8, rel=1e-14)


def test_jacobian_reference_hex():
    J, det = jacobian(CORNER_SIGNS, [0.1, 0.2, 0.3])
    assert np.allclose(J, np.eye(3), atol=1e-15)
    assert det == pytest.approx(1.0)


def test_jacobian_sheared_parallelepiped():
    # edge vectors a, b, c from corner 0
    a, b, c = np.array([2.0, 0, 0]), np.array([0.5, 1.0, 0]), np.array([0.3, 0.2, 1.5])
    X = np.array([i * a + j * b + k * c for i, j, k in (UNIT_CUBE.astype(int))])
    for r in ([0, 0, 0], [0.9, -0.3, 0.1]):
        J, _ = jacobian(X, r)
        assert np.allclose(J, 0.5 * np.vstack([a, b, c]), atol=1e-14)


def test_jacobian_singular():
    X = UNIT_CUBE.copy()
    X[:, 2] = 0.0
    with pytest.raises(SingularMapError):
        jacobian(X, [0, 0, 0])


def test_b_matrix_reference_gradients():
    X = 2.0 * UNIT_CUBE
    B = b_matrix(X, [0, 0, 0])
    G = shape_eval([0, 0, 0]).gradients
    assert np.allclose(B[0, 0::3], G[:, 0])
    assert np.allclose(B[3, 0::3], G[:, 1])
    assert np.allclose(B[3, 1::3], G[:, 0])
    assert np.allclose(B[4, 1::3], G[:, 2])
    assert np.allclose(B[5, 2::3], G[:, 0])
    assert np.all(B[0, 1::3] == 0) and np.all(B[0, 2::3] == 0)


def test_b_matrix_rigid_translation(rng):
    X = random_hex(rng)
    u = np.tile(rng.normal(size=3), 8)
    for r in rng.uniform(-1, 1, (5, 3)):
        assert np.allclose(b_matrix(X, r) @ u, 0, atol=1e-13)


def test_b_matrix_uniaxial_field():
    X = UNIT_CUBE * 1.7
    u = np.column_stack([X[:, 0], np.zeros(8), np.zeros(8)]).ravel()
    for r in ([0, 0, 0], [0.5, -0.5, 0.9]):
        assert np.allclose(b_matrix(X, r) @ u, [1, 0, 0, 0, 0, 0], atol=1e-14)


def test_b_matrix_reproduces_linear_fields(rng):
    for _ in range(20):
        X = random_hex(rng)
        Gd = rng.normal(size=(3, 3))
        u = (X @ Gd.T + rng.normal(size=3)).ravel()
        strain = [Gd[0, 0], Gd[1, 1], Gd[2, 2], Gd[0, 1] + Gd[1, 0], Gd[1, 2] + Gd[2, 1], Gd[0, 2] + Gd[2, 0]]
        for r in rng.uniform(-1, 1, (4, 3)):
            assert np.allclose(b_matrix(X, r) @ u, strain, atol=1e-12)


def test_d_matrix_nu_zero():
    assert np.allclose(d_matrix(Material(1.0, 0.0)), np.diag([1, 1, 1, 0.5, 0.5, 0.5]))


def test_d_matrix_quarter():
    m = Material(1.0, 0.25)
    assert m.lame_lambda == pytest.approx(0.4)
    assert m.shear_modulus == pytest.approx(0.4)
    D = d_matrix(m)
    assert D[0, 0] == pytest.approx(1.2)
    assert D[0, 1] == pytest.approx(0.4)
    assert D[5, 5] == pytest.approx(0.4)


@pytest.mark.parametrize("nu", [-0.9, -0.2, 0.0, 0.3, 0.49])
def test_d_matrix_spd(nu):
    D = d_matrix(Material(3.0, nu))
    assert np.allclose(D, D.T)
    assert np.linalg.eigvalsh(D).min() > 0


def test_material_rejects_bad_values():
    with pytest.raises(MaterialError, match="incompressible"):
        Material(1.0, 0.5)
    with pytest.raises(MaterialError):
        Material(-1.0, 0.3)
    with pytest.raises(MaterialError):
        Material(1.0, -1.0)


def test_element_stiffness_oracle_parallelepiped(rng):
    for X in (UNIT_CUBE, random_parallelepiped(rng)):
        K = element_stiffness(X, Material(1.0, 0.3))
        K_ref = oracle_stiffness(X, 1.0, 0.3)
        assert np.abs(K - K_ref).max() <= 1e-12 * np.abs(K_ref).max()


def test_element_stiffness_rigid_modes(rng):
    for _ in range(5):
        X = random_hex(rng)
        K = element_stiffness(X, Material(rng.uniform(0.5, 5), rng.uniform(-0.3, 0.45)))
        assert np.abs(K - K.T).max() <= 1e-14 * np.abs(K).max()
        ev = np.linalg.eigvalsh(K)
        assert np.sum(np.abs(ev) < 1e-10 * ev.max()) == 6
        R = rigid_body_modes(X)
        assert np.abs(K @ R).max() <= 1e-10 * np.abs(K).max() * np.abs(R).max()


def test_element_stiffness_scales_with_length(rng):
    X = random_hex(rng)
    m = Material(2.0, 0.3)
    K1 = element_stiffness(X, m)
    K2 = element_stiffness(3.0 * X, m)
    assert np.allclose(K2, 3.0 * K1, rtol=1e-12, atol=1e-12 * np.abs(K1).max())


def test_map_point_corners(rng):
    X = random_hex(rng)
    for k, r in enumerate(CORNER_SIGNS):
        assert np.allclose(map_point(X, r), X[k])
