"""
Tests for the SE(3) helpers: exponential, logarithm, adjoints and spatial inertia.
"""

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.transform import Rotation

from scandyn.se3_core import (
    RigidTransform,
    SpatialInertia,
    TwistVector,
    WrenchVector,
    ad_matrix,
    ad_small,
    ad_transpose_apply,
    adjoint,
    apply_coadjoint,
    coadjoint_apply,
    exp_twist,
    log_transform,
    pairing,
    skew,
    unskew,
)

finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
vectors3 = arrays(np.float64, (3,), elements=finite)
vectors6 = arrays(np.float64, (6,), elements=finite)


def random_transform(rng: np.random.Generator) -> RigidTransform:
    return RigidTransform(Rotation.random(random_state=rng).as_matrix(), rng.uniform(-1.0, 1.0, 3))


def unit_revolute(axis, point) -> TwistVector:
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    return TwistVector(-np.cross(axis, point), axis)


@seed(1)
@given(w=vectors3, v=vectors3)
def test_skew_matches_cross_product(w, v):
    assert np.allclose(skew(w) @ v, np.cross(w, v), atol=1e-12)
    assert np.array_equal(unskew(skew(w)), w)


def test_exp_of_zero_twist_is_identity():
    for theta in (0.0, 1.0, -3.0):
        assert exp_twist(TwistVector.zero(), theta).allclose(RigidTransform.identity())


def test_prismatic_exp_is_pure_translation():
    g = exp_twist(TwistVector([0.0, 1.0, 0.0], np.zeros(3)), 0.4)
    assert np.allclose(g.rotation, np.eye(3))
    assert np.allclose(g.translation, [0.0, 0.4, 0.0])


def test_revolute_exp_rotates_about_offset_axis():
    point = np.array([1.0, 0.0, 0.0])
    g = exp_twist(unit_revolute([0.0, 0.0, 1.0], point), np.pi / 2)
    # points on the axis stay fixed
    assert np.allclose(g.act(point), point, atol=1e-12)
    assert np.allclose(g.act([2.0, 0.0, 0.0]), [1.0, 1.0, 0.0], atol=1e-12)


def test_exp_uses_series_near_zero_angle():
    xi = unit_revolute([0.3, -0.2, 0.9], [0.1, 0.2, 0.3])
    tiny = exp_twist(xi, 1e-9)
    assert tiny.is_valid()
    assert np.allclose(tiny.translation, 1e-9 * xi.linear, atol=1e-15)


@seed(2)
@settings(max_examples=60)
@given(axis=vectors3.filter(lambda a: np.linalg.norm(a) > 0.1), point=vectors3,
       theta=st.floats(min_value=0.05, max_value=3.0))
def test_log_inverts_exp(axis, point, theta):
    g = exp_twist(unit_revolute(axis, point), theta)
    xi, angle = log_transform(g)
    assert exp_twist(xi, angle).allclose(g, atol=1e-9)


def test_adjoint_is_a_homomorphism(rng):
    g, h = random_transform(rng), random_transform(rng)
    assert np.allclose(adjoint(g @ h), adjoint(g) @ adjoint(h), atol=1e-12)
    assert np.allclose(adjoint(g.inverse()), np.linalg.inv(adjoint(g)), atol=1e-12)


def test_coadjoint_preserves_power(rng):
    g = random_transform(rng)
    F = WrenchVector.from_array(rng.standard_normal(6))
    V = rng.standard_normal(6)
    moved = coadjoint_apply(g, F)
    assert isinstance(moved, WrenchVector)
    assert pairing(moved, V) == pytest.approx(pairing(F, adjoint(g) @ V), abs=1e-12)
    assert np.allclose(apply_coadjoint(g.rotation, g.translation, F.as_array()), adjoint(g).T @ F.as_array())


@seed(3)
@given(xi=vectors6, wrench=vectors6)
def test_ad_transpose_matches_matrix(xi, wrench):
    assert np.allclose(ad_transpose_apply(xi, wrench), ad_matrix(xi).T @ wrench, atol=1e-12)


def test_ad_small_is_the_lie_bracket(rng):
    xi, eta = rng.standard_normal(6), rng.standard_normal(6)
    bracket = ad_small(xi) @ eta
    assert np.allclose(bracket, -ad_small(eta) @ xi, atol=1e-12)
    assert np.allclose(bracket[3:], np.cross(xi[3:], eta[3:]))


def test_wrench_array_order_is_force_then_moment():
    F = WrenchVector(moment=[1.0, 2.0, 3.0], force=[4.0, 5.0, 6.0])
    assert np.array_equal(F.as_array(), [4.0, 5.0, 6.0, 1.0, 2.0, 3.0])


def test_spatial_inertia_is_symmetric_positive_definite():
    J = SpatialInertia.from_mass_properties(3.0, [0.1, -0.2, 0.05], np.diag([0.2, 0.3, 0.4]))
    assert np.allclose(J.matrix, J.matrix.T)
    assert np.min(J.eigenvalues()) > 0.0
    V = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 2.0])
    com_speed_sq = np.sum(np.cross(V[3:], J.com) ** 2)
    assert J.kinetic_energy(V) == pytest.approx(0.5 * (3.0 * com_speed_sq + 0.4 * 4.0))


def test_spatial_inertia_matrix_is_read_only():
    J = SpatialInertia.point_mass(1.0, [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        J.matrix[0, 0] = 5.0


def test_non_orthonormal_transform_is_invalid():
    g = RigidTransform(np.diag([1.0, 1.0, 1.1]), np.zeros(3))
    assert not g.is_valid()
    assert g.orthonormality_error() > 0.05


def test_exp_about_z_quarter_turn_is_exact():
    g = exp_twist(unit_revolute([0.0, 0.0, 1.0], np.zeros(3)), np.pi / 2)
    expected = np.array([
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    assert np.allclose(g.as_matrix(), expected, rtol=0.0, atol=1e-12)


@seed(4)
@settings(max_examples=60)
@given(axis=vectors3.filter(lambda a: np.linalg.norm(a) > 0.1), point=vectors3,
       prismatic=st.booleans(), t1=finite, t2=finite)
def test_exp_of_summed_angles_composes(axis, point, prismatic, t1, t2):
    if prismatic:
        xi = TwistVector(axis / np.linalg.norm(axis), np.zeros(3))
    else:
        xi = unit_revolute(axis, point)
    combined = exp_twist(xi, t1) @ exp_twist(xi, t2)
    assert combined.allclose(exp_twist(xi, t1 + t2), atol=1e-10)


def test_homogeneous_matrix_product_matches_compose(rng):
    for _ in range(20):
        a, b = random_transform(rng), random_transform(rng)
        product = RigidTransform.from_matrix(a.as_matrix() @ b.as_matrix())
        assert product.allclose(a @ b, atol=1e-12)


def test_compose_with_inverse_is_identity(rng):
    for _ in range(100):
        a = random_transform(rng)
        assert (a @ a.inverse()).allclose(RigidTransform.identity(), atol=1e-12)
        assert (a.inverse() @ a).allclose(RigidTransform.identity(), atol=1e-12)


def test_adjoint_homomorphism_over_random_pairs(rng):
    for _ in range(100):
        g, h = random_transform(rng), random_transform(rng)
        assert np.allclose(adjoint(g @ h), adjoint(g) @ adjoint(h), rtol=0.0, atol=1e-12)


def test_small_adjoint_satisfies_jacobi_identity(rng):
    for _ in range(20):
        x, y, z = rng.standard_normal((3, 6))
        residual = (ad_small(x) @ ad_small(y) @ z
                    + ad_small(y) @ ad_small(z) @ x
                    + ad_small(z) @ ad_small(x) @ y)
        assert np.max(np.abs(residual)) <= 1e-12
        assert np.allclose(ad_small(x) @ x, np.zeros(6), rtol=0.0, atol=1e-12)


def test_kinetic_energy_is_positive_for_random_twists(rng):
    rot = Rotation.random(random_state=rng).as_matrix()
    J = SpatialInertia.from_mass_properties(1.7, rng.uniform(-0.2, 0.2, 3), rot @ np.diag([0.2, 0.25, 0.3]) @ rot.T)
    for V in rng.standard_normal((1000, 6)):
        assert V @ J.matrix @ V > 0.0
        assert J.kinetic_energy(V) > 0.0
