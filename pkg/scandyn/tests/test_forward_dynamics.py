"""
Tests for forward dynamics: JSIIA, ABIA (split and merged), the serial ABIA and batches.
"""

import logging

import numpy as np
import pytest

from conftest import PENDULUM_LENGTH, PENDULUM_MASS
from scandyn.exceptions import DimensionMismatchError, SingularInertiaError
from scandyn.forward_dynamics import (
    FD_ALGORITHMS,
    MERGED_SPARSITY,
    JointSpaceInertia,
    _assemble_jsi,
    _merged_operands,
    _propagation_terms,
    abi_recursion,
    abia_intermediates,
    bias_torque,
    fd_batch,
    forward_dynamics,
    integrate_step,
    jsi_columns,
)
from scandyn.inverse_dynamics import DynamicsResult, GroupFailure, id_recursive, relative_error, scan_motion
from scandyn.robot_model import (
    ChainModel,
    DynamicsInput,
    LinkSpec,
    link_transforms,
    random_chain,
    random_input,
    spawn_generators,
)
from scandyn.scan_engine import ScanPlan, ScanStats
from scandyn.se3_core import SpatialInertia


def round_trip_input(model, seed):
    state = random_input(model, spawn_generators(seed, 1)[0])
    return state.replace(applied_torques=id_recursive(model, state).tau)


@pytest.mark.parametrize("algo", FD_ALGORITHMS)
@pytest.mark.parametrize("torque", [0.0, 0.5])
def test_pendulum_acceleration(pendulum, algo, torque):
    g, q, qd = 9.81, 0.3, 1.2
    state = DynamicsInput([q], [qd], [0.0], np.zeros(6), np.zeros(6), np.zeros(6), [torque])
    state = state.with_gravity([0.0, -g, 0.0])
    qdd = forward_dynamics(pendulum, state, algo, ScanPlan.parallel(2)).qdd
    inertia = PENDULUM_MASS * PENDULUM_LENGTH ** 2
    expected = (torque - PENDULUM_MASS * g * PENDULUM_LENGTH * np.cos(q)) / inertia
    assert qdd[0] == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("algo", FD_ALGORITHMS)
def test_forward_inverts_inverse_dynamics(chain, algo):
    state = round_trip_input(chain, chain.n + 100)
    qdd = forward_dynamics(chain, state, algo, ScanPlan.parallel(2)).qdd
    assert relative_error(qdd, state.qdd) <= 1e-6


def test_algorithms_agree(chain):
    state = random_input(chain, spawn_generators(chain.n, 1)[0])
    reference = forward_dynamics(chain, state, 'jsiia').qdd
    for algo in ('abia', 'abia_merged', 'abia_recursive'):
        assert relative_error(forward_dynamics(chain, state, algo).qdd, reference) <= 1e-6


def test_merged_matches_split_abia(chain):
    state = random_input(chain, spawn_generators(7, 1)[0])
    split = abia_intermediates(chain, state, ScanPlan.parallel(1))
    merged = abia_intermediates(chain, state, ScanPlan.parallel(1), merged=True)
    assert relative_error(merged.qdd, split.qdd) <= 1e-9
    assert relative_error(merged.zhat, split.zhat) <= 1e-9
    assert relative_error(merged.tau_diff, split.tau_diff) <= 1e-9


def test_intermediates_follow_the_recursions():
    model = random_chain(9, seed=31)
    state = random_input(model, spawn_generators(31, 1)[0])
    out = abia_intermediates(model, state, ScanPlan.parallel(2))
    n, S = model.n, model.joint_twists
    assert np.array_equal(out.zhat[n], np.zeros(6))
    assert np.array_equal(out.lam[0], np.zeros(6))
    for i in range(n):
        assert np.allclose(out.zhat[i], out.Pi[i] * out.tau_diff[i] + out.Y[i] @ out.zhat[i + 1], atol=1e-9)
        assert out.chat[i] == pytest.approx((out.tau_diff[i] - S[i] @ out.zhat[i + 1]) / out.Omega[i], abs=1e-9)
        assert out.qdd[i] == pytest.approx(out.chat[i] - out.Pi[i] @ out.lam[i], abs=1e-9)
        assert np.allclose(out.lam[i + 1], out.Y[i].T @ out.lam[i] + S[i] * out.chat[i], atol=1e-9)


def test_articulated_inertias_are_positive_and_bounded():
    model = random_chain(12, seed=41)
    q = np.linspace(-1.0, 1.0, 12)
    abi = abi_recursion(model, q)
    assert len(abi) == 12
    for k in range(12):
        assert np.allclose(abi.Jhat[k], abi.Jhat[k].T)
        assert np.min(np.linalg.eigvalsh(abi.Jhat[k])) > 0.0
        # J^_i - J_i is the articulated contribution of the subtree: positive semidefinite
        assert np.min(np.linalg.eigvalsh(abi.Jhat[k] - model.inertias[k])) >= -1e-10


def test_joint_space_inertia_is_symmetric_and_linear():
    model = random_chain(8, seed=12)
    q = np.linspace(-2.0, 2.0, 8)
    jsi = jsi_columns(model, q, ScanPlan.parallel(2))
    assert jsi.n == 8
    assert jsi.symmetry_error() <= 1e-8
    assert np.min(np.linalg.eigvalsh(0.5 * (jsi.M + jsi.M.T))) > 0.0

    rng = np.random.default_rng(3)
    qdd = rng.standard_normal(8)
    state = DynamicsInput(q, np.zeros(8), qdd, np.zeros(6), np.zeros(6), np.zeros(6))
    assert relative_error(jsi.M @ qdd, id_recursive(model, state).tau) <= 1e-9


def test_joint_space_inertia_matches_finite_difference_build(rng):
    model = random_chain(7, seed=17)
    state = random_input(model, rng)
    base = id_recursive(model, state.replace(qdd=np.zeros(7))).tau
    columns = [id_recursive(model, state.replace(qdd=e)).tau - base for e in np.eye(7)]
    M = jsi_columns(model, state.q, ScanPlan.parallel(2)).M
    assert relative_error(M, np.column_stack(columns)) <= 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("n", [100, 200])
def test_large_chains_round_trip_and_agree(n):
    model = random_chain(n, seed=n)
    for trial in range(2):
        state = round_trip_input(model, 1000 * n + trial)
        reference = forward_dynamics(model, state, 'jsiia', ScanPlan.parallel(2)).qdd
        assert relative_error(reference, state.qdd) <= 1e-6
        for algo in ('abia', 'abia_merged', 'abia_recursive'):
            qdd = forward_dynamics(model, state, algo, ScanPlan.parallel(2)).qdd
            assert relative_error(qdd, state.qdd) <= 1e-6
            assert relative_error(qdd, reference) <= 1e-6


def test_forward_dynamics_is_affine_in_torque():
    model = random_chain(6, seed=5)
    state = random_input(model, spawn_generators(5, 1)[0])
    delta = np.arange(1.0, 7.0)
    base = forward_dynamics(model, state, 'abia').qdd
    shifted = forward_dynamics(model, state.replace(applied_torques=state.applied_torques + delta), 'abia').qdd
    M = jsi_columns(model, state.q).M
    assert relative_error(shifted - base, np.linalg.solve(M, delta)) <= 1e-8


def test_bias_torque_matches_zero_acceleration_id():
    model = random_chain(5, seed=6)
    state = random_input(model, spawn_generators(6, 1)[0])
    expected = id_recursive(model, state.replace(qdd=np.zeros(5))).tau
    assert relative_error(bias_torque(model, state, id_algo='scan_fused'), expected) <= 1e-9


def test_merged_operands_respect_sparsity():
    model = random_chain(5, seed=9)
    state = random_input(model, spawn_generators(9, 1)[0])
    tf = link_transforms(model, state.q)
    Fhat = scan_motion(model, state.replace(qdd=np.zeros(5)), ScanPlan.sequential())[3]
    omega, Pi, Y = _propagation_terms(model, tf, abi_recursion(model, state.q, tf))
    items = _merged_operands(model, tf, Fhat, state.applied_torques, omega, Pi, Y, state.tip_force)
    assert len(items) == model.n + 3
    for item in items:
        assert not np.any(item.lift()[~MERGED_SPARSITY])
    product = items[1].compose(items[2]).lift()
    assert not np.any(product[~MERGED_SPARSITY])


def test_singular_joint_space_inertia_raises():
    jsi = JointSpaceInertia(np.array([[1.0, 0.0], [0.0, -1e-3]]))
    with pytest.raises(SingularInertiaError) as excinfo:
        jsi.solve(np.ones(2))
    assert excinfo.value.pivot < 0.0


def test_massless_tip_makes_abi_singular(pendulum):
    # a point mass on the joint axis has no inertia about it
    link = pendulum.links[0]
    on_axis = LinkSpec(link.home_transform, link.joint_twist, SpatialInertia.point_mass(1.0, [0.0, 0.0, 0.5]))
    model = ChainModel((link, on_axis))
    state = DynamicsInput(np.zeros(2), np.zeros(2), np.zeros(2), np.zeros(6), np.zeros(6), np.zeros(6), np.zeros(2))
    with pytest.raises(SingularInertiaError) as excinfo:
        forward_dynamics(model, state, 'abia')
    assert excinfo.value.link_index == 2


def test_asymmetric_joint_space_inertia_warns(caplog):
    columns = [DynamicsResult(None, None, None, np.array(col), None, None) for col in ([2.0, 0.1], [0.0, 2.0])]
    with caplog.at_level(logging.WARNING):
        jsi = _assemble_jsi(columns)
    assert jsi.symmetry_error() > 1e-8
    assert "asymmetric" in caplog.text


def test_forward_dynamics_needs_torques():
    model = random_chain(3, seed=0)
    with pytest.raises(DimensionMismatchError):
        forward_dynamics(model, DynamicsInput.zeros(3), 'jsiia')
    with pytest.raises(ValueError):
        forward_dynamics(model, DynamicsInput.zeros(3).replace(applied_torques=np.zeros(3)), 'crba')


def test_scan_stats_count_fd_stages():
    model = random_chain(64, seed=2)
    state = random_input(model, spawn_generators(2, 1)[0])
    stats = ScanStats()
    forward_dynamics(model, state, 'abia_merged', ScanPlan.parallel(1), stats=stats)
    assert 0 < stats.stages < 3 * model.n


def test_fd_batch_reports_failures_in_place():
    model = random_chain(4, seed=13)
    inputs = [round_trip_input(model, s) for s in range(4)]
    inputs[1] = inputs[1].replace(applied_torques=None)
    results = fd_batch(model, inputs, 'abia', ScanPlan.parallel(1))
    assert isinstance(results[1], GroupFailure)
    for k in (0, 2, 3):
        assert relative_error(results[k].qdd, inputs[k].qdd) <= 1e-6


def test_integrate_step_energy_drift_shrinks_with_step(pendulum):
    start = DynamicsInput([0.5], [0.0], [0.0], np.zeros(6), np.zeros(6), np.zeros(6), [0.0])
    start = start.with_gravity([0.0, -9.81, 0.0])

    def energy(s):
        height = PENDULUM_LENGTH * np.sin(s.q[0])
        return 0.5 * PENDULUM_MASS * PENDULUM_LENGTH ** 2 * s.qd[0] ** 2 + PENDULUM_MASS * 9.81 * height

    def drift(dt):
        state = start
        for _ in range(round(0.2 / dt)):
            state = integrate_step(pendulum, state, dt, 'abia_recursive')
        return abs(energy(state) - energy(start))

    coarse, fine = drift(1e-3), drift(1e-4)
    # semi-implicit Euler: first order in dt
    assert coarse < 5e-2
    assert fine < 5e-3
    assert fine < 0.2 * coarse
