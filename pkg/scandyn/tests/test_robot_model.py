"""
Tests for chain models: validation, random generation and the JSON documents.
"""

import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from scandyn.exceptions import DimensionMismatchError, ModelFormatError, ModelValidationError
from scandyn.robot_model import (
    GRAVITY,
    ChainModel,
    DynamicsInput,
    LinkSpec,
    ensure_valid,
    link_transforms,
    load_input,
    load_model,
    random_chain,
    random_input,
    read_model,
    save_input,
    save_model,
    spawn_generators,
    validate,
    write_model,
)
from scandyn.se3_core import RigidTransform, SpatialInertia, TwistVector, exp_twist


def test_random_chain_is_deterministic_and_valid():
    a = random_chain(12, seed=7)
    b = random_chain(12, seed=7)
    assert a.equals(b)
    assert not a.equals(random_chain(12, seed=8))
    assert validate(a) == []
    assert ensure_valid(a) is a


@seed(5)
@settings(max_examples=150, deadline=None)
@given(n=st.integers(min_value=1, max_value=256), chain_seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_random_chains_have_no_violations(n, chain_seed):
    model = random_chain(n, seed=chain_seed)
    assert model.n == n
    assert validate(model) == []


def test_random_chain_rejects_empty():
    with pytest.raises(ValueError):
        random_chain(0, seed=0)
    with pytest.raises(ModelValidationError):
        ChainModel(())


def test_packed_arrays_are_read_only():
    model = random_chain(3, seed=0)
    assert model.inertias.shape == (3, 6, 6)
    with pytest.raises(ValueError):
        model.joint_twists[0, 0] = 1.0


def test_validation_reports_every_violation(pendulum):
    link = pendulum.links[0]
    bad_twist = replace(link, joint_twist=TwistVector(np.zeros(3), [0.0, 0.0, 2.0]))
    bad_mass = replace(link, inertia=SpatialInertia.from_mass_properties(-1.0, np.zeros(3), np.eye(3)))
    bad_rotation = replace(link, home_transform=RigidTransform(np.diag([1.0, 2.0, 1.0]), np.zeros(3)))
    model = ChainModel((bad_twist, bad_mass, bad_rotation))

    violations = validate(model)
    assert any(v.startswith("links[0].joint_twist") and "not normalized" in v for v in violations)
    assert any(v.startswith("links[1].inertia") and "mass" in v for v in violations)
    assert any(v.startswith("links[2].home_transform") for v in violations)
    with pytest.raises(ModelValidationError) as excinfo:
        ensure_valid(model)
    assert excinfo.value.violations == violations


def test_prismatic_twist_needs_unit_linear_part():
    model = random_chain(1, seed=3)
    link = replace(model.links[0], joint_twist=TwistVector([0.0, 0.5, 0.0], np.zeros(3)))
    assert any("prismatic" in v for v in validate(ChainModel((link,))))


def test_point_mass_inertia_is_not_positive_definite(pendulum):
    assert any("positive definite" in v for v in validate(pendulum))


def test_link_transforms_match_home_times_exponential(rng):
    model = random_chain(4, seed=11)
    q = rng.uniform(-np.pi, np.pi, 4)
    tf = link_transforms(model, q)
    for i, link in enumerate(model.links):
        expected = link.home_transform @ exp_twist(link.joint_twist, q[i])
        assert np.allclose(tf.rotations[i], expected.rotation, atol=1e-12)
        assert np.allclose(tf.translations[i], expected.translation, atol=1e-12)
        inverse = expected.inverse()
        assert np.allclose(tf.inv_rotations[i], inverse.rotation, atol=1e-12)
        assert np.allclose(tf.inv_translations[i], inverse.translation, atol=1e-12)


def test_model_document_round_trip_is_bit_exact(tmp_path):
    model = random_chain(5, seed=21)
    assert load_model(save_model(model)).equals(model)
    path = tmp_path / "chain.json"
    write_model(model, path)
    assert read_model(path).equals(model)


@pytest.mark.parametrize("mutate, field_path", [
    (lambda doc: doc["links"][1].pop("mass"), "links[1].mass"),
    (lambda doc: doc["links"][0].__setitem__("joint_twist", [0, 0, 1]), "links[0].joint_twist"),
    (lambda doc: doc["links"][2].pop("joint_twist"), "links[2].joint_twist"),
    (lambda doc: doc.__setitem__("links", []), "links"),
    (lambda doc: doc["links"][2]["com"].__setitem__(1, "x"), "links[2].com[1]"),
    (lambda doc: doc.__setitem__("version", 99), "version"),
])
def test_model_document_errors_name_the_field(mutate, field_path):
    document = json.loads(save_model(random_chain(3, seed=0)))
    mutate(document)
    with pytest.raises(ModelFormatError) as excinfo:
        load_model(json.dumps(document))
    assert excinfo.value.path == field_path
    assert str(excinfo.value).startswith(field_path)


def test_model_document_rejects_non_finite_numbers():
    document = save_model(random_chain(1, seed=0)).replace('"mass": ', '"mass": NaN, "unused": ', 1)
    with pytest.raises(ModelFormatError):
        load_model(document)
    with pytest.raises(ModelFormatError):
        load_model("{not json")


def test_input_document_defaults_and_gravity():
    state = load_input(json.dumps({"q": [0.1, 0.2], "gravity": [0.0, 0.0, -9.81]}), n=2)
    assert np.array_equal(state.qd, np.zeros(2))
    assert np.allclose(state.base_acceleration, [0.0, 0.0, 9.81, 0.0, 0.0, 0.0])
    assert state.applied_torques is None
    with pytest.raises(ModelFormatError):
        load_input(json.dumps({"q": [0.1]}), n=2)


def test_input_document_round_trip(rng):
    model = random_chain(3, seed=2)
    state = random_input(model, rng)
    restored = load_input(save_input(state), n=3)
    for name in ("q", "qd", "qdd", "base_velocity", "base_acceleration", "tip_force", "applied_torques"):
        assert np.array_equal(getattr(restored, name), getattr(state, name))


def test_dynamics_input_checks_lengths():
    model = random_chain(3, seed=0)
    with pytest.raises(DimensionMismatchError):
        DynamicsInput(np.zeros(3), np.zeros(2), np.zeros(3), np.zeros(6), np.zeros(6), np.zeros(6))
    with pytest.raises(DimensionMismatchError):
        DynamicsInput.zeros(2).check_against(model)
    with pytest.raises(DimensionMismatchError):
        DynamicsInput.zeros(3).check_against(model, need_torques=True)


def test_random_input_folds_gravity_into_base_acceleration(rng):
    state = random_input(random_chain(2, seed=0), rng)
    assert np.allclose(state.base_acceleration[:3], -np.asarray(GRAVITY))
    assert state.applied_torques is not None
    assert random_input(random_chain(2, seed=0), rng, gravity=None, with_torques=False).applied_torques is None


def test_spawned_generators_are_reproducible_and_independent():
    first = [g.random() for g in spawn_generators(5, 3)]
    again = [g.random() for g in spawn_generators(5, 3)]
    assert first == again
    assert len(set(first)) == 3


def test_link_spec_is_frozen(pendulum):
    with pytest.raises(AttributeError):
        pendulum.links[0].inertia = None
    assert isinstance(pendulum.links[0], LinkSpec)
