"""
Robot Model
===========

Single open-chain robot models and their dynamic inputs: definition, validation,
seeded random generation and JSON (de)serialization.

A chain is an ordered tuple of links; link i carries
- home_transform M_i (f_{i-1,i} at q_i = 0),
- joint_twist S_i (unit angular part for revolute joints, zero angular and unit
  linear part for prismatic joints),
- inertia J_i expressed in link frame i.

Gravity is not part of the model. It enters through the base acceleration as the
fictitious acceleration V̇_0 = (-g, 0), see DynamicsInput.with_gravity.

Model document (JSON):
    {"version": 1,
     "links": [{"home_rotation": [9 numbers, row-major],
                "home_translation": [3 numbers],
                "joint_twist": [6 numbers, linear then angular],
                "mass": number,
                "com": [3 numbers],
                "rot_inertia": [9 numbers, row-major symmetric]}, ...]}

Author: Dynamics Engineering Team
Created: October 2026
"""

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from scandyn.config import ORTHONORMAL_TOL, SYMMETRY_TOL
from scandyn.exceptions import DimensionMismatchError, ModelFormatError, ModelValidationError
from scandyn.se3_core import (
    RigidTransform,
    SpatialInertia,
    TwistVector,
    WrenchVector,
    exp_twist_batch,
)

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
GRAVITY = np.array([0.0, 0.0, -9.81])
TWIST_NORM_TOL = 1e-10

# Ranges for random_chain / random_input; also written into benchmark provenance
GENERATION_RANGES = {
    'joint_types': 'revolute|prismatic p=0.5 each, axis uniform on S^2',
    'revolute_axis_offset_m': (-0.1, 0.1),
    'home_translation_m': (0.1, 1.0),
    'home_rotation': 'uniform on SO(3)',
    'mass_kg': (0.5, 5.0),
    'com_m': (-0.2, 0.2),
    'box_edge_m': (0.05, 0.5),
    'q': (-math.pi, math.pi),
    'qd': (-1.0, 1.0),
    'qdd': (-1.0, 1.0),
    'tau': (-1.0, 1.0),
}


@dataclass(frozen=True, eq=False)
class LinkSpec:
    home_transform: RigidTransform
    joint_twist: TwistVector
    inertia: SpatialInertia


@dataclass(frozen=True, eq=False)
class ChainModel:
    """Serial chain of n >= 1 links; the packed arrays are read-only views for the solvers."""

    links: Tuple[LinkSpec, ...]

    def __post_init__(self):
        links = tuple(self.links)
        if not links:
            raise ModelValidationError(["chain must have at least one link"])
        object.__setattr__(self, 'links', links)
        packed = {
            'joint_twists': np.array([link.joint_twist.as_array() for link in links]),
            'home_rotations': np.array([link.home_transform.rotation for link in links]),
            'home_translations': np.array([link.home_transform.translation for link in links]),
            'inertias': np.array([link.inertia.matrix for link in links]),
        }
        for name, array in packed.items():
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    @property
    def n(self) -> int:
        return len(self.links)

    def __len__(self) -> int:
        return len(self.links)

    def equals(self, other: 'ChainModel') -> bool:
        """Bit-exact comparison of every numeric field."""
        if self.n != other.n:
            return False
        for a, b in zip(self.links, other.links):
            pairs = [
                (a.home_transform.rotation, b.home_transform.rotation),
                (a.home_transform.translation, b.home_transform.translation),
                (a.joint_twist.as_array(), b.joint_twist.as_array()),
                (a.inertia.com, b.inertia.com),
                (a.inertia.rot_inertia, b.inertia.rot_inertia),
            ]
            if a.inertia.mass != b.inertia.mass:
                return False
            if not all(np.array_equal(x, y) for x, y in pairs):
                return False
        return True


def _vector(values, size: int, name: str) -> np.ndarray:
    if isinstance(values, (TwistVector, WrenchVector)):
        values = values.as_array()
    array = np.array(values, dtype=np.float64).reshape(-1)
    if array.shape != (size,):
        raise DimensionMismatchError(f"{name} must have length {size}, got {array.shape[0]}")
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class DynamicsInput:
    """
    Joint state and boundary conditions for one dynamics evaluation.

    base_velocity / base_acceleration are twists (linear, angular) of link 0;
    tip_force is the wrench (force, moment) the last link exerts on its
    environment, in link-n coordinates. applied_torques is only read by forward
    dynamics.
    """

    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray
    base_velocity: np.ndarray
    base_acceleration: np.ndarray
    tip_force: np.ndarray
    applied_torques: Optional[np.ndarray] = None

    def __post_init__(self):
        n = np.asarray(self.q).reshape(-1).shape[0]
        object.__setattr__(self, 'q', _vector(self.q, n, 'q'))
        object.__setattr__(self, 'qd', _vector(self.qd, n, 'qd'))
        object.__setattr__(self, 'qdd', _vector(self.qdd, n, 'qdd'))
        object.__setattr__(self, 'base_velocity', _vector(self.base_velocity, 6, 'base_velocity'))
        object.__setattr__(self, 'base_acceleration', _vector(self.base_acceleration, 6, 'base_acceleration'))
        object.__setattr__(self, 'tip_force', _vector(self.tip_force, 6, 'tip_force'))
        if self.applied_torques is not None:
            object.__setattr__(self, 'applied_torques', _vector(self.applied_torques, n, 'applied_torques'))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @classmethod
    def zeros(cls, n: int) -> 'DynamicsInput':
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(6), np.zeros(6), np.zeros(6))

    def with_gravity(self, gravity: Sequence[float] = GRAVITY) -> 'DynamicsInput':
        """Add the fictitious base acceleration (-g, 0) for a gravity vector g."""
        base_acc = np.array(self.base_acceleration)
        base_acc[:3] -= np.asarray(gravity, dtype=np.float64)
        return replace(self, base_acceleration=base_acc)

    def replace(self, **changes) -> 'DynamicsInput':
        return replace(self, **changes)

    def check_against(self, model: ChainModel, need_torques: bool = False) -> None:
        """
        Raises:
            DimensionMismatchError: array lengths differ from the model's link count
        """
        if self.n != model.n:
            raise DimensionMismatchError(f"input has {self.n} joints, model has {model.n} links")
        if need_torques and self.applied_torques is None:
            raise DimensionMismatchError("forward dynamics needs applied_torques")


def validate(model: ChainModel) -> List[str]:
    """
    Check every model invariant.

    Returns:
        All violations found (empty list when the model is well formed)
    """
    violations = []
    for i, link in enumerate(model.links):
        path = f"links[{i}]"
        transform = link.home_transform
        if not (np.all(np.isfinite(transform.rotation)) and np.all(np.isfinite(transform.translation))):
            violations.append(f"{path}.home_transform: non-finite entries")
        else:
            error = transform.orthonormality_error()
            if error > ORTHONORMAL_TOL:
                violations.append(f"{path}.home_transform: rotation not orthonormal (error {error:.3g})")

        twist = link.joint_twist
        angular = float(np.linalg.norm(twist.angular))
        linear = float(np.linalg.norm(twist.linear))
        if not np.all(np.isfinite(twist.as_array())):
            violations.append(f"{path}.joint_twist: non-finite entries")
        elif abs(angular - 1.0) <= TWIST_NORM_TOL:
            pass
        elif angular <= TWIST_NORM_TOL:
            if abs(linear - 1.0) > TWIST_NORM_TOL:
                violations.append(
                    f"{path}.joint_twist: prismatic twist needs unit linear part, norm is {linear:.6g}")
        else:
            violations.append(f"{path}.joint_twist: angular norm {angular:.6g} is neither 0 nor 1 (not normalized)")

        inertia = link.inertia
        if not np.all(np.isfinite(inertia.matrix)):
            violations.append(f"{path}.inertia: non-finite entries")
            continue
        if inertia.mass <= 0.0:
            violations.append(f"{path}.inertia: mass {inertia.mass:.6g} must be positive")
        asymmetry = float(np.max(np.abs(inertia.rot_inertia - inertia.rot_inertia.T)))
        if asymmetry > SYMMETRY_TOL:
            violations.append(f"{path}.inertia: rot_inertia not symmetric (max deviation {asymmetry:.3g})")
        smallest = float(np.min(inertia.eigenvalues()))
        if smallest <= 0.0:
            violations.append(f"{path}.inertia: eigenvalue {smallest:.6g} <= 0, not positive definite")
    return violations


def ensure_valid(model: ChainModel) -> ChainModel:
    """
    Raises:
        ModelValidationError: with every violation found by validate
    """
    violations = validate(model)
    if violations:
        raise ModelValidationError(violations)
    return model


# ---------------------------------------------------------------------------
# Kinematics shared by all solvers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinkTransforms:
    """f_{i-1,i} = M_i exp(S_i q_i) and its inverse g_i for every link, packed as arrays."""

    rotations: np.ndarray
    translations: np.ndarray
    inv_rotations: np.ndarray
    inv_translations: np.ndarray


def link_transforms(model: ChainModel, q: np.ndarray) -> LinkTransforms:
    """Vectorized CalcTransform stage: all adjacent transforms in one pass."""
    exp_rot, exp_trans = exp_twist_batch(model.joint_twists, q)
    rotations = model.home_rotations @ exp_rot
    translations = np.einsum('nij,nj->ni', model.home_rotations, exp_trans) + model.home_translations
    inv_rotations = np.transpose(rotations, (0, 2, 1))
    inv_translations = -np.einsum('nij,nj->ni', inv_rotations, translations)
    return LinkTransforms(rotations, translations, inv_rotations, inv_translations)


# ---------------------------------------------------------------------------
# Random generation
# ---------------------------------------------------------------------------

def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """Independent, reproducible generators for `count` groups."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def _unit_vector(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(3)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm


def _random_link(rng: np.random.Generator) -> LinkSpec:
    rotation = Rotation.random(random_state=rng).as_matrix()
    low, high = GENERATION_RANGES['home_translation_m']
    translation = _unit_vector(rng) * rng.uniform(low, high)

    axis = _unit_vector(rng)
    if rng.random() < 0.5:
        low, high = GENERATION_RANGES['revolute_axis_offset_m']
        point = rng.uniform(low, high, 3)
        twist = TwistVector(-np.cross(axis, point), axis)
    else:
        twist = TwistVector(axis, np.zeros(3))

    low, high = GENERATION_RANGES['mass_kg']
    mass = rng.uniform(low, high)
    low, high = GENERATION_RANGES['com_m']
    com = rng.uniform(low, high, 3)
    low, high = GENERATION_RANGES['box_edge_m']
    dx, dy, dz = rng.uniform(low, high, 3)
    principal = mass / 12.0 * np.array([dy * dy + dz * dz, dx * dx + dz * dz, dx * dx + dy * dy])
    frame = Rotation.random(random_state=rng).as_matrix()
    rot_inertia = frame @ np.diag(principal) @ frame.T
    rot_inertia = 0.5 * (rot_inertia + rot_inertia.T)

    return LinkSpec(
        home_transform=RigidTransform(rotation, translation),
        joint_twist=twist,
        inertia=SpatialInertia.from_mass_properties(mass, com, rot_inertia),
    )


def random_chain(n: int, seed: int) -> ChainModel:
    """
    Deterministic random chain of n links for a given seed.

    Raises:
        ValueError: n < 1
    """
    if n < 1:
        raise ValueError(f"random_chain needs n >= 1, got {n}")
    rng = make_generator(seed)
    return ChainModel(tuple(_random_link(rng) for _ in range(n)))


def random_input(model: ChainModel, rng: np.random.Generator,
                 gravity: Optional[Sequence[float]] = GRAVITY,
                 with_torques: bool = True) -> DynamicsInput:
    """Randomized joint state (and applied torques) for one evaluation on `model`."""
    n = model.n
    q = rng.uniform(*GENERATION_RANGES['q'], n)
    qd = rng.uniform(*GENERATION_RANGES['qd'], n)
    qdd = rng.uniform(*GENERATION_RANGES['qdd'], n)
    torques = rng.uniform(*GENERATION_RANGES['tau'], n) if with_torques else None
    state = DynamicsInput(q, qd, qdd, np.zeros(6), np.zeros(6), np.zeros(6), torques)
    if gravity is not None:
        state = state.with_gravity(gravity)
    return state


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _reject_constant(token: str):
    raise ModelFormatError("$", f"non-finite number '{token}' is not allowed")


def _parse_document(document: str) -> Any:
    try:
        return json.loads(document, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ModelFormatError("$", f"invalid JSON: {e}")


def _numbers(container: Dict[str, Any], key: str, path: str, count: Optional[int] = None) -> np.ndarray:
    field_path = f"{path}.{key}" if path else key
    if key not in container:
        raise ModelFormatError(field_path, "missing field")
    value = container[key]
    scalar = count is None
    items = [value] if scalar else value
    if not isinstance(items, list):
        raise ModelFormatError(field_path, f"expected an array of {count} numbers")
    if not scalar and len(items) != count:
        raise ModelFormatError(field_path, f"expected {count} numbers, got {len(items)}")
    for k, item in enumerate(items):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            where = field_path if scalar else f"{field_path}[{k}]"
            raise ModelFormatError(where, f"expected a number, got {type(item).__name__}")
        if not math.isfinite(item):
            where = field_path if scalar else f"{field_path}[{k}]"
            raise ModelFormatError(where, "non-finite number")
    return np.array(items, dtype=np.float64)


def save_model(model: ChainModel) -> str:
    """JSON document for `model`; floats use the shortest round-trip repr."""
    links = []
    for link in model.links:
        links.append({
            'home_rotation': link.home_transform.rotation.reshape(9).tolist(),
            'home_translation': link.home_transform.translation.tolist(),
            'joint_twist': link.joint_twist.as_array().tolist(),
            'mass': link.inertia.mass,
            'com': link.inertia.com.tolist(),
            'rot_inertia': link.inertia.rot_inertia.reshape(9).tolist(),
        })
    return json.dumps({'version': MODEL_FORMAT_VERSION, 'links': links}, indent=2)


def load_model(document: str) -> ChainModel:
    """
    Parse a model document.

    Raises:
        ModelFormatError: schema violation, with the offending field path
    """
    data = _parse_document(document)
    if not isinstance(data, dict):
        raise ModelFormatError("$", "top level must be an object")
    if data.get('version') != MODEL_FORMAT_VERSION:
        raise ModelFormatError("version", f"unsupported version {data.get('version')!r}, expected {MODEL_FORMAT_VERSION}")
    links_data = data.get('links')
    if not isinstance(links_data, list):
        raise ModelFormatError("links", "missing or not an array")
    if not links_data:
        raise ModelFormatError("links", "chain must have at least one link")

    links = []
    for i, item in enumerate(links_data):
        path = f"links[{i}]"
        if not isinstance(item, dict):
            raise ModelFormatError(path, "link must be an object")
        rotation = _numbers(item, 'home_rotation', path, 9).reshape(3, 3)
        translation = _numbers(item, 'home_translation', path, 3)
        twist = _numbers(item, 'joint_twist', path, 6)
        mass = float(_numbers(item, 'mass', path)[0])
        com = _numbers(item, 'com', path, 3)
        rot_inertia = _numbers(item, 'rot_inertia', path, 9).reshape(3, 3)
        links.append(LinkSpec(
            home_transform=RigidTransform(rotation, translation),
            joint_twist=TwistVector.from_array(twist),
            inertia=SpatialInertia.from_mass_properties(mass, com, rot_inertia),
        ))
    return ChainModel(tuple(links))


def save_input(state: DynamicsInput) -> str:
    data = {
        'q': state.q.tolist(),
        'qd': state.qd.tolist(),
        'qdd': state.qdd.tolist(),
        'base_velocity': state.base_velocity.tolist(),
        'base_acceleration': state.base_acceleration.tolist(),
        'tip_force': state.tip_force.tolist(),
    }
    if state.applied_torques is not None:
        data['applied_torques'] = state.applied_torques.tolist()
    return json.dumps(data, indent=2)


def load_input(document: str, n: Optional[int] = None) -> DynamicsInput:
    """
    Parse an input document. Omitted fields default to zeros; an optional
    "gravity" 3-vector is folded into base_acceleration.

    Raises:
        ModelFormatError: schema violation, with the offending field path
    """
    data = _parse_document(document)
    if not isinstance(data, dict):
        raise ModelFormatError("$", "top level must be an object")
    if 'q' not in data:
        raise ModelFormatError("q", "missing field")
    count = len(data['q']) if isinstance(data['q'], list) else -1
    if n is not None and count != n:
        raise ModelFormatError("q", f"expected {n} numbers, got {count}")
    q = _numbers(data, 'q', "", count)

    def optional(key: str, size: int) -> np.ndarray:
        return _numbers(data, key, "", size) if key in data else np.zeros(size)

    state = DynamicsInput(
        q=q,
        qd=optional('qd', count),
        qdd=optional('qdd', count),
        base_velocity=optional('base_velocity', 6),
        base_acceleration=optional('base_acceleration', 6),
        tip_force=optional('tip_force', 6),
        applied_torques=_numbers(data, 'applied_torques', "", count) if 'applied_torques' in data else None,
    )
    if 'gravity' in data:
        state = state.with_gravity(_numbers(data, 'gravity', "", 3))
    return state


def read_model(path: Union[str, Path]) -> ChainModel:
    return load_model(Path(path).read_text(encoding='utf-8'))


def write_model(model: ChainModel, path: Union[str, Path]) -> None:
    Path(path).write_text(save_model(model), encoding='utf-8')
    logger.info(f"Saved {model.n}-link model to {path}")
