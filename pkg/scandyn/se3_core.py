"""
SE(3) Core Arithmetic
=====================

Coordinate-free Lie group / Lie algebra arithmetic for rigid bodies: transforms,
twists, wrenches, Adjoint and adjoint maps, the twist exponential and spatial inertia.

Conventions (used by every other module):
- Twists are 6-vectors ordered (linear, angular): xi = (v, w).
- Wrenches are 6-vectors ordered (force, moment), so the pairing <F, V> is a plain
  dot product and a joint torque is tau = S^T F.
- Ad_g for g = (R, p) is the block matrix [[R, p^R], [0, R]] in this ordering and
  ad_xi = [[w^, v^], [0, w^]].
- All arithmetic is float64.

Two layers are provided: value types (RigidTransform, TwistVector, WrenchVector,
SpatialInertia) for the public API, and array-level helpers (apply_adjoint,
apply_coadjoint, ad_apply, ...) that the dynamics pipelines call in their inner loops.

Author: Dynamics Engineering Team
Created: October 2026
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from scandyn.config import ORTHONORMAL_TOL, TAYLOR_THRESHOLD

ArrayLike = Union[np.ndarray, list, tuple]

_EYE3 = np.eye(3)


def _frozen_array(values, shape: Tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {array.shape}")
    array.flags.writeable = False
    return array


# ---------------------------------------------------------------------------
# Array-level helpers
# ---------------------------------------------------------------------------

def skew(w: np.ndarray) -> np.ndarray:
    """3x3 cross-product matrix of a 3-vector."""
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def unskew(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def adjoint_matrix(rotation: np.ndarray, translation: np.ndarray) -> np.ndarray:
    """Ad_g as a 6x6 matrix for g = (rotation, translation)."""
    ad = np.zeros((6, 6))
    ad[:3, :3] = rotation
    ad[:3, 3:] = skew(translation) @ rotation
    ad[3:, 3:] = rotation
    return ad


def apply_adjoint(rotation: np.ndarray, translation: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Ad_g(xi) without forming the 6x6 matrix."""
    rw = rotation @ xi[3:]
    out = np.empty(6)
    out[:3] = rotation @ xi[:3] + np.cross(translation, rw)
    out[3:] = rw
    return out


def apply_coadjoint(rotation: np.ndarray, translation: np.ndarray, wrench: np.ndarray) -> np.ndarray:
    """Ad_g^T(F) without forming the 6x6 matrix."""
    f = wrench[:3]
    out = np.empty(6)
    out[:3] = rotation.T @ f
    out[3:] = rotation.T @ (wrench[3:] - np.cross(translation, f))
    return out


def ad_matrix(xi: np.ndarray) -> np.ndarray:
    """Lie bracket matrix ad_xi."""
    ad = np.zeros((6, 6))
    w_hat = skew(xi[3:])
    ad[:3, :3] = w_hat
    ad[:3, 3:] = skew(xi[:3])
    ad[3:, 3:] = w_hat
    return ad


def ad_apply(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """[xi, eta] = ad_xi(eta)."""
    v, w = xi[:3], xi[3:]
    out = np.empty(6)
    out[:3] = np.cross(w, eta[:3]) + np.cross(v, eta[3:])
    out[3:] = np.cross(w, eta[3:])
    return out


def ad_transpose_apply(xi: np.ndarray, wrench: np.ndarray) -> np.ndarray:
    """ad_xi^T(F), the term behind gyroscopic forces."""
    v, w = xi[:3], xi[3:]
    f = wrench[:3]
    out = np.empty(6)
    out[:3] = -np.cross(w, f)
    out[3:] = -np.cross(v, f) - np.cross(w, wrench[3:])
    return out


def _exp_coefficients(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """sin(t)/t, (1-cos t)/t^2, (t-sin t)/t^3 with series guards near zero."""
    t = np.asarray(t, dtype=np.float64)
    small = np.abs(t) < TAYLOR_THRESHOLD
    safe = np.where(small, 1.0, t)
    t2 = t * t
    a = np.where(small, 1.0 - t2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - t2 / 24.0, (1.0 - np.cos(safe)) / (safe * safe))
    c = np.where(small, 1.0 / 6.0 - t2 / 120.0, (safe - np.sin(safe)) / (safe ** 3))
    return a, b, c


def exp_twist_batch(twists: np.ndarray, thetas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exponentials of many scaled twists at once.

    Args:
        twists: (n, 6) array of joint twists
        thetas: (n,) array of joint variables

    Returns:
        (rotations (n, 3, 3), translations (n, 3))
    """
    twists = np.asarray(twists, dtype=np.float64).reshape(-1, 6)
    thetas = np.asarray(thetas, dtype=np.float64).reshape(-1)
    v = twists[:, :3] * thetas[:, None]
    w = twists[:, 3:] * thetas[:, None]
    t = np.linalg.norm(w, axis=1)
    a, b, c = _exp_coefficients(t)

    n = twists.shape[0]
    omega = np.zeros((n, 3, 3))
    omega[:, 0, 1] = -w[:, 2]
    omega[:, 0, 2] = w[:, 1]
    omega[:, 1, 0] = w[:, 2]
    omega[:, 1, 2] = -w[:, 0]
    omega[:, 2, 0] = -w[:, 1]
    omega[:, 2, 1] = w[:, 0]
    omega2 = omega @ omega

    rotations = _EYE3 + a[:, None, None] * omega + b[:, None, None] * omega2
    jacobians = _EYE3 + b[:, None, None] * omega + c[:, None, None] * omega2
    translations = np.einsum('nij,nj->ni', jacobians, v)
    return rotations, translations


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Element of SE(3): x -> rotation @ x + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'rotation', _frozen_array(self.rotation, (3, 3), 'rotation'))
        object.__setattr__(self, 'translation', _frozen_array(self.translation, (3,), 'translation'))

    @classmethod
    def identity(cls) -> 'RigidTransform':
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: ArrayLike) -> 'RigidTransform':
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:3, :3], matrix[:3, 3])

    def as_matrix(self) -> np.ndarray:
        matrix = np.eye(4)
        matrix[:3, :3] = self.rotation
        matrix[:3, 3] = self.translation
        return matrix

    def compose(self, other: 'RigidTransform') -> 'RigidTransform':
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def __matmul__(self, other: 'RigidTransform') -> 'RigidTransform':
        return self.compose(other)

    def inverse(self) -> 'RigidTransform':
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def act(self, point: ArrayLike) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=np.float64) + self.translation

    def orthonormality_error(self) -> float:
        """Frobenius distance of R^T R from I, plus |det R - 1|."""
        gram = self.rotation.T @ self.rotation - _EYE3
        return float(np.linalg.norm(gram) + abs(np.linalg.det(self.rotation) - 1.0))

    def is_valid(self, tol: float = ORTHONORMAL_TOL) -> bool:
        return self.orthonormality_error() <= tol

    def allclose(self, other: 'RigidTransform', atol: float = 1e-12) -> bool:
        return (np.allclose(self.rotation, other.rotation, rtol=0.0, atol=atol)
                and np.allclose(self.translation, other.translation, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"RigidTransform(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


class _SpatialVector:
    """Shared vector-space arithmetic for twists and wrenches."""

    def as_array(self) -> np.ndarray:
        raise NotImplementedError

    @classmethod
    def from_array(cls, values: ArrayLike):
        raise NotImplementedError

    @classmethod
    def zero(cls):
        return cls.from_array(np.zeros(6))

    def __add__(self, other):
        return type(self).from_array(self.as_array() + other.as_array())

    def __sub__(self, other):
        return type(self).from_array(self.as_array() - other.as_array())

    def __neg__(self):
        return type(self).from_array(-self.as_array())

    def __mul__(self, scalar: float):
        return type(self).from_array(self.as_array() * float(scalar))

    __rmul__ = __mul__

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return np.allclose(self.as_array(), other.as_array(), rtol=0.0, atol=atol)


@dataclass(frozen=True, eq=False)
class TwistVector(_SpatialVector):
    """Element of se(3); array form is (linear, angular)."""

    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'linear', _frozen_array(self.linear, (3,), 'linear'))
        object.__setattr__(self, 'angular', _frozen_array(self.angular, (3,), 'angular'))

    @classmethod
    def from_array(cls, values: ArrayLike) -> 'TwistVector':
        values = np.asarray(values, dtype=np.float64).reshape(6)
        return cls(values[:3], values[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])

    def __repr__(self) -> str:
        return f"TwistVector(linear={self.linear.tolist()}, angular={self.angular.tolist()})"


@dataclass(frozen=True, eq=False)
class WrenchVector(_SpatialVector):
    """Dual of se(3); array form is (force, moment)."""

    moment: np.ndarray
    force: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'moment', _frozen_array(self.moment, (3,), 'moment'))
        object.__setattr__(self, 'force', _frozen_array(self.force, (3,), 'force'))

    @classmethod
    def from_array(cls, values: ArrayLike) -> 'WrenchVector':
        values = np.asarray(values, dtype=np.float64).reshape(6)
        return cls(moment=values[3:], force=values[:3])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.force, self.moment])

    def __repr__(self) -> str:
        return f"WrenchVector(force={self.force.tolist()}, moment={self.moment.tolist()})"


@dataclass(frozen=True, eq=False)
class SpatialInertia:
    """
    Rigid-body inertia expressed in a link frame.

    Built from mass, center of mass (link frame, meters) and rotational inertia about
    the center of mass (link-frame axes). The 6x6 matrix maps twists (v, w) to
    momenta (p, h): [[m I, -m c^], [m c^, I_c - m c^ c^]].
    """

    mass: float
    com: np.ndarray
    rot_inertia: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'mass', float(self.mass))
        object.__setattr__(self, 'com', _frozen_array(self.com, (3,), 'com'))
        object.__setattr__(self, 'rot_inertia', _frozen_array(self.rot_inertia, (3, 3), 'rot_inertia'))
        c_hat = skew(self.com)
        matrix = np.zeros((6, 6))
        matrix[:3, :3] = self.mass * _EYE3
        matrix[:3, 3:] = -self.mass * c_hat
        matrix[3:, :3] = self.mass * c_hat
        matrix[3:, 3:] = self.rot_inertia - self.mass * (c_hat @ c_hat)
        matrix.flags.writeable = False
        object.__setattr__(self, 'matrix', matrix)

    @classmethod
    def from_mass_properties(cls, mass: float, com: ArrayLike, rot_inertia: ArrayLike) -> 'SpatialInertia':
        return cls(mass, com, rot_inertia)

    @classmethod
    def point_mass(cls, mass: float, position: ArrayLike) -> 'SpatialInertia':
        return cls(mass, position, np.zeros((3, 3)))

    def apply(self, twist: Union[TwistVector, ArrayLike]) -> WrenchVector:
        return WrenchVector.from_array(self.matrix @ _twist_array(twist))

    def kinetic_energy(self, twist: Union[TwistVector, ArrayLike]) -> float:
        v = _twist_array(twist)
        return 0.5 * float(v @ self.matrix @ v)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T))

    def allclose(self, other: 'SpatialInertia', atol: float = 0.0) -> bool:
        return np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _twist_array(xi) -> np.ndarray:
    if isinstance(xi, _SpatialVector):
        return xi.as_array()
    return np.asarray(xi, dtype=np.float64).reshape(6)


def exp_twist(xi: Union[TwistVector, ArrayLike], theta: float) -> RigidTransform:
    """
    Exponential of the twist xi scaled by theta.

    Rodrigues' formula for the rotation block and the SE(3) closed form for the
    translation; a zero twist gives the identity for any theta.
    """
    rotations, translations = exp_twist_batch(_twist_array(xi)[None, :], np.array([theta]))
    return RigidTransform(rotations[0], translations[0])


def log_transform(g: RigidTransform) -> Tuple[TwistVector, float]:
    """
    Inverse of exp_twist: a normalized twist and angle with exp_twist(xi, theta) = g.

    Rotation angles are returned in [0, pi].
    """
    rotvec = Rotation.from_matrix(g.rotation).as_rotvec()
    theta = float(np.linalg.norm(rotvec))
    if theta < TAYLOR_THRESHOLD:
        distance = float(np.linalg.norm(g.translation))
        if distance == 0.0:
            return TwistVector.zero(), 0.0
        return TwistVector(g.translation / distance, np.zeros(3)), distance
    w = rotvec / theta
    w_hat = skew(w)
    g_inv = (_EYE3 / theta - 0.5 * w_hat
             + (1.0 / theta - 0.5 / np.tan(0.5 * theta)) * (w_hat @ w_hat))
    return TwistVector(g_inv @ g.translation, w), theta


def adjoint(g: RigidTransform) -> np.ndarray:
    """Ad_g (6x6); Ad_{gh} = Ad_g Ad_h."""
    return adjoint_matrix(g.rotation, g.translation)


def ad_small(xi: Union[TwistVector, ArrayLike]) -> np.ndarray:
    """ad_xi (6x6) so that ad_xi(eta) = [xi, eta]."""
    return ad_matrix(_twist_array(xi))


def coadjoint_apply(g: RigidTransform, wrench: Union[WrenchVector, ArrayLike]):
    """Ad_g^T F. Returns a WrenchVector for WrenchVector input, an array otherwise."""
    if isinstance(wrench, WrenchVector):
        return WrenchVector.from_array(apply_coadjoint(g.rotation, g.translation, wrench.as_array()))
    return apply_coadjoint(g.rotation, g.translation, np.asarray(wrench, dtype=np.float64).reshape(6))


def pairing(wrench: Union[WrenchVector, ArrayLike], twist: Union[TwistVector, ArrayLike]) -> float:
    """<F, V>: power of a wrench on a twist."""
    f = wrench.as_array() if isinstance(wrench, WrenchVector) else np.asarray(wrench, dtype=np.float64)
    return float(f @ _twist_array(twist))
