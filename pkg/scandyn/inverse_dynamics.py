"""
Inverse Dynamics
================

Joint torques from prescribed motion for a serial chain, computed either by the
classic two-phase Newton-Euler recursion or as prefix scans:

1. CalcTransform: f_{i-1,i} = M_i exp(S_i q_i) for every link (vectorized map)
2. Velocity scan over (g, xi) operands, g = f_{i-1,i}^-1
3. Acceleration scan over (g, xi) operands built from the scanned velocities
4. Bias forces F^_i = J_i V'_i - ad_{V_i}^T (J_i V_i) (vectorized map)
5. Backward force/torque scan over WrenchTorqueOperand
6. Joint torques tau_i = S_i^T F_i, read off the scan with its one-step lag

Two fused variants are provided: one scan over the SE(3) x se(3) x se(3)
operand (its 13x13 lift is available for oracles) and a fully synchronous
28-dimensional affine scan that also carries the bias forces via the nine
quadratic velocity terms Q_i.

All recursions put the new operand on the left (x_i = a_i (+) x_{i-1}), so every
semigroup is defined in matrix-product order and scanned through
Semigroup.opposite().

Author: Dynamics Engineering Team
Created: October 2026
"""

import logging
import multiprocessing
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Union

import numpy as np

from scandyn.exceptions import DimensionMismatchError
from scandyn.robot_model import ChainModel, DynamicsInput, LinkTransforms, link_transforms
from scandyn.scan_engine import (
    AffineOperand,
    ScanPlan,
    ScanStats,
    Semigroup,
    affine_semigroup,
    inclusive_scan,
)
from scandyn.se3_core import (
    RigidTransform,
    SpatialInertia,
    TwistVector,
    WrenchVector,
    ad_apply,
    ad_matrix,
    adjoint_matrix,
    apply_adjoint,
    skew,
    unskew,
)

logger = logging.getLogger(__name__)

ID_ALGORITHMS = ('recursive', 'scan', 'scan_fused', 'scan_synchronous')

OperandHook = Callable[[str, List[Any]], List[Any]]

_EYE3 = np.eye(3)
_ZERO3 = np.zeros(3)
_ZERO6 = np.zeros(6)


@dataclass(frozen=True, eq=False)
class DynamicsResult:
    """
    Per-link outputs of one inverse dynamics evaluation.

    Rows of V, Vdot and F belong to links 1..n in their own frames; base_wrench
    is F_0, the wrench link 1 exerts on the base, in base coordinates.
    """

    V: np.ndarray
    Vdot: np.ndarray
    F: np.ndarray
    tau: np.ndarray
    qdd: np.ndarray
    base_wrench: np.ndarray

    @property
    def n(self) -> int:
        return self.tau.shape[0]


@dataclass(frozen=True)
class GroupFailure:
    """Placeholder for a batch group whose evaluation raised."""

    index: int
    error_type: str
    message: str


def relative_error(value: np.ndarray, reference: np.ndarray) -> float:
    """||value - reference||_inf / max(1, ||reference||_inf)."""
    value = np.asarray(value, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if value.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(reference))))
    return float(np.max(np.abs(value - reference))) / scale


# ---------------------------------------------------------------------------
# Bias forces and the nine quadratic terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BiasQuadratics:
    """Q = (w x v, w1^2, w1 w2, w1 w3, w2^2, w2 w3, w3^2) of a twist V = (v, w)."""

    Q: np.ndarray


_UNIQUE = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


def _symmetric_maps():
    """vec(W) (row-major) from the six unique entries of a symmetric W, and back."""
    expand = np.zeros((9, 6))
    select = np.zeros((6, 9))
    for k, (r, c) in enumerate(_UNIQUE):
        expand[3 * r + c, k] = 1.0
        expand[3 * c + r, k] = 1.0
        select[k, 3 * r + c] = 1.0
    return expand, select


_EXPAND, _SELECT = _symmetric_maps()
_VEC_EYE = np.eye(3).reshape(9)
_LEVI_CIVITA = np.zeros((3, 3, 3))
_LEVI_CIVITA[0, 1, 2] = _LEVI_CIVITA[1, 2, 0] = _LEVI_CIVITA[2, 0, 1] = 1.0
_LEVI_CIVITA[0, 2, 1] = _LEVI_CIVITA[2, 1, 0] = _LEVI_CIVITA[1, 0, 2] = -1.0


def quadratic_terms(V: Union[TwistVector, np.ndarray]) -> BiasQuadratics:
    V = V.as_array() if isinstance(V, TwistVector) else np.asarray(V, dtype=np.float64)
    v, w = V[:3], V[3:]
    Q = np.empty(9)
    Q[:3] = np.cross(w, v)
    Q[3:] = [w[0] * w[0], w[0] * w[1], w[0] * w[2], w[1] * w[1], w[1] * w[2], w[2] * w[2]]
    return BiasQuadratics(Q)


def gyroscopic_map(J: Union[SpatialInertia, np.ndarray]) -> np.ndarray:
    """
    6x9 matrix B with -ad_V^T (J V) = B Q(V).

    Only nine of the 21 quadratic monomials of V appear in the gyroscopic
    force, so the bias force is linear in (V', Q).
    """
    J = J.matrix if isinstance(J, SpatialInertia) else np.asarray(J, dtype=np.float64)
    h = unskew(J[3:, :3])  # mass * com
    origin_inertia = J[3:, 3:]
    B = np.zeros((6, 9))
    B[:3, :3] = J[:3, :3]
    B[:3, 3:] = (np.kron(_EYE3, h[None, :]) - np.outer(h, _VEC_EYE)) @ _EXPAND
    B[3:, :3] = J[3:, :3]
    B[3:, 3:] = np.einsum('ijk,kl->ijl', _LEVI_CIVITA, origin_inertia).reshape(3, 9) @ _EXPAND
    return B


def bias_force(J: Union[SpatialInertia, np.ndarray], V, Vdot) -> WrenchVector:
    """F^ = J V' - ad_V^T (J V)."""
    J = J.matrix if isinstance(J, SpatialInertia) else np.asarray(J, dtype=np.float64)
    V = V.as_array() if isinstance(V, TwistVector) else np.asarray(V, dtype=np.float64)
    Vdot = Vdot.as_array() if isinstance(Vdot, TwistVector) else np.asarray(Vdot, dtype=np.float64)
    return WrenchVector.from_array(_bias_forces(J[None], V[None], Vdot[None])[0])


def bias_force_from_quadratics(J: Union[SpatialInertia, np.ndarray], Vdot, quadratics: BiasQuadratics) -> WrenchVector:
    """Same wrench as bias_force, evaluated as J V' + B Q."""
    J = J.matrix if isinstance(J, SpatialInertia) else np.asarray(J, dtype=np.float64)
    Vdot = Vdot.as_array() if isinstance(Vdot, TwistVector) else np.asarray(Vdot, dtype=np.float64)
    return WrenchVector.from_array(J @ Vdot + gyroscopic_map(J) @ quadratics.Q)


def _bias_forces(inertias: np.ndarray, V: np.ndarray, Vdot: np.ndarray) -> np.ndarray:
    momentum = np.einsum('nij,nj->ni', inertias, V)
    v, w = V[:, :3], V[:, 3:]
    f, m = momentum[:, :3], momentum[:, 3:]
    gyro = np.empty_like(momentum)
    gyro[:, :3] = np.cross(w, f)
    gyro[:, 3:] = np.cross(v, f) + np.cross(w, m)
    return np.einsum('nij,nj->ni', inertias, Vdot) + gyro


# ---------------------------------------------------------------------------
# Semigroup operands
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwistOperand:
    """(g, xi) with (g, xi) (+) (g', xi') = (g g', Ad_g xi' + xi)."""

    rotation: np.ndarray
    translation: np.ndarray
    twist: np.ndarray


def combine_twist(a: TwistOperand, b: TwistOperand) -> TwistOperand:
    return TwistOperand(
        a.rotation @ b.rotation,
        a.rotation @ b.translation + a.translation,
        apply_adjoint(a.rotation, a.translation, b.twist) + a.twist,
    )


@dataclass(frozen=True, eq=False)
class VelAccOperand:
    """
    Element (g, xi1, xi2) of SE(3) x se(3) x se(3).

    For link i it holds g = f_{i-1,i}^-1, xi1 = S_i q''_i, xi2 = S_i q'_i; g is
    stored as its rotation and translation arrays.
    """

    rotation: np.ndarray
    translation: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray

    @classmethod
    def from_parts(cls, g: RigidTransform, xi1, xi2) -> 'VelAccOperand':
        xi1 = xi1.as_array() if isinstance(xi1, TwistVector) else np.asarray(xi1, dtype=np.float64)
        xi2 = xi2.as_array() if isinstance(xi2, TwistVector) else np.asarray(xi2, dtype=np.float64)
        return cls(np.array(g.rotation), np.array(g.translation), xi1, xi2)

    @property
    def g(self) -> RigidTransform:
        return RigidTransform(self.rotation, self.translation)


def combine_velacc(a: VelAccOperand, b: VelAccOperand) -> VelAccOperand:
    """(g g', Ad_g xi1' + xi1 - ad_{xi2} Ad_g xi2', Ad_g xi2' + xi2)."""
    moved1 = apply_adjoint(a.rotation, a.translation, b.xi1)
    moved2 = apply_adjoint(a.rotation, a.translation, b.xi2)
    return VelAccOperand(
        a.rotation @ b.rotation,
        a.rotation @ b.translation + a.translation,
        moved1 + a.xi1 - ad_apply(a.xi2, moved2),
        moved2 + a.xi2,
    )


def identity_velacc() -> VelAccOperand:
    return VelAccOperand(np.eye(3), np.zeros(3), np.zeros(6), np.zeros(6))


def inverse_velacc(a: VelAccOperand) -> VelAccOperand:
    """(g^-1, -Ad_{g^-1} xi1, -Ad_{g^-1} xi2)."""
    rt = a.rotation.T
    pt = -rt @ a.translation
    return VelAccOperand(rt, pt, -apply_adjoint(rt, pt, a.xi1), -apply_adjoint(rt, pt, a.xi2))


def lift_velacc(a: VelAccOperand) -> np.ndarray:
    """13x13 matrix [[Ad_g, -ad_{xi2} Ad_g, xi1], [0, Ad_g, xi2], [0, 0, 1]]."""
    ad_g = adjoint_matrix(a.rotation, a.translation)
    lift = np.zeros((13, 13))
    lift[:6, :6] = ad_g
    lift[:6, 6:12] = -ad_matrix(a.xi2) @ ad_g
    lift[6:12, 6:12] = ad_g
    lift[:6, 12] = a.xi1
    lift[6:12, 12] = a.xi2
    lift[12, 12] = 1.0
    return lift


@dataclass(frozen=True, eq=False)
class WrenchTorqueOperand:
    """
    Affine map (F, tau) -> (linear F + offset, torque_row . F + torque_offset).

    Homogeneous 8x8 lift [[linear, 0, offset], [torque_row^T, 0, torque_offset], [0, 0, 1]];
    the previous torque never feeds forward, which keeps the column of zeros.
    """

    linear: np.ndarray
    torque_row: np.ndarray
    offset: np.ndarray
    torque_offset: float = 0.0

    @classmethod
    def constant(cls, wrench: np.ndarray, torque: float = 0.0) -> 'WrenchTorqueOperand':
        return cls(np.zeros((6, 6)), np.zeros(6), np.asarray(wrench, dtype=np.float64), float(torque))

    def compose(self, other: 'WrenchTorqueOperand') -> 'WrenchTorqueOperand':
        """self o other, so that lift(a.compose(b)) = lift(a) @ lift(b)."""
        return WrenchTorqueOperand(
            self.linear @ other.linear,
            other.linear.T @ self.torque_row,
            self.linear @ other.offset + self.offset,
            float(self.torque_row @ other.offset) + self.torque_offset,
        )

    def lift(self) -> np.ndarray:
        lift = np.zeros((8, 8))
        lift[:6, :6] = self.linear
        lift[:6, 7] = self.offset
        lift[6, :6] = self.torque_row
        lift[6, 7] = self.torque_offset
        lift[7, 7] = 1.0
        return lift


TWIST_SEMIGROUP = Semigroup(
    combine_twist, TwistOperand(np.eye(3), np.zeros(3), np.zeros(6)), "se3_twist")
VELACC_SEMIGROUP = Semigroup(combine_velacc, identity_velacc(), "velacc")
WRENCH_SEMIGROUP = Semigroup(
    lambda a, b: a.compose(b),
    WrenchTorqueOperand(np.eye(6), np.zeros(6), np.zeros(6), 0.0),
    "wrench_torque",
)
SYNC_DIM = 27
SYNC_SEMIGROUP = affine_semigroup(SYNC_DIM)

# Layout of the synchronous state [V', Q, V, F^]
_SYNC_VDOT = slice(0, 6)
_SYNC_Q = slice(6, 15)
_SYNC_V = slice(15, 21)
_SYNC_FHAT = slice(21, 27)


def _apply_hook(hook: Optional[OperandHook], stage: str, items: List[Any]) -> List[Any]:
    if hook is None:
        return items
    return hook(stage, items)


# ---------------------------------------------------------------------------
# Recursive Newton-Euler
# ---------------------------------------------------------------------------

def id_recursive(model: ChainModel, state: DynamicsInput) -> DynamicsResult:
    """Two-phase recursion: forward for V_i, V'_i, backward for F_i, then tau_i = S_i^T F_i."""
    state.check_against(model)
    n = model.n
    tf = link_transforms(model, state.q)
    S = model.joint_twists

    V = np.empty((n, 6))
    Vdot = np.empty((n, 6))
    v_prev, a_prev = state.base_velocity, state.base_acceleration
    for i in range(n):
        rg, pg = tf.inv_rotations[i], tf.inv_translations[i]
        s_qd = S[i] * state.qd[i]
        moved = apply_adjoint(rg, pg, v_prev)
        V[i] = moved + s_qd
        Vdot[i] = S[i] * state.qdd[i] + apply_adjoint(rg, pg, a_prev) - ad_apply(s_qd, moved)
        v_prev, a_prev = V[i], Vdot[i]

    Fhat = _bias_forces(model.inertias, V, Vdot)
    F = np.empty((n, 6))
    tau = np.empty(n)
    wrench = state.tip_force
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            wrench = _transfer_wrench(tf, i + 1, wrench)
        F[i] = wrench + Fhat[i]
        tau[i] = S[i] @ F[i]
        wrench = F[i]
    base_wrench = _transfer_wrench(tf, 0, F[0])
    return DynamicsResult(V, Vdot, F, tau, np.array(state.qdd), base_wrench)


def _transfer_wrench(tf: LinkTransforms, index: int, wrench: np.ndarray) -> np.ndarray:
    """Ad_{g}^T F for g = f_{index-1,index}^-1 (array index of the child link)."""
    rotation = tf.rotations[index]
    translation = tf.inv_translations[index]
    f = wrench[:3]
    out = np.empty(6)
    out[:3] = rotation @ f
    out[3:] = rotation @ (wrench[3:] - np.cross(translation, f))
    return out


# ---------------------------------------------------------------------------
# Scan pipelines
# ---------------------------------------------------------------------------

def _force_scan(model: ChainModel, tf: LinkTransforms, Fhat: np.ndarray, tip_force: np.ndarray,
                plan: ScanPlan, hook: Optional[OperandHook], stats: Optional[ScanStats]):
    """Backward scan for F_i, tau_{i+1}; operand i (0..n) maps (F_{i+1}, tau_{i+2}) to (F_i, tau_{i+1})."""
    n = model.n
    S = model.joint_twists
    items = []
    for i in range(n + 1):
        if i < n:
            linear = adjoint_matrix(tf.inv_rotations[i], tf.inv_translations[i]).T
            items.append(WrenchTorqueOperand(linear, S[i], Fhat[i - 1] if i > 0 else _ZERO6))
        else:
            items.append(WrenchTorqueOperand(np.eye(6), _ZERO6, Fhat[n - 1]))
    items.append(WrenchTorqueOperand.constant(tip_force))
    items = _apply_hook(hook, 'force', items)

    scanned = inclusive_scan(items, WRENCH_SEMIGROUP.opposite(), plan.backward(), stats)
    F = np.array([scanned[i].offset for i in range(1, n + 1)])
    tau = np.array([scanned[i].torque_offset for i in range(n)])
    return F, tau, np.array(scanned[0].offset)


def scan_motion(model: ChainModel, state: DynamicsInput, plan: ScanPlan,
                operand_hook: Optional[OperandHook] = None, stats: Optional[ScanStats] = None):
    """
    Stages 1-4 of the split pipeline.

    Returns:
        (transforms, V, Vdot, Fhat) with one row per link
    """
    n = model.n
    forward = plan.forward()
    tf = link_transforms(model, state.q)
    S = model.joint_twists
    s_qd = S * state.qd[:, None]
    s_qdd = S * state.qdd[:, None]

    items = [TwistOperand(_EYE3, _ZERO3, state.base_velocity)]
    items += [TwistOperand(tf.inv_rotations[i], tf.inv_translations[i], s_qd[i]) for i in range(n)]
    items = _apply_hook(operand_hook, 'velocity', items)
    scanned = inclusive_scan(items, TWIST_SEMIGROUP.opposite(), forward, stats)
    V_all = np.array([op.twist for op in scanned])

    items = [TwistOperand(_EYE3, _ZERO3, state.base_acceleration)]
    for i in range(n):
        rg, pg = tf.inv_rotations[i], tf.inv_translations[i]
        coriolis = ad_apply(s_qd[i], apply_adjoint(rg, pg, V_all[i]))
        items.append(TwistOperand(rg, pg, s_qdd[i] - coriolis))
    items = _apply_hook(operand_hook, 'acceleration', items)
    scanned = inclusive_scan(items, TWIST_SEMIGROUP.opposite(), forward, stats)
    Vdot = np.array([op.twist for op in scanned[1:]])
    V = V_all[1:]
    return tf, V, Vdot, _bias_forces(model.inertias, V, Vdot)


def id_scan(model: ChainModel, state: DynamicsInput, plan: Optional[ScanPlan] = None,
            operand_hook: Optional[OperandHook] = None,
            stats: Optional[ScanStats] = None) -> DynamicsResult:
    """Split pipeline: velocity scan, acceleration scan, bias map, backward force scan."""
    plan = plan or ScanPlan.sequential()
    state.check_against(model)
    tf, V, Vdot, Fhat = scan_motion(model, state, plan, operand_hook, stats)
    F, tau, base_wrench = _force_scan(model, tf, Fhat, state.tip_force, plan, operand_hook, stats)
    logger.debug(f"id_scan n={model.n} strategy={plan.strategy.value} workers={plan.worker_count}")
    return DynamicsResult(V, Vdot, F, tau, np.array(state.qdd), base_wrench)


def synchronous_operand(rotation: np.ndarray, translation: np.ndarray, joint_twist: np.ndarray,
                        qd: float, qdd: float, inertia: np.ndarray) -> AffineOperand:
    """
    Affine map from the state [V'_{i-1}, Q_{i-1}, V_{i-1}, F^_{i-1}] of one link to the next.

    (rotation, translation) is g_i = f_{i-1,i}^-1. Q_i is quadratic in V_i but, since
    V_i is affine in V_{i-1}, it is affine in (Q_{i-1}, V_{i-1}); F^_i = J V'_i + B Q_i
    then only depends on the new state.
    """
    R, p = rotation, translation
    s_qd = joint_twist * qd
    b, a = s_qd[:3], s_qd[3:]
    ad_g = adjoint_matrix(R, p)
    a_hat = skew(a)
    linear = np.zeros((SYNC_DIM, SYNC_DIM))
    offset = np.zeros(SYNC_DIM)

    linear[_SYNC_VDOT, _SYNC_VDOT] = ad_g
    linear[_SYNC_VDOT, _SYNC_V] = -ad_matrix(s_qd) @ ad_g
    offset[_SYNC_VDOT] = joint_twist * qdd

    linear[_SYNC_V, _SYNC_V] = ad_g
    offset[_SYNC_V] = s_qd

    # Q rows: cross part c = w x v, moment part m = unique entries of w w^T
    q_cross = slice(6, 9)
    q_moment = slice(9, 15)
    v_cols = slice(15, 18)
    w_cols = slice(18, 21)
    rtp = R.T @ p
    linear[q_cross, q_cross] = R
    linear[q_cross, q_moment] = (np.outer(p, _VEC_EYE) - np.kron(R, rtp[None, :])) @ _EXPAND
    linear[q_cross, v_cols] = a_hat @ R
    linear[q_cross, w_cols] = (-skew(b) + a_hat @ skew(p)) @ R
    offset[q_cross] = np.cross(a, b)

    linear[q_moment, q_moment] = _SELECT @ np.kron(R, R) @ _EXPAND
    linear[q_moment, w_cols] = _SELECT @ (np.kron(R, a[:, None]) + np.kron(a[:, None], R))
    offset[q_moment] = _SELECT @ np.outer(a, a).reshape(9)

    gyro = gyroscopic_map(inertia)
    linear[_SYNC_FHAT] = inertia @ linear[_SYNC_VDOT] + gyro @ linear[_SYNC_Q]
    offset[_SYNC_FHAT] = inertia @ offset[_SYNC_VDOT] + gyro @ offset[_SYNC_Q]
    return AffineOperand(linear, offset)


def lift_synchronous(rotation: np.ndarray, translation: np.ndarray, joint_twist: np.ndarray,
                     qd: float, qdd: float, inertia: np.ndarray) -> np.ndarray:
    """28x28 homogeneous matrix of synchronous_operand."""
    return synchronous_operand(rotation, translation, joint_twist, qd, qdd, inertia).lift()


def id_scan_fused(model: ChainModel, state: DynamicsInput, plan: Optional[ScanPlan] = None,
                  synchronous_bias: bool = False, operand_hook: Optional[OperandHook] = None,
                  stats: Optional[ScanStats] = None) -> DynamicsResult:
    """
    One forward scan for velocities and accelerations, then the backward force scan.

    With synchronous_bias the forward scan runs on 27-dimensional affine operands
    that also produce the bias forces; otherwise on VelAccOperand triples.
    """
    plan = plan or ScanPlan.sequential()
    state.check_against(model)
    n = model.n
    forward = plan.forward()
    tf = link_transforms(model, state.q)
    S = model.joint_twists

    if synchronous_bias:
        seed = np.zeros(SYNC_DIM)
        seed[_SYNC_VDOT] = state.base_acceleration
        seed[_SYNC_Q] = quadratic_terms(state.base_velocity).Q
        seed[_SYNC_V] = state.base_velocity
        items = [AffineOperand.constant(seed)]
        items += [
            synchronous_operand(tf.inv_rotations[i], tf.inv_translations[i], S[i],
                                state.qd[i], state.qdd[i], model.inertias[i])
            for i in range(n)
        ]
        items = _apply_hook(operand_hook, 'synchronous', items)
        scanned = inclusive_scan(items, SYNC_SEMIGROUP.opposite(), forward, stats)
        states = np.array([op.offset for op in scanned[1:]])
        V, Vdot, Fhat = states[:, _SYNC_V], states[:, _SYNC_VDOT], states[:, _SYNC_FHAT]
    else:
        items = [VelAccOperand(_EYE3, _ZERO3, state.base_acceleration, state.base_velocity)]
        items += [
            VelAccOperand(tf.inv_rotations[i], tf.inv_translations[i], S[i] * state.qdd[i], S[i] * state.qd[i])
            for i in range(n)
        ]
        items = _apply_hook(operand_hook, 'velacc', items)
        scanned = inclusive_scan(items, VELACC_SEMIGROUP.opposite(), forward, stats)
        V = np.array([op.xi2 for op in scanned[1:]])
        Vdot = np.array([op.xi1 for op in scanned[1:]])
        Fhat = _bias_forces(model.inertias, V, Vdot)

    F, tau, base_wrench = _force_scan(model, tf, Fhat, state.tip_force, plan, operand_hook, stats)
    return DynamicsResult(np.array(V), np.array(Vdot), F, tau, np.array(state.qdd), base_wrench)


def inverse_dynamics(model: ChainModel, state: DynamicsInput, algo: str = 'recursive',
                     plan: Optional[ScanPlan] = None, operand_hook: Optional[OperandHook] = None,
                     stats: Optional[ScanStats] = None) -> DynamicsResult:
    """Dispatch to one of ID_ALGORITHMS."""
    if algo == 'recursive':
        return id_recursive(model, state)
    if algo == 'scan':
        return id_scan(model, state, plan, operand_hook, stats)
    if algo == 'scan_fused':
        return id_scan_fused(model, state, plan, False, operand_hook, stats)
    if algo == 'scan_synchronous':
        return id_scan_fused(model, state, plan, True, operand_hook, stats)
    raise ValueError(f"unknown inverse dynamics algorithm {algo!r}; choose from {', '.join(ID_ALGORITHMS)}")


# ---------------------------------------------------------------------------
# Batches of independent groups
# ---------------------------------------------------------------------------

def _run_group(task: Callable, index: int, model: ChainModel, state: DynamicsInput, algo: str, plan: ScanPlan):
    try:
        return task(model, state, algo, plan)
    except Exception as e:
        return GroupFailure(index, type(e).__name__, str(e))


def _id_task(model: ChainModel, state: DynamicsInput, algo: str, plan: ScanPlan) -> DynamicsResult:
    return inverse_dynamics(model, state, algo, plan)


def run_groups(task: Callable, models: Union[ChainModel, Sequence[ChainModel]],
               inputs: Sequence[DynamicsInput], algo: str, plan: ScanPlan) -> List[Any]:
    """
    Evaluate independent groups, fanning out over a process pool when the plan has
    more than one worker. Each group runs with a single-worker copy of the plan.

    Failing groups yield a GroupFailure at their index; the others are unaffected.
    """
    inputs = list(inputs)
    if not inputs:
        return []
    if isinstance(models, ChainModel):
        models = [models] * len(inputs)
    else:
        models = list(models)
        if len(models) != len(inputs):
            raise DimensionMismatchError(f"{len(models)} models for {len(inputs)} inputs")

    inner_plan = plan.with_workers(1)
    tasks = [(task, i, models[i], inputs[i], algo, inner_plan) for i in range(len(inputs))]
    if plan.worker_count == 1 or len(tasks) == 1:
        results = [_run_group(*t) for t in tasks]
    else:
        chunksize = max(1, len(tasks) // (4 * plan.worker_count))
        logger.debug(f"Batch of {len(tasks)} groups over {plan.worker_count} processes (chunksize {chunksize})")
        with multiprocessing.Pool(processes=plan.worker_count) as pool:
            results = pool.starmap(_run_group, tasks, chunksize=chunksize)

    failures = [r for r in results if isinstance(r, GroupFailure)]
    if failures:
        logger.warning(f"⚠️ {len(failures)} of {len(results)} groups failed; first: "
                       f"#{failures[0].index} {failures[0].error_type}: {failures[0].message}")
    return results


def id_batch(models: Union[ChainModel, Sequence[ChainModel]], inputs: Sequence[DynamicsInput],
             plan: Optional[ScanPlan] = None, algo: str = 'scan') -> List[Union[DynamicsResult, GroupFailure]]:
    """Inverse dynamics for many independent groups; output order matches input order."""
    if algo not in ID_ALGORITHMS:
        raise ValueError(f"unknown inverse dynamics algorithm {algo!r}")
    return run_groups(_id_task, models, inputs, algo, plan or ScanPlan.sequential())
