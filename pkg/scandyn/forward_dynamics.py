"""
Forward Dynamics
================

Joint accelerations from applied torques for a serial chain.

JSIIA: q'' = M(q)^-1 (tau - tau_bias). The bias torque and the n columns of the
joint space inertia are n + 1 independent inverse dynamics calls evaluated as one
batch; the SPD system is solved with a Cholesky factorization.

ABIA: the articulated-body inertias are a nonlinear backward recursion and stay
serial. Everything downstream of them is linear in the joint quantities and runs
as two affine scans:
- backward over (z^_i, c^_{i+1}) with operands built from Y_{i,i+1}, Pi_{i,i+1}, Omega_{i+1}
- forward over (lambda_i, q''_i) with operands built from the transposes

The merged variant folds the backward force/torque scan of the bias pass and the
(z^, c^) scan into one 14-dimensional affine scan.

Author: Dynamics Engineering Team
Created: October 2026
"""

import logging
from dataclasses import dataclass, replace
from multiprocessing.pool import ThreadPool
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, ldl

from scandyn.config import EPS_PIVOT
from scandyn.exceptions import SingularInertiaError
from scandyn.inverse_dynamics import (
    GroupFailure,
    OperandHook,
    id_recursive,
    inverse_dynamics,
    run_groups,
    scan_motion,
)
from scandyn.robot_model import ChainModel, DynamicsInput, LinkTransforms, link_transforms
from scandyn.scan_engine import AffineOperand, ScanPlan, ScanStats, affine_semigroup, inclusive_scan
from scandyn.se3_core import adjoint_matrix

logger = logging.getLogger(__name__)

FD_ALGORITHMS = ('jsiia', 'abia', 'abia_merged', 'abia_recursive')

SYMMETRY_WARN_TOL = 1e-8

ABIA_SEMIGROUP = affine_semigroup(7)
MERGED_DIM = 14
MERGED_SEMIGROUP = affine_semigroup(MERGED_DIM)

# Merged state (F_{i-1}, tau^_i, z^_i, c^_{i+1}) plus the homogeneous coordinate
_M_F = slice(0, 6)
_M_TAU = 6
_M_Z = slice(7, 13)
_M_C = 13


def _merged_sparsity() -> np.ndarray:
    mask = np.zeros((MERGED_DIM + 1, MERGED_DIM + 1), dtype=bool)
    mask[_M_F, _M_F] = True
    mask[_M_TAU, _M_F] = True
    mask[7:14, 0:13] = True
    mask[:, MERGED_DIM] = True
    return mask


# Entries of a merged-operand lift that may be nonzero; closed under products
MERGED_SPARSITY = _merged_sparsity()
MERGED_SPARSITY.flags.writeable = False


@dataclass(frozen=True, eq=False)
class FdResult:
    qdd: np.ndarray


@dataclass(frozen=True, eq=False)
class JointSpaceInertia:
    """Joint space inertia M(q), n x n."""

    M: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def symmetry_error(self) -> float:
        scale = max(1.0, float(np.linalg.norm(self.M)))
        return float(np.linalg.norm(self.M - self.M.T)) / scale

    def factor(self):
        """
        Cholesky factor of the symmetric part of M, for cho_solve.

        Raises:
            SingularInertiaError: M is not positive definite; carries the smallest pivot
        """
        M = 0.5 * (self.M + self.M.T)
        try:
            return cho_factor(M, lower=True)
        except LinAlgError:
            _, d, _ = ldl(M, lower=True)
            pivot = float(np.min(np.linalg.eigvalsh(d)))
            logger.error(f"❌ Joint space inertia is not positive definite (smallest pivot {pivot:.3g})")
            raise SingularInertiaError(
                f"joint space inertia is not positive definite: smallest pivot {pivot:.6g}", pivot=pivot)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self.factor(), rhs)


@dataclass(frozen=True, eq=False)
class ArticulatedInertiaSet:
    """J^_i for links 1..n (row i-1)."""

    Jhat: np.ndarray

    def __len__(self) -> int:
        return self.Jhat.shape[0]


@dataclass(frozen=True, eq=False)
class AbiaIntermediates:
    """
    Everything the ABIA scans produce.

    Per-link arrays (length n, row k for link k+1): Omega, chat, c, tau_diff, qdd.
    Y[k] and Pi[k] are Y_{k,k+1} and Pi_{k,k+1}. zhat and lam have n + 1 rows for
    indices 0..n, with zhat[n] = 0 and lam[0] = 0.
    """

    Y: np.ndarray
    Pi: np.ndarray
    Omega: np.ndarray
    zhat: np.ndarray
    chat: np.ndarray
    c: np.ndarray
    lam: np.ndarray
    tau_diff: np.ndarray
    qdd: np.ndarray


def _check_input(model: ChainModel, state: DynamicsInput) -> None:
    state.check_against(model, need_torques=True)


def _bias_input(state: DynamicsInput) -> DynamicsInput:
    return replace(state, qdd=np.zeros(state.n), applied_torques=None)


def _evaluate_all(model: ChainModel, inputs: List[DynamicsInput], id_algo: str, plan: ScanPlan,
                  operand_hook: Optional[OperandHook] = None):
    """Independent ID calls of one FD evaluation; threads when the plan has workers."""
    inner = plan.with_workers(1)

    def evaluate(state):
        return inverse_dynamics(model, state, id_algo, inner, operand_hook)

    if plan.worker_count == 1 or len(inputs) == 1:
        return [evaluate(state) for state in inputs]
    with ThreadPool(min(plan.worker_count, len(inputs))) as pool:
        return pool.map(evaluate, inputs)


# ---------------------------------------------------------------------------
# JSIIA
# ---------------------------------------------------------------------------

def bias_torque(model: ChainModel, state: DynamicsInput, plan: Optional[ScanPlan] = None,
                id_algo: str = 'scan', operand_hook: Optional[OperandHook] = None) -> np.ndarray:
    """tau_bias = ID(q, q', 0, V_0, V'_0, F_{n+1})."""
    state.check_against(model)
    return inverse_dynamics(model, _bias_input(state), id_algo, plan or ScanPlan.sequential(), operand_hook).tau


def _column_inputs(model: ChainModel, q: np.ndarray) -> List[DynamicsInput]:
    n = model.n
    zeros = np.zeros(n)
    return [DynamicsInput(q, zeros, np.eye(n)[j], np.zeros(6), np.zeros(6), np.zeros(6)) for j in range(n)]


def _assemble_jsi(columns) -> JointSpaceInertia:
    M = np.column_stack([result.tau for result in columns])
    jsi = JointSpaceInertia(M)
    asymmetry = jsi.symmetry_error()
    if asymmetry > SYMMETRY_WARN_TOL:
        logger.warning(f"⚠️ Joint space inertia asymmetric by {asymmetry:.3g}; solving with its symmetric part")
    return jsi


def jsi_columns(model: ChainModel, q: np.ndarray, plan: Optional[ScanPlan] = None,
                id_algo: str = 'scan') -> JointSpaceInertia:
    """Column j of M(q) is ID(q, 0, e_j, 0, 0, 0)."""
    q = np.asarray(q, dtype=np.float64)
    return _assemble_jsi(_evaluate_all(model, _column_inputs(model, q), id_algo, plan or ScanPlan.sequential()))


joint_space_inertia = jsi_columns


def fd_jsiia(model: ChainModel, state: DynamicsInput, plan: Optional[ScanPlan] = None,
             id_algo: str = 'scan', operand_hook: Optional[OperandHook] = None) -> FdResult:
    """q'' = M^-1 (tau - tau_bias); bias and columns evaluated as one batch of n + 1 ID calls."""
    plan = plan or ScanPlan.sequential()
    _check_input(model, state)
    inputs = [_bias_input(state)] + _column_inputs(model, state.q)
    results = _evaluate_all(model, inputs, id_algo, plan, operand_hook)
    jsi = _assemble_jsi(results[1:])
    return FdResult(jsi.solve(state.applied_torques - results[0].tau))


# ---------------------------------------------------------------------------
# ABIA
# ---------------------------------------------------------------------------

def abi_recursion(model: ChainModel, q: np.ndarray,
                  transforms: Optional[LinkTransforms] = None) -> ArticulatedInertiaSet:
    """
    J^_n = J_n; J^_i = J_i + A^T (J^ - J^ S S^T J^ / Omega) A with A = Ad_{g_{i+1}}
    and J^, S, Omega of link i + 1. Each step is re-symmetrized.

    Raises:
        SingularInertiaError: Omega_{i+1} <= EPS_PIVOT
    """
    tf = transforms or link_transforms(model, q)
    n = model.n
    S = model.joint_twists
    Jhat = np.empty((n, 6, 6))
    Jhat[n - 1] = model.inertias[n - 1]
    for k in range(n - 2, -1, -1):
        child = Jhat[k + 1]
        js = child @ S[k + 1]
        omega = float(S[k + 1] @ js)
        if omega <= EPS_PIVOT:
            raise SingularInertiaError(
                f"articulated inertia singular at link {k + 2}: Omega = {omega:.3g}", link_index=k + 2, pivot=omega)
        A = adjoint_matrix(tf.inv_rotations[k + 1], tf.inv_translations[k + 1])
        value = model.inertias[k] + A.T @ (child - np.outer(js, js) / omega) @ A
        Jhat[k] = 0.5 * (value + value.T)
    return ArticulatedInertiaSet(Jhat)


def _propagation_terms(model: ChainModel, tf: LinkTransforms, abi: ArticulatedInertiaSet):
    """Omega_i, Pi_{i-1,i}, Y_{i-1,i} for every link (parallel map)."""
    S = model.joint_twists
    js = np.einsum('nij,nj->ni', abi.Jhat, S)
    omega = np.einsum('ni,ni->n', S, js)
    bad = np.nonzero(omega <= EPS_PIVOT)[0]
    if bad.size:
        k = int(bad[0])
        raise SingularInertiaError(
            f"articulated inertia singular at link {k + 1}: Omega = {omega[k]:.3g}", link_index=k + 1, pivot=float(omega[k]))
    A = np.array([adjoint_matrix(r, p) for r, p in zip(tf.inv_rotations, tf.inv_translations)])
    At = np.transpose(A, (0, 2, 1))
    Pi = np.einsum('nij,nj->ni', At, js) / omega[:, None]
    projector = np.eye(6)[None] - np.einsum('ni,nj->nij', js, S) / omega[:, None, None]
    Y = At @ projector
    return omega, Pi, Y


def _backward_operands(model: ChainModel, omega, Pi, Y, tau_diff) -> List[AffineOperand]:
    """Operand i (0..n) maps (z^_{i+1}, c^_{i+2}) to (z^_i, c^_{i+1}); operand n is zero."""
    n = model.n
    S = model.joint_twists
    items = []
    for i in range(n):
        linear = np.zeros((7, 7))
        offset = np.zeros(7)
        linear[:6, :6] = Y[i]
        linear[6, :6] = -S[i] / omega[i]
        offset[:6] = Pi[i] * tau_diff[i]
        offset[6] = tau_diff[i] / omega[i]
        items.append(AffineOperand(linear, offset))
    items.append(AffineOperand.constant(np.zeros(7)))
    return items


def _forward_operands(model: ChainModel, Pi, Y, chat) -> List[AffineOperand]:
    """Operand i (1..n) maps (lambda_{i-1}, q''_{i-1}) to (lambda_i, q''_i)."""
    S = model.joint_twists
    items = []
    for k in range(model.n):
        linear = np.zeros((7, 7))
        offset = np.zeros(7)
        linear[:6, :6] = Y[k].T
        linear[6, :6] = -Pi[k]
        offset[:6] = S[k] * chat[k]
        offset[6] = chat[k]
        items.append(AffineOperand(linear, offset))
    return items


def _forward_scan(model: ChainModel, Pi, Y, chat, plan: ScanPlan, hook: Optional[OperandHook],
                  stats: Optional[ScanStats]):
    items = [AffineOperand.constant(np.zeros(7))] + _forward_operands(model, Pi, Y, chat)
    if hook is not None:
        items = hook('abi_forward', items)
    scanned = inclusive_scan(items, ABIA_SEMIGROUP.opposite(), plan.forward(), stats)
    states = np.array([op.offset for op in scanned])
    return states[:, :6], states[1:, 6]


def _chat_map(model: ChainModel, omega, zhat, tau_diff):
    c = tau_diff - np.einsum('ni,ni->n', model.joint_twists, zhat[1:])
    return c / omega, c


def _run_concurrently(plan: ScanPlan, first, second):
    """Two data-independent tasks; joined before returning."""
    if plan.worker_count == 1:
        return first(), second()
    with ThreadPool(2) as pool:
        a = pool.apply_async(first)
        b = pool.apply_async(second)
        return a.get(), b.get()


def abia_intermediates(model: ChainModel, state: DynamicsInput, plan: Optional[ScanPlan] = None,
                       merged: bool = False, operand_hook: Optional[OperandHook] = None,
                       stats: Optional[ScanStats] = None) -> AbiaIntermediates:
    """Run the hybrid ABIA pipeline and return every intermediate it produces."""
    plan = plan or ScanPlan.sequential()
    _check_input(model, state)
    n = model.n
    tf = link_transforms(model, state.q)
    bias_state = _bias_input(state)

    def bias_task():
        if merged:
            return scan_motion(model, bias_state, plan, operand_hook, stats)[3]
        return inverse_dynamics(model, bias_state, 'scan', plan, operand_hook, stats).tau

    def abi_task():
        return abi_recursion(model, state.q, tf)

    bias, abi = _run_concurrently(plan, bias_task, abi_task)
    omega, Pi, Y = _propagation_terms(model, tf, abi)

    if merged:
        items = _merged_operands(model, tf, bias, state.applied_torques, omega, Pi, Y, state.tip_force)
        if operand_hook is not None:
            items = operand_hook('merged', items)
        scanned = inclusive_scan(items, MERGED_SEMIGROUP.opposite(), plan.backward(), stats)
        states = np.array([op.offset for op in scanned])
        zhat = states[:n + 1, _M_Z]
        tau_diff = states[1:n + 1, _M_TAU]
    else:
        tau_diff = state.applied_torques - bias
        items = _backward_operands(model, omega, Pi, Y, tau_diff) + [AffineOperand.constant(np.zeros(7))]
        if operand_hook is not None:
            items = operand_hook('abi_backward', items)
        scanned = inclusive_scan(items, ABIA_SEMIGROUP.opposite(), plan.backward(), stats)
        zhat = np.array([op.offset[:6] for op in scanned[:n + 1]])

    chat, c = _chat_map(model, omega, zhat, tau_diff)
    lam, qdd = _forward_scan(model, Pi, Y, chat, plan, operand_hook, stats)
    return AbiaIntermediates(Y, Pi, omega, zhat, chat, c, lam, np.array(tau_diff), qdd)


def fd_abia(model: ChainModel, state: DynamicsInput, plan: Optional[ScanPlan] = None,
            operand_hook: Optional[OperandHook] = None, stats: Optional[ScanStats] = None) -> FdResult:
    """Hybrid ABIA: serial ABI recursion alongside the bias pass, then backward and forward scans."""
    return FdResult(abia_intermediates(model, state, plan, False, operand_hook, stats).qdd)


def _merged_operands(model: ChainModel, tf: LinkTransforms, Fhat: np.ndarray, tau_in: np.ndarray,
                     omega, Pi, Y, tip_force: np.ndarray) -> List[AffineOperand]:
    """
    Operands for elements i = 0..n+1 followed by the seed (F_{n+1}, 0, 0, 0).

    Element i maps (F_i, tau^_{i+1}, z^_{i+1}, c^_{i+2}) to (F_{i-1}, tau^_i, z^_i, c^_{i+1}):
      F_{i-1}   = Ad_{g_i}^T F_i + F^_{i-1}           (bias pass, zero F^_0)
      tau^_i    = tau_in_i - S_i^T F_i
      z^_i      = Pi_{i,i+1} tau^_{i+1} + Y_{i,i+1} z^_{i+1}
      c^_{i+1}  = (tau^_{i+1} - S_{i+1}^T z^_{i+1}) / Omega_{i+1}
    Element 0 has no F or tau^ rows; element n + 1 only moves F_{n+1} onto link n.
    """
    n = model.n
    S = model.joint_twists
    items = []
    for i in range(n + 2):
        linear = np.zeros((MERGED_DIM, MERGED_DIM))
        offset = np.zeros(MERGED_DIM)
        if 1 <= i <= n:
            linear[_M_F, _M_F] = adjoint_matrix(tf.inv_rotations[i - 1], tf.inv_translations[i - 1]).T
            if i >= 2:
                offset[_M_F] = Fhat[i - 2]
            linear[_M_TAU, _M_F] = -S[i - 1]
            offset[_M_TAU] = tau_in[i - 1]
        elif i == n + 1:
            linear[_M_F, _M_F] = np.eye(6)
            offset[_M_F] = Fhat[n - 1]
        if i < n:
            linear[_M_Z, _M_TAU] = Pi[i]
            linear[_M_Z, _M_Z] = Y[i]
            linear[_M_C, _M_TAU] = 1.0 / omega[i]
            linear[_M_C, _M_Z] = -S[i] / omega[i]
        items.append(AffineOperand(linear, offset))
    seed = np.zeros(MERGED_DIM)
    seed[_M_F] = tip_force
    items.append(AffineOperand.constant(seed))
    return items


def fd_abia_merged(model: ChainModel, state: DynamicsInput, plan: Optional[ScanPlan] = None,
                   operand_hook: Optional[OperandHook] = None, stats: Optional[ScanStats] = None) -> FdResult:
    """ABIA with the bias force/torque scan and the (z^, c^) scan merged into one backward scan."""
    return FdResult(abia_intermediates(model, state, plan, True, operand_hook, stats).qdd)


def fd_recursive(model: ChainModel, state: DynamicsInput) -> FdResult:
    """Serial ABIA: the same quantities as fd_abia, propagated with plain loops."""
    _check_input(model, state)
    n = model.n
    S = model.joint_twists
    tf = link_transforms(model, state.q)
    tau_diff = state.applied_torques - id_recursive(model, _bias_input(state)).tau
    abi = abi_recursion(model, state.q, tf)
    omega, Pi, Y = _propagation_terms(model, tf, abi)

    zhat = np.zeros((n + 1, 6))
    for i in range(n - 1, -1, -1):
        zhat[i] = Pi[i] * tau_diff[i] + Y[i] @ zhat[i + 1]
    chat, _ = _chat_map(model, omega, zhat, tau_diff)

    qdd = np.empty(n)
    lam = np.zeros(6)
    for k in range(n):
        qdd[k] = chat[k] - Pi[k] @ lam
        lam = Y[k].T @ lam + S[k] * chat[k]
    return FdResult(qdd)


# ---------------------------------------------------------------------------
# Dispatch, batches and integration
# ---------------------------------------------------------------------------

def forward_dynamics(model: ChainModel, state: DynamicsInput, algo: str = 'abia',
                     plan: Optional[ScanPlan] = None, operand_hook: Optional[OperandHook] = None,
                     stats: Optional[ScanStats] = None) -> FdResult:
    """Dispatch to one of FD_ALGORITHMS."""
    if algo == 'jsiia':
        return fd_jsiia(model, state, plan, operand_hook=operand_hook)
    if algo == 'abia':
        return fd_abia(model, state, plan, operand_hook, stats)
    if algo == 'abia_merged':
        return fd_abia_merged(model, state, plan, operand_hook, stats)
    if algo == 'abia_recursive':
        return fd_recursive(model, state)
    raise ValueError(f"unknown forward dynamics algorithm {algo!r}; choose from {', '.join(FD_ALGORITHMS)}")


def _fd_task(model: ChainModel, state: DynamicsInput, algo: str, plan: ScanPlan) -> FdResult:
    return forward_dynamics(model, state, algo, plan)


def fd_batch(models: Union[ChainModel, Sequence[ChainModel]], inputs: Sequence[DynamicsInput],
             algo: str = 'jsiia', plan: Optional[ScanPlan] = None) -> List[Union[FdResult, GroupFailure]]:
    """Forward dynamics for many independent groups; output order matches input order."""
    if algo not in FD_ALGORITHMS:
        raise ValueError(f"unknown forward dynamics algorithm {algo!r}")
    return run_groups(_fd_task, models, inputs, algo, plan or ScanPlan.sequential())


def integrate_step(model: ChainModel, state: DynamicsInput, dt: float, algo: str = 'abia',
                   plan: Optional[ScanPlan] = None) -> DynamicsInput:
    """Semi-implicit Euler: q' += dt q'', then q += dt q'. The returned qdd is the one used."""
    qdd = forward_dynamics(model, state, algo, plan).qdd
    qd = state.qd + dt * qdd
    return replace(state, q=state.q + dt * qd, qd=qd, qdd=qdd)

