"""
Prefix Scan Engine
==================

Inclusive and exclusive prefix scans over any associative binary operator, run
either as a sequential left fold or as a work-efficient two-sweep scan
(up-sweep / down-sweep) on a fixed binary combine tree.

The combine tree only depends on the number of items, never on the worker count:
worker threads split each tree level into contiguous chunks, so every worker
count produces bit-identical output, and operands are always combined left to
right (safe for non-commutative operators such as matrix products).

Backward scans reverse the items, scan forward and reverse the result.

Author: Dynamics Engineering Team
Created: October 2026
"""

import atexit
import itertools
import logging
import math
import os
import threading
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from multiprocessing.pool import ThreadPool
from typing import Any, Callable, Dict, Generic, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from scandyn.config import PARALLEL_GRAIN
from scandyn.exceptions import ScanError

logger = logging.getLogger(__name__)

E = TypeVar("E")


@dataclass(frozen=True)
class Semigroup(Generic[E]):
    """
    Associative binary operation, optionally with an identity (a monoid).

    combine(left, right) is applied with `left` holding the earlier items.
    """

    combine: Callable[[E, E], E]
    identity: Optional[E] = None
    name: str = "semigroup"

    @property
    def has_identity(self) -> bool:
        return self.identity is not None

    def opposite(self) -> 'Semigroup[E]':
        """Same elements, arguments swapped: for recursions x_i = a_i (+) x_{i-1}."""
        combine = self.combine
        return Semigroup(lambda left, right: combine(right, left), self.identity, f"{self.name}^op")


class ScanStrategy(str, Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"


class ScanDirection(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class ScanPlan:
    """
    How a scan is executed: strategy, worker threads and direction.

    A tree level is split over the worker threads only when it holds at least
    `grain` combines.
    """

    strategy: ScanStrategy = ScanStrategy.SEQUENTIAL
    worker_count: int = 1
    direction: ScanDirection = ScanDirection.FORWARD
    grain: int = PARALLEL_GRAIN

    def __post_init__(self):
        object.__setattr__(self, 'strategy', ScanStrategy(self.strategy))
        object.__setattr__(self, 'direction', ScanDirection(self.direction))
        if not isinstance(self.worker_count, (int, np.integer)) or self.worker_count < 1:
            raise ScanError(f"worker_count must be a positive integer, got {self.worker_count!r}")
        if not isinstance(self.grain, (int, np.integer)) or self.grain < 1:
            raise ScanError(f"grain must be a positive integer, got {self.grain!r}")

    @classmethod
    def sequential(cls) -> 'ScanPlan':
        return cls(ScanStrategy.SEQUENTIAL, 1)

    @classmethod
    def parallel(cls, workers: int = 1, grain: int = PARALLEL_GRAIN) -> 'ScanPlan':
        return cls(ScanStrategy.PARALLEL, workers, grain=grain)

    def forward(self) -> 'ScanPlan':
        return replace(self, direction=ScanDirection.FORWARD)

    def backward(self) -> 'ScanPlan':
        return replace(self, direction=ScanDirection.BACKWARD)

    def with_workers(self, worker_count: int) -> 'ScanPlan':
        return replace(self, worker_count=worker_count)


@dataclass
class ScanStats:
    """Instrumentation filled in by a scan run."""

    stages: int = 0
    combines: int = 0
    parallel_levels: int = 0


@lru_cache(maxsize=256)
def level_schedule(n: int) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
    """
    Fixed combine tree of the work-efficient scan for n items.

    Each level is a tuple of (source, target) pairs meaning
    x[target] = combine(x[source], x[target]); pairs within a level touch
    disjoint targets and read no target of the same level.
    """
    levels = []
    skip = 1
    while 2 * skip - 1 < n:
        levels.append(tuple((i, i + skip) for i in range(skip - 1, n - skip, 2 * skip)))
        skip *= 2
    while skip > 0 and 3 * skip > n:
        skip //= 2
    while skip >= 1:
        levels.append(tuple((i, i + skip) for i in range(2 * skip - 1, n - skip, 2 * skip)))
        skip //= 2
    return tuple(level for level in levels if level)


def depth_counter(n: int, plan: ScanPlan) -> int:
    """Number of sequential combine stages a scan of n items executes under `plan`."""
    if n < 1:
        raise ScanError(f"scan length must be >= 1, got {n}")
    if plan.strategy is ScanStrategy.SEQUENTIAL:
        return n - 1
    return len(level_schedule(n))


def _chunks(pairs: Sequence[Tuple[int, int]], parts: int) -> List[Sequence[Tuple[int, int]]]:
    size = math.ceil(len(pairs) / parts)
    return [pairs[start:start + size] for start in range(0, len(pairs), size)]


_POOLS: Dict[Tuple[int, int], ThreadPool] = {}
_POOLS_LOCK = threading.Lock()


def worker_pool(count: int) -> ThreadPool:
    """
    Thread pool of `count` threads shared by every scan in this process.

    Created on first use and closed at interpreter exit. Pools are keyed by
    process id, so a forked batch worker never reuses its parent's pool.
    """
    key = (os.getpid(), count)
    with _POOLS_LOCK:
        pool = _POOLS.get(key)
        if pool is None:
            pool = _POOLS[key] = ThreadPool(count)
            logger.debug(f"Started scan thread pool with {count} threads")
        return pool


@atexit.register
def _close_pools() -> None:
    with _POOLS_LOCK:
        for (pid, _), pool in _POOLS.items():
            if pid == os.getpid():
                pool.terminate()
        _POOLS.clear()


def _tree_scan(values: List[Any], sg: Semigroup, plan: ScanPlan, stats: Optional[ScanStats]) -> List[Any]:
    combine = sg.combine
    schedule = level_schedule(len(values))
    use_threads = plan.worker_count > 1 and any(len(level) >= plan.grain for level in schedule)
    pool = worker_pool(plan.worker_count) if use_threads else None
    if pool is not None:
        logger.debug(f"Tree scan of {len(values)} items: {len(schedule)} levels over {plan.worker_count} threads")

    def run_chunk(chunk):
        return [combine(values[source], values[target]) for source, target in chunk]

    for level in schedule:
        if pool is not None and len(level) >= plan.grain:
            parts = _chunks(level, plan.worker_count)
            results = itertools.chain.from_iterable(pool.map(run_chunk, parts))
            if stats is not None:
                stats.parallel_levels += 1
        else:
            results = run_chunk(level)
        for (_, target), value in zip(level, results):
            values[target] = value
        if stats is not None:
            stats.stages += 1
            stats.combines += len(level)
    return values


def inclusive_scan(items: Sequence[E], sg: Semigroup[E], plan: ScanPlan,
                   stats: Optional[ScanStats] = None) -> List[E]:
    """
    All prefixes a_0 (+) a_1 (+) ... (+) a_i.

    Raises:
        ScanError: empty input
    """
    values = list(items)
    if not values:
        raise ScanError("inclusive_scan needs at least one item")
    backward = plan.direction is ScanDirection.BACKWARD
    if backward:
        values.reverse()

    if plan.strategy is ScanStrategy.SEQUENTIAL:
        values = list(itertools.accumulate(values, sg.combine))
        if stats is not None:
            stats.stages += len(values) - 1
            stats.combines += len(values) - 1
    else:
        values = _tree_scan(values, sg, plan, stats)

    if backward:
        values.reverse()
    return values


def exclusive_scan(items: Sequence[E], sg: Semigroup[E], plan: ScanPlan,
                   stats: Optional[ScanStats] = None) -> List[E]:
    """
    Prefixes that stop one item short: output[0] is the identity.

    Raises:
        ScanError: the semigroup has no identity, or the input is empty
    """
    if not sg.has_identity:
        raise ScanError(f"exclusive_scan needs a monoid; '{sg.name}' has no identity")
    values = list(items)
    if not values:
        raise ScanError("exclusive_scan needs at least one item")
    if len(values) == 1:
        return [sg.identity]
    if plan.direction is ScanDirection.BACKWARD:
        shifted = inclusive_scan(values[1:], sg, plan, stats)
        return shifted + [sg.identity]
    shifted = inclusive_scan(values[:-1], sg, plan, stats)
    return [sg.identity] + shifted


def reduce(items: Sequence[E], sg: Semigroup[E], plan: ScanPlan) -> E:
    """Total of all items under the plan's combine order."""
    scanned = inclusive_scan(items, sg, plan)
    return scanned[0] if plan.direction is ScanDirection.BACKWARD else scanned[-1]


# ---------------------------------------------------------------------------
# Affine operands: x -> linear @ x + offset
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AffineOperand:
    """
    Affine map of dimension d; its (d+1)x(d+1) homogeneous lift is
    [[linear, offset], [0, 1]].
    """

    linear: np.ndarray
    offset: np.ndarray

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    @classmethod
    def identity(cls, dim: int) -> 'AffineOperand':
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def constant(cls, value: np.ndarray) -> 'AffineOperand':
        value = np.asarray(value, dtype=np.float64)
        return cls(np.zeros((value.shape[0], value.shape[0])), value.copy())

    @classmethod
    def from_lift(cls, matrix: np.ndarray) -> 'AffineOperand':
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:-1, :-1].copy(), matrix[:-1, -1].copy())

    def compose(self, other: 'AffineOperand') -> 'AffineOperand':
        """self o other: apply `other` first. lift(a.compose(b)) = lift(a) @ lift(b)."""
        return AffineOperand(self.linear @ other.linear, self.linear @ other.offset + self.offset)

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.linear @ state + self.offset

    def lift(self) -> np.ndarray:
        d = self.dim
        matrix = np.zeros((d + 1, d + 1))
        matrix[:d, :d] = self.linear
        matrix[:d, d] = self.offset
        matrix[d, d] = 1.0
        return matrix


def affine_semigroup(dim: int) -> Semigroup[AffineOperand]:
    """Composition of affine maps in matrix-product order, identity included."""
    return Semigroup(lambda left, right: left.compose(right), AffineOperand.identity(dim), f"affine{dim}")


def matrix_semigroup(dim: int) -> Semigroup[np.ndarray]:
    """Plain matrix multiplication; mostly useful as a non-commutative test operator."""
    return Semigroup(lambda left, right: left @ right, np.eye(dim), f"matmul{dim}")
