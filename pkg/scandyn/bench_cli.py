"""
Benchmark and Verification CLI
==============================

Command-line harness for the dynamics library.

Usage:
    python -m scandyn bench-links --mode id --links 10,50,100 --repeats 100 --verify
    python -m scandyn bench-groups --mode fd --groups 1,100,1000 --chain-links 10 --workers auto
    python -m scandyn verify --links 1,2,10,64,200 --trials 3
    python -m scandyn id --model chain.json --input state.json --algo scan
    python -m scandyn fd --model chain.json --input state.json --algo abia

Subcommands:
1. bench-links: single evaluations on random chains of growing link count
2. bench-groups: batches of independent groups on one fixed chain, 1 worker vs --workers
3. verify: cross-algorithm equivalence matrix; nonzero exit on any breach
4. id / fd: evaluate one model/input document pair and print the result vector

Benchmark CSV files start with '#' provenance lines followed by the columns
mode,algo,links,groups,repeats,mean_ns,std_ns,max_rel_err,scan_depth. std_ns is an
addition to the mean wall time; group-experiment rows encode the worker count in
the algo column as <algo>/w<workers>.

Exit codes: 0 ok, 1 verification breach, 2 usage or configuration error,
3 I/O or model error.

Author: Dynamics Engineering Team
Created: October 2026
"""

import argparse
import json
import logging
import platform
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np
import pandas as pd

from scandyn import __version__
from scandyn.config import (
    LOG_FORMAT,
    OUTPUT_DIR,
    PARALLEL_GRAIN,
    PRNG_NAME,
    configure_logging,
    load_settings,
    resolve_workers,
)
from scandyn.exceptions import DimensionMismatchError, ModelFormatError, ModelValidationError, ScanDynError
from scandyn.forward_dynamics import FD_ALGORITHMS, fd_batch, forward_dynamics
from scandyn.inverse_dynamics import (
    ID_ALGORITHMS,
    GroupFailure,
    OperandHook,
    id_batch,
    id_recursive,
    inverse_dynamics,
    relative_error,
)
from scandyn.robot_model import (
    GENERATION_RANGES,
    ChainModel,
    DynamicsInput,
    ensure_valid,
    load_input,
    random_chain,
    random_input,
    read_model,
    spawn_generators,
)
from scandyn.scan_engine import ScanPlan, ScanStats

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['mode', 'algo', 'links', 'groups', 'repeats', 'mean_ns', 'std_ns', 'max_rel_err', 'scan_depth']

MODES = {'id': ID_ALGORITHMS, 'fd': FD_ALGORITHMS}
SERIAL_ALGORITHMS = ('recursive', 'abia_recursive')
FAULT_TARGETS = ('scan', 'scan_fused', 'scan_synchronous', 'jsiia', 'abia', 'abia_merged')

DEFAULT_LINKS = (1, 2, 4, 8, 16, 32, 64, 128, 256)
DEFAULT_GROUPS = (1, 10, 100, 1000)
DEFAULT_VERIFY_SIZES = (1, 2, 10, 64, 200)
DEFAULT_TRIALS = 3
DEFAULT_CHAIN_LINKS = 10

# Per-check tolerances of the verification matrix
TOLERANCES = {
    'id_vs_recursive': 1e-8,
    'fused_vs_split': 1e-9,
    'worker_determinism': 0.0,
    'fd_vs_jsiia': 1e-6,
    'fd_id_roundtrip': 1e-6,
}
VERIFY_TOLERANCE = {'id': TOLERANCES['id_vs_recursive'], 'fd': TOLERANCES['fd_id_roundtrip']}

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark invocation; validated on construction."""

    mode: str = 'id'
    algos: Tuple[str, ...] = ()
    links: Tuple[int, ...] = DEFAULT_LINKS
    groups: Tuple[int, ...] = DEFAULT_GROUPS
    repeats: int = 1000
    warmup: int = 10
    seed: int = 0
    workers: int = 1
    verify: bool = False
    output: Optional[str] = None
    chain_links: int = DEFAULT_CHAIN_LINKS
    grain: int = PARALLEL_GRAIN
    output_dir: str = OUTPUT_DIR

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        algos = tuple(self.algos) or MODES[self.mode]
        unknown = [a for a in algos if a not in MODES[self.mode]]
        if unknown:
            raise ValueError(f"unknown {self.mode} algorithm(s) {', '.join(unknown)}; "
                             f"choose from {', '.join(MODES[self.mode])}")
        object.__setattr__(self, 'algos', algos)
        object.__setattr__(self, 'links', tuple(self.links))
        object.__setattr__(self, 'groups', tuple(self.groups))
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if not self.links or min(self.links) < 1:
            raise ValueError("link counts must all be >= 1")
        if not self.groups or min(self.groups) < 1:
            raise ValueError("group counts must all be >= 1")
        if self.chain_links < 1:
            raise ValueError(f"chain links must be >= 1, got {self.chain_links}")
        if self.grain < 1:
            raise ValueError(f"grain must be >= 1, got {self.grain}")


@dataclass
class BenchRecord:
    mode: str
    algo: str
    links: int
    groups: int
    repeats: int
    mean_ns: float
    std_ns: float
    max_rel_err: float = float('nan')
    scan_depth: Optional[int] = None


@dataclass
class VerifyCell:
    check: str
    algo: str
    links: int
    seed: int
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error)) and self.error <= self.tolerance


@dataclass
class VerifyReport:
    cells: List[VerifyCell] = field(default_factory=list)

    @property
    def failures(self) -> List[VerifyCell]:
        return [cell for cell in self.cells if not cell.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> pd.DataFrame:
        """Worst error per (check, algo, links) cell."""
        frame = pd.DataFrame([{
            'check': c.check, 'algo': c.algo, 'links': c.links, 'seed': c.seed,
            'error': c.error, 'tolerance': c.tolerance, 'passed': c.passed,
        } for c in self.cells])
        if frame.empty:
            return frame
        return (frame.groupby(['check', 'algo', 'links'], sort=False)
                .agg(max_error=('error', 'max'), tolerance=('tolerance', 'first'), passed=('passed', 'all'))
                .reset_index())


# ---------------------------------------------------------------------------
# Evaluation helpers
# ---------------------------------------------------------------------------

def scan_plan(workers: int, grain: int = PARALLEL_GRAIN) -> ScanPlan:
    return ScanPlan.parallel(workers, grain)


def evaluator(mode: str, model: ChainModel, algo: str, plan: ScanPlan,
              operand_hook: Optional[OperandHook] = None) -> Callable[[DynamicsInput], np.ndarray]:
    """Callable returning tau (id) or q'' (fd) for one input."""
    if mode == 'id':
        return lambda state: inverse_dynamics(model, state, algo, plan, operand_hook).tau
    return lambda state: forward_dynamics(model, state, algo, plan, operand_hook).qdd


def benchmark_inputs(mode: str, model: ChainModel, rng: np.random.Generator, count: int) -> List[DynamicsInput]:
    """
    Randomized inputs. For fd the applied torques are ID(q, q', q'') so that the
    input q'' is the exact expected answer.
    """
    inputs = [random_input(model, rng) for _ in range(count)]
    if mode == 'fd':
        inputs = [s.replace(applied_torques=id_recursive(model, s).tau) for s in inputs]
    return inputs


def oracle(mode: str, model: ChainModel, state: DynamicsInput) -> np.ndarray:
    if mode == 'id':
        return id_recursive(model, state).tau
    return np.array(state.qdd)


def measure_scan_depth(mode: str, algo: str, model: ChainModel, state: DynamicsInput,
                       plan: ScanPlan) -> Optional[int]:
    """Sequential combine stages of one instrumented evaluation (None for serial algorithms)."""
    if algo in SERIAL_ALGORITHMS:
        return None
    stats = ScanStats()
    if mode == 'id':
        inverse_dynamics(model, state, algo, plan, stats=stats)
    elif algo == 'jsiia':
        # the n + 1 ID calls are independent; depth is that of one of them
        inverse_dynamics(model, state.replace(applied_torques=None), 'scan', plan, stats=stats)
    else:
        forward_dynamics(model, state, algo, plan, stats=stats)
    return stats.stages


def time_calls(fn: Callable[[Any], Any], args: Sequence[Any], warmup: int) -> np.ndarray:
    """Wall time (ns) of fn(arg) for every arg; warm-up calls are discarded."""
    for k in range(warmup):
        fn(args[k % len(args)])
    timings = np.empty(len(args))
    for k, arg in enumerate(args):
        start = time.perf_counter_ns()
        fn(arg)
        timings[k] = time.perf_counter_ns() - start
    return timings


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def run_links_experiment(config: BenchConfig) -> List[BenchRecord]:
    """One record per (links, algo): `repeats` randomized single evaluations."""
    records = []
    plan = scan_plan(config.workers, config.grain)
    rngs = spawn_generators(config.seed, len(config.links))
    for n, rng in zip(config.links, rngs):
        model = random_chain(n, config.seed)
        inputs = benchmark_inputs(config.mode, model, rng, config.repeats)
        logger.info(f"📋 {config.mode} n={n}: {config.repeats} repeats x {len(config.algos)} algorithm(s)")
        for algo in config.algos:
            fn = evaluator(config.mode, model, algo, plan)
            timings = time_calls(fn, inputs, config.warmup)
            error = float('nan')
            if config.verify:
                error = max(relative_error(fn(s), oracle(config.mode, model, s)) for s in inputs)
            record = BenchRecord(
                mode=config.mode, algo=algo, links=n, groups=1, repeats=config.repeats,
                mean_ns=float(np.mean(timings)), std_ns=float(np.std(timings)), max_rel_err=error,
                scan_depth=measure_scan_depth(config.mode, algo, model, inputs[0], plan),
            )
            records.append(record)
            logger.info(f"   {algo:<18} mean {record.mean_ns / 1e3:10.1f} us  std {record.std_ns / 1e3:8.1f} us"
                        + (f"  err {error:.2e}" if config.verify else ""))
    return records


def _batch_error(mode: str, model: ChainModel, inputs: Sequence[DynamicsInput], results: Sequence[Any]) -> float:
    worst = 0.0
    for state, result in zip(inputs, results):
        if isinstance(result, GroupFailure):
            return float('inf')
        value = result.tau if mode == 'id' else result.qdd
        worst = max(worst, relative_error(value, oracle(mode, model, state)))
    return worst


def run_groups_experiment(config: BenchConfig) -> List[BenchRecord]:
    """
    One record per (groups, algo, worker variant) on a fixed chain of
    config.chain_links links; each timed call evaluates the whole batch.
    """
    records = []
    model = random_chain(config.chain_links, config.seed)
    variants = sorted({1, config.workers})
    for g in config.groups:
        rngs = spawn_generators(config.seed, g)
        inputs = [benchmark_inputs(config.mode, model, rng, 1)[0] for rng in rngs]
        logger.info(f"📋 {config.mode} groups={g} on {config.chain_links} links, workers {variants}")
        for algo in config.algos:
            depth = measure_scan_depth(config.mode, algo, model, inputs[0], ScanPlan.parallel(1))
            for workers in variants:
                plan = scan_plan(workers, config.grain)

                def run(_, plan=plan, algo=algo):
                    if config.mode == 'id':
                        return id_batch(model, inputs, plan, algo)
                    return fd_batch(model, inputs, algo, plan)

                timings = time_calls(run, list(range(config.repeats)), config.warmup)
                error = _batch_error(config.mode, model, inputs, run(None)) if config.verify else float('nan')
                record = BenchRecord(
                    mode=config.mode, algo=f"{algo}/w{workers}", links=config.chain_links, groups=g,
                    repeats=config.repeats, mean_ns=float(np.mean(timings)), std_ns=float(np.std(timings)),
                    max_rel_err=error, scan_depth=depth,
                )
                records.append(record)
                logger.info(f"   {record.algo:<22} mean {record.mean_ns / 1e6:10.2f} ms")
    return records


# ---------------------------------------------------------------------------
# Verification matrix
# ---------------------------------------------------------------------------

def _corrupt(item: Any) -> Any:
    for name in ('offset', 'xi1', 'twist'):
        if hasattr(item, name):
            value = np.array(getattr(item, name), dtype=np.float64)
            value[0] += 1.0
            return replace(item, **{name: value})
    raise TypeError(f"cannot corrupt operand of type {type(item).__name__}")


def fault_hook(stage: str, items: List[Any]) -> List[Any]:
    """Test hook: perturb the middle operand of every scan it sees."""
    items = list(items)
    middle = len(items) // 2
    items[middle] = _corrupt(items[middle])
    return items


def verify_suite(seed: int = 0, sizes: Sequence[int] = DEFAULT_VERIFY_SIZES, trials: int = DEFAULT_TRIALS,
                 fault: Optional[str] = None, workers: int = 2,
                 grain: int = PARALLEL_GRAIN) -> VerifyReport:
    """
    Cross-algorithm equivalence matrix over random chains.

    For every size and trial seed: ID scans vs the recursion, fused vs split,
    worker-count determinism, FD algorithms vs JSIIA, and FD of ID torques back to q''.
    `fault` names an algorithm whose scan operands are corrupted.
    """
    if fault is not None and fault not in FAULT_TARGETS:
        raise ValueError(f"--fault must name one of {', '.join(FAULT_TARGETS)}, got {fault!r}")

    def hook_for(algo):
        return fault_hook if algo == fault else None

    report = VerifyReport()
    plan = scan_plan(workers, grain)
    for n in sizes:
        for trial in range(trials):
            trial_seed = seed + trial
            model = random_chain(n, trial_seed)
            state = random_input(model, spawn_generators(trial_seed, 1)[0])
            reference = id_recursive(model, state).tau

            split = None
            for algo in ('scan', 'scan_fused', 'scan_synchronous'):
                tau = inverse_dynamics(model, state, algo, plan, hook_for(algo)).tau
                report.cells.append(VerifyCell('id_vs_recursive', algo, n, trial_seed,
                                               relative_error(tau, reference), TOLERANCES['id_vs_recursive']))
                if algo == 'scan':
                    split = tau
                else:
                    report.cells.append(VerifyCell('fused_vs_split', algo, n, trial_seed,
                                                   relative_error(tau, split), TOLERANCES['fused_vs_split']))

            single = inverse_dynamics(model, state, 'scan', scan_plan(1, grain), hook_for('scan')).tau
            many = inverse_dynamics(model, state, 'scan', scan_plan(max(2, workers), grain), hook_for('scan')).tau
            report.cells.append(VerifyCell('worker_determinism', 'scan', n, trial_seed,
                                           float(np.max(np.abs(single - many))), TOLERANCES['worker_determinism']))

            fd_state = state.replace(applied_torques=reference)
            results = {algo: forward_dynamics(model, fd_state, algo, plan, hook_for(algo)).qdd
                       for algo in FD_ALGORITHMS}
            for algo, qdd in results.items():
                report.cells.append(VerifyCell('fd_id_roundtrip', algo, n, trial_seed,
                                               relative_error(qdd, state.qdd), TOLERANCES['fd_id_roundtrip']))
                if algo != 'jsiia':
                    report.cells.append(VerifyCell('fd_vs_jsiia', algo, n, trial_seed,
                                                   relative_error(qdd, results['jsiia']), TOLERANCES['fd_vs_jsiia']))
        logger.debug(f"verify: n={n} done")
    return report


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def provenance(config: BenchConfig, command: str, workers_requested: str) -> Dict[str, Any]:
    resolved = str(config.workers)
    if str(workers_requested).strip().lower() == 'auto':
        resolved += " (auto)"
    return {
        'scandyn_version': __version__,
        'command': command,
        'mode': config.mode,
        'seed': config.seed,
        'workers': resolved,
        'grain': config.grain,
        'warmup': config.warmup,
        'prng': PRNG_NAME,
        'generation_ranges': json.dumps(GENERATION_RANGES),
        'python': platform.python_version(),
        'numpy': np.__version__,
        'columns_note': 'std_ns extends the reported mean wall time',
    }


def records_frame(records: Sequence[BenchRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([vars(r) for r in records], columns=CSV_COLUMNS)
    frame['scan_depth'] = frame['scan_depth'].astype('Int64')
    return frame


def write_records(records: Sequence[BenchRecord], path: Optional[str], meta: Dict[str, Any],
                  stream: Optional[TextIO] = None) -> None:
    """Provenance '#' lines, then the CSV body. path '-' or None with a stream writes to the stream."""
    frame = records_frame(records)

    def emit(handle: TextIO):
        for key, value in meta.items():
            handle.write(f"# {key}: {value}\n")
        frame.to_csv(handle, index=False, na_rep='NaN')

    if path is None or path == '-':
        emit(stream or sys.stdout)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open('w', encoding='utf-8', newline='') as handle:
        emit(handle)
    logger.info(f"✅ Wrote {len(frame)} rows to {target}")


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def _int_list(text: str) -> Tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(',') if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _str_list(text: str) -> Tuple[str, ...]:
    return tuple(part.strip() for part in text.split(',') if part.strip())


def build_parser() -> argparse.ArgumentParser:
    settings = load_settings()
    parser = argparse.ArgumentParser(
        prog='scandyn', description='Prefix-scan rigid-body dynamics: benchmarks and verification',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--version', action='version', version=f"scandyn {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=settings.seed, help='Base seed for models and inputs.')
    common.add_argument('--workers', type=str, default=str(settings.workers),
                        help="Worker count, or 'auto' for the CPU count.")
    common.add_argument('--log-level', type=str, default=settings.log_level, help='Logging level.')
    common.add_argument('--grain', type=int, default=settings.parallel_grain,
                        help='Combines per scan level before the level is split over worker threads.')

    bench = argparse.ArgumentParser(add_help=False, parents=[common])
    bench.add_argument('--mode', choices=sorted(MODES), default='id', help='Dynamics direction.')
    bench.add_argument('--algo', type=_str_list, default=(), help='Comma-separated algorithms (default: all of the mode).')
    bench.add_argument('--repeats', type=int, default=settings.repeats, help='Randomized timed evaluations per cell.')
    bench.add_argument('--warmup', type=int, default=settings.warmup, help='Discarded warm-up evaluations per cell.')
    bench.add_argument('--verify', action='store_true', help='Fill max_rel_err against the oracle.')
    bench.add_argument('--output', type=str, default=None, help="CSV path, '-' for stdout.")
    bench.add_argument('--output-dir', type=str, default=settings.output_dir,
                       help='Directory for the CSV when --output is not given.')

    sub = parser.add_subparsers(dest='command', required=True)
    links = sub.add_parser('bench-links', parents=[bench], help='Scaling in the number of links.',
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    links.add_argument('--links', type=_int_list, default=DEFAULT_LINKS, help='Comma-separated link counts.')

    groups = sub.add_parser('bench-groups', parents=[bench], help='Scaling in the number of groups.',
                            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    groups.add_argument('--groups', type=_int_list, default=DEFAULT_GROUPS, help='Comma-separated group counts.')
    groups.add_argument('--chain-links', type=int, default=DEFAULT_CHAIN_LINKS, help='Links of the fixed chain.')

    verify = sub.add_parser('verify', parents=[common], help='Cross-algorithm equivalence matrix.',
                            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    verify.add_argument('--links', type=_int_list, default=DEFAULT_VERIFY_SIZES, help='Chain sizes to check.')
    verify.add_argument('--trials', type=int, default=DEFAULT_TRIALS, help='Random seeds per size.')
    verify.add_argument('--fault', type=str, default=None, choices=FAULT_TARGETS,
                        help='Corrupt the scan operands of one algorithm (test hook).')

    for name, algos, default in (('id', ID_ALGORITHMS, 'recursive'), ('fd', FD_ALGORITHMS, 'jsiia')):
        single = sub.add_parser(name, parents=[common], help=f"Evaluate {name.upper()} for a model/input document pair.")
        single.add_argument('--model', required=True, help='Model JSON document.')
        single.add_argument('--input', required=True, help='Input JSON document.')
        single.add_argument('--algo', choices=algos, default=default, help='Algorithm.')
    return parser


def _bench_config(args: argparse.Namespace, workers: int) -> BenchConfig:
    return BenchConfig(
        mode=args.mode,
        algos=args.algo,
        links=getattr(args, 'links', DEFAULT_LINKS),
        groups=getattr(args, 'groups', DEFAULT_GROUPS),
        repeats=args.repeats,
        warmup=args.warmup,
        seed=args.seed,
        workers=workers,
        verify=args.verify,
        output=args.output,
        chain_links=getattr(args, 'chain_links', DEFAULT_CHAIN_LINKS),
        grain=args.grain,
        output_dir=args.output_dir,
    )


def _run_bench(args: argparse.Namespace, workers: int) -> int:
    config = _bench_config(args, workers)
    logger.info("=" * 60)
    logger.info(f"📊 {args.command} mode={config.mode} algos={','.join(config.algos)} workers={config.workers}")
    logger.info("=" * 60)
    if args.command == 'bench-links':
        records = run_links_experiment(config)
    else:
        records = run_groups_experiment(config)
    output = config.output or str(Path(config.output_dir) / f"{args.command}_{config.mode}.csv")
    write_records(records, output, provenance(config, args.command, args.workers))

    if config.verify:
        limit = VERIFY_TOLERANCE[config.mode]
        breaches = [r for r in records if not r.max_rel_err <= limit]
        if breaches:
            worst = max(breaches, key=lambda r: r.max_rel_err)
            logger.error(f"❌ Oracle error {worst.max_rel_err:.3g} > {limit:g} for {worst.algo} n={worst.links}")
            return EXIT_VERIFY_FAILED
        logger.info(f"✅ All {len(records)} rows within {limit:g} of the oracle")
    return EXIT_OK


def _run_verify(args: argparse.Namespace, workers: int) -> int:
    logger.info("=" * 60)
    logger.info(f"🔍 Verification: sizes={list(args.links)} trials={args.trials} seed={args.seed}")
    logger.info("=" * 60)
    report = verify_suite(args.seed, args.links, args.trials, args.fault, max(2, workers), args.grain)
    summary = report.summary()
    for line in summary.to_string(index=False).splitlines():
        logger.info(line)
    logger.info("=" * 60)
    if not report.passed:
        first = report.failures[0]
        logger.error(f"❌ {len(report.failures)} cell(s) failed; first: check={first.check} algo={first.algo} "
                     f"n={first.links} seed={first.seed} error={first.error:.3g} > {first.tolerance:g}")
        return EXIT_VERIFY_FAILED
    logger.info(f"🎉 All {len(report.cells)} checks passed")
    return EXIT_OK


def _run_single(args: argparse.Namespace, workers: int) -> int:
    model = ensure_valid(read_model(args.model))
    state = load_input(Path(args.input).read_text(encoding='utf-8'), model.n)
    plan = scan_plan(workers, args.grain)
    if args.command == 'id':
        values = inverse_dynamics(model, state, args.algo, plan).tau
    else:
        values = forward_dynamics(model, state, args.algo, plan).qdd
    print(json.dumps(values.tolist()))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    try:
        parser = build_parser()
    except ValueError as e:
        logging.basicConfig(format=LOG_FORMAT)
        logger.error(f"❌ Invalid environment configuration: {e}")
        return EXIT_USAGE
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        workers = resolve_workers(args.workers)
    except ValueError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    if str(args.workers).strip().lower() == 'auto':
        logger.info(f"Resolved --workers auto to {workers}")

    try:
        if args.command in ('bench-links', 'bench-groups'):
            return _run_bench(args, workers)
        if args.command == 'verify':
            return _run_verify(args, workers)
        return _run_single(args, workers)
    except (ModelFormatError, ModelValidationError, DimensionMismatchError, OSError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_IO
    except (ValueError, ScanDynError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
