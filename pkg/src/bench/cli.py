#!/usr/bin/env python3
"""
rankwalk command line

    gen      write a seeded synthetic graph as an edge list
    solve    run power / dense / mcmc / gk on an edge list and write a RunReport
    compare  solve, then measure the estimate against a dense or power oracle

Option precedence: built-in defaults < YAML job config (--config) < flags.
Exit codes: 0 success, 1 usage or input error, 2 partial result (not converged).
"""
import argparse
import json
import logging
import sys
import time
from typing import Any, Dict, Optional, Sequence

import jsonschema
import yaml

from src.bench.generators import generate
from src.bench.report import RunReport, validate_report, write_report
from src.errors import InvalidConfig, RankSolverError
from src.rank_types import (
    Algorithm,
    AlgorithmRegistry,
    CountRule,
    DampingMode,
    DanglingPolicy,
    GraphModel,
    McmcMode,
    OracleKind,
    RankVector,
    RunStatus,
    StartPolicy,
)
from src.solvers import baseline_oracle, gk_solver, mcmc_solver
from src.solvers.config import DampingSpec, GkConfig, McmcConfig, build_config
from src.solvers.graph_core import StochasticMatrix, apply_damping, from_edge_list, read_edge_list, write_edge_list
from src.solvers.metrics import distances, residuals, topk_overlap
from src.solvers.restarts import restarts_for, run_restarts
from src.utils.trace_logger import close_trace_logger, get_trace_logger

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DEFAULT_TRACE_EVERY = 100
EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2

DEFAULTS: Dict[str, Any] = {
    # gen
    'model': None,
    'n': None,
    's': None,
    'output': None,
    # graph and damping
    'graph': None,
    'dangling': DanglingPolicy.UNIFORM.value,
    'damping': None,
    'damping_mode': DampingMode.TELEPORT.value,
    # solver
    'algo': None,
    'eps': None,
    'sigma': None,
    'alpha': None,
    'mode': McmcMode.SINGLE.value,
    'c_burn': None,
    'c_total': None,
    'start': None,
    'tau': None,
    'tol_adapt': None,
    'trajectories': None,
    'burn_in': None,
    'max_iter': None,
    'count_rule': CountRule.STANDARD.value,
    'restarts': None,
    'tol': 1e-12,
    # run
    'seed': 0,
    'topk': 10,
    'workers': 1,
    'report': None,
    'trace': None,
    'trace_every': None,
    'against': None,
}

JOB_METADATA_SECTIONS = {'job'}


class BenchArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def load_job_config(path: str) -> Dict[str, Any]:
    """Flatten a YAML job config (sections of option: value) into option names"""
    with open(path, 'r', encoding='utf-8') as f:
        raw = yaml.safe_load(f) or {}
    if not isinstance(raw, dict):
        raise InvalidConfig(f"{path}: top level must be a mapping")

    flat: Dict[str, Any] = {}
    for key, value in raw.items():
        if key in JOB_METADATA_SECTIONS:
            continue
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value

    options = {str(k).replace('-', '_'): v for k, v in flat.items()}
    unknown = sorted(set(options) - set(DEFAULTS))
    if unknown:
        raise InvalidConfig(f"{path}: unknown options {unknown}")

    # null means "use the default"
    options = {k: v for k, v in options.items() if v is not None}
    logger.info(f"Loaded job config {path} ({len(options)} options)")
    return options


def resolve_options(args: argparse.Namespace) -> Dict[str, Any]:
    """defaults < YAML job config < explicit flags"""
    options = dict(DEFAULTS)
    if getattr(args, 'config', None):
        options.update(load_job_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    return options


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument('--config', help='YAML job config')
    parser.add_argument('--log-level', default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='Logging level')
    parser.add_argument('--seed', type=int, help='Random seed')


def _add_solve_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--algo', choices=[a.value for a in Algorithm], help=AlgorithmRegistry.describe())
    parser.add_argument('--graph', help='Edge list file')
    parser.add_argument('--dangling', choices=[d.value for d in DanglingPolicy])
    parser.add_argument('--damping', type=float, help='Damping factor delta in (0, 1]')
    parser.add_argument('--damping-mode', choices=[m.value for m in DampingMode])
    parser.add_argument('--eps', type=float)
    parser.add_argument('--sigma', type=float)
    parser.add_argument('--alpha', type=float, help='Spectral gap bound (default: 1 - delta for teleport)')
    parser.add_argument('--mode', choices=[m.value for m in McmcMode])
    parser.add_argument('--c-burn', type=float)
    parser.add_argument('--c-total', type=float)
    parser.add_argument('--start', choices=[s.value for s in StartPolicy])
    parser.add_argument('--tau', type=int, help='Adaptive check period')
    parser.add_argument('--tol-adapt', type=float)
    parser.add_argument('--trajectories', type=int, help='Override N (parallel mode)')
    parser.add_argument('--burn-in', type=int, help='Override the burn-in length')
    parser.add_argument('--max-iter', type=int,
                        help='Iteration cap (power, gk) or step cap (mcmc adaptive mode only)')
    parser.add_argument('--count-rule', choices=[r.value for r in CountRule])
    parser.add_argument('--restarts', type=int,
                        help='Independent GK runs, best f kept (default: ceil(log2(1/sigma)))')
    parser.add_argument('--tol', type=float, help='Power iteration tolerance')
    parser.add_argument('--topk', type=int)
    parser.add_argument('--workers', type=int)
    parser.add_argument('--report', help='Report JSON path (stdout when omitted)')
    parser.add_argument('--trace', help='Convergence trace CSV path')
    parser.add_argument('--trace-every', type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = BenchArgumentParser(prog='rankwalk', description='PageRank solver benchmarks')
    sub = parser.add_subparsers(dest='command', parser_class=BenchArgumentParser)
    sub.required = True

    gen = sub.add_parser('gen', help='Generate a synthetic graph')
    _add_common(gen)
    gen.add_argument('--model', choices=[m.value for m in GraphModel])
    gen.add_argument('--n', type=int)
    gen.add_argument('--s', type=int)
    gen.add_argument('-o', '--output')

    solve = sub.add_parser('solve', help='Run a solver')
    _add_common(solve)
    _add_solve_flags(solve)

    compare = sub.add_parser('compare', help='Run a solver and compare with an oracle')
    _add_common(compare)
    _add_solve_flags(compare)
    compare.add_argument('--against', choices=[o.value for o in OracleKind])
    return parser


def configure_logging(level: str):
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr)


def _require(options: Dict[str, Any], *keys: str):
    missing = [k for k in keys if options.get(k) is None]
    if missing:
        raise InvalidConfig(f"missing required option(s): {', '.join('--' + k.replace('_', '-') for k in missing)}")


def run_gen(options: Dict[str, Any]) -> int:
    _require(options, 'model', 'n', 'output')
    graph = generate(GraphModel(options['model']), options['n'], options['s'], options['seed'])
    write_edge_list(graph, options['output'])
    logger.info(f"✅ Wrote {len(graph.edges)} edges to {options['output']}")
    return EXIT_OK


def load_matrix(options: Dict[str, Any]) -> StochasticMatrix:
    graph = read_edge_list(options['graph'])
    matrix = from_edge_list(graph, DanglingPolicy(options['dangling']))
    if options['damping'] is not None:
        spec = DampingSpec.create(options['damping'], DampingMode(options['damping_mode']))
        matrix = apply_damping(matrix, spec)
    return matrix


def _param_echo(options: Dict[str, Any]) -> Dict[str, Any]:
    keys = ['graph', 'dangling', 'damping', 'damping_mode', 'eps', 'sigma', 'alpha', 'mode',
            'c_burn', 'c_total', 'start', 'tau', 'tol_adapt', 'trajectories', 'burn_in', 'max_iter',
            'count_rule', 'restarts', 'tol', 'topk', 'trace_every']
    return {k: options.get(k) for k in keys}


def _open_trace(options: Dict[str, Any], algorithm: Algorithm):
    if not options.get('trace'):
        return None
    return get_trace_logger(options['trace'], AlgorithmRegistry.trace_header(algorithm))


def _solve_power(matrix, options, report: RunReport, trace) -> RankVector:
    result = baseline_oracle.power_iteration(matrix, tol=options['tol'],
                                             max_iter=options['max_iter'] or 10000)
    report.iterations = result.iterations
    report.status = result.status.value
    report.counters = {'matvecs': float(result.iterations)}
    if trace is not None:
        every = options['trace_every'] or 1
        for i, step in enumerate(result.trace, start=1):
            if i % every == 0 or i == len(result.trace):
                trace.log({'iter': i, 'l1_step': step})
    return result.estimate


def _solve_dense(matrix, options, report: RunReport, trace) -> RankVector:
    report.counters = {'dense_n': float(matrix.n)}
    return baseline_oracle.dense_solve(matrix)


def _solve_mcmc(matrix, options, report: RunReport, trace) -> RankVector:
    _require(options, 'eps', 'sigma')
    alpha = options['alpha']
    if alpha is None:
        alpha = matrix.gap_lower_bound
        if alpha is None:
            raise InvalidConfig("--alpha is required unless the matrix is teleport-damped")
        report.notes.append(f"alpha defaulted to the teleport gap bound 1 - delta = {alpha}")
    options['alpha'] = alpha
    report.params['alpha'] = alpha

    if options['max_iter'] is not None and McmcMode(options['mode']) is not McmcMode.ADAPTIVE:
        raise InvalidConfig("--max-iter caps adaptive mcmc only; single and parallel modes use formula step counts")

    cfg = build_config(McmcConfig, {
        'eps': options['eps'], 'sigma': options['sigma'], 'alpha': alpha, 'mode': options['mode'],
        'c_burn': options['c_burn'], 'c_total': options['c_total'], 'start': options['start'],
        'tau': options['tau'], 'tol_adapt': options['tol_adapt'], 'max_steps': options['max_iter'],
        'trajectories': options['trajectories'], 'burn_in': options['burn_in'],
    })
    callback = trace.log if trace is not None else None
    result = mcmc_solver.run(matrix, cfg, options['seed'], workers=options['workers'], trace_callback=callback)

    report.iterations = result.steps_total
    report.trajectories = result.trajectories
    report.status = result.status.value
    report.counters = {
        'steps_total': float(result.steps_total),
        'steps_burn': float(result.steps_burn),
        'steps_discarded': float(result.steps_discarded),
        'steps_counted': float(result.steps_counted),
        'predicted_operations': float(mcmc_solver.predicted_operations(matrix.n, cfg.eps, cfg.sigma, alpha)),
    }
    if cfg.mode is McmcMode.PARALLEL:
        sufficient = mcmc_solver.hoeffding_sufficient(result.trajectories, cfg.eps, cfg.sigma)
        report.notes.append(f"hoeffding sufficient condition holds for N={result.trajectories}: {sufficient}")
    return result.estimate


def _solve_gk(matrix, options, report: RunReport, trace) -> RankVector:
    _require(options, 'eps', 'sigma')
    trace_every = options['trace_every']
    if trace is not None and trace_every is None:
        trace_every = DEFAULT_TRACE_EVERY
    cfg = build_config(GkConfig, {
        'eps': options['eps'], 'sigma': options['sigma'], 'max_iter': options['max_iter'],
        'trace_every': trace_every, 'count_rule': options['count_rule'],
    })
    callback = trace.log if trace is not None else None

    restarts = options['restarts']
    if restarts is None:
        restarts = restarts_for(cfg.sigma)
        report.params['restarts'] = restarts
        report.notes.append(f"restarts defaulted to ceil(log2(1/sigma)) = {restarts}")
    elif restarts < 1:
        raise InvalidConfig(f"--restarts must be at least 1, got {restarts}")

    if restarts > 1:
        summary = run_restarts(matrix, cfg, options['seed'], restarts,
                               workers=options['workers'], trace_callback=callback)
        result = summary.best
        failed = summary.failures
    else:
        result = gk_solver.gk_run(matrix, cfg, options['seed'], trace_callback=callback)
        failed = 0

    n = matrix.n
    depth = result.state.tree.depth if result.state is not None else 0
    s = matrix.max_degree
    report.iterations = result.iterations
    report.mass = result.mass
    report.counters = {
        'node_writes': float(result.node_writes),
        'mean_writes_sparse': result.mean_writes_sparse,
        'max_writes_sparse': float(max(result.writes_sparse, default=0)),
        'max_writes_dense': float(max(result.writes_dense, default=0)),
        'dense_iterations': float(len(result.writes_dense)),
        'sparse_write_bound': float((2 * s + 3) * (depth + 1)),
        'rescales': float(result.rescales),
        'ln_phi': result.ln_phi,
        'game_gap': result.game_gap,
        'predicted_operations': float(gk_solver.predicted_operations(n, s, cfg.eps, cfg.sigma)),
        'restarts': float(restarts),
        'failed_restarts': float(failed),
        'stream_id': float(result.stream_id),
    }
    report.notes.append(
        f"iteration count rule '{cfg.count_rule.value}': standard uses 12 (ln(2n+1) + ln 1/sigma) / eps^2; "
        f"tight goal G x <= eps e needs 3 (...) / eps^2"
    )
    return result.estimate


SOLVERS = {
    Algorithm.POWER: _solve_power,
    Algorithm.DENSE: _solve_dense,
    Algorithm.MCMC: _solve_mcmc,
    Algorithm.GK: _solve_gk,
}


def _oracle(matrix: StochasticMatrix, kind: OracleKind, report: RunReport) -> RankVector:
    if kind is OracleKind.DENSE:
        return baseline_oracle.dense_solve(matrix)
    result = baseline_oracle.power_iteration(matrix, tol=1e-12, max_iter=100000)
    if not result.converged:
        report.notes.append("power oracle did not reach tol 1e-12")
    return result.estimate


def run_solve(options: Dict[str, Any], compare: bool = False) -> int:
    _require(options, 'algo', 'graph')
    if compare:
        _require(options, 'against')
    algorithm = Algorithm(options['algo'])
    matrix = load_matrix(options)

    report = RunReport(
        algorithm=algorithm.value,
        n=matrix.n,
        nnz=matrix.nnz,
        params=_param_echo(options),
        seed=options['seed'],
    )

    started = time.perf_counter()
    trace = _open_trace(options, algorithm)
    try:
        estimate = SOLVERS[algorithm](matrix, options, report, trace)
    finally:
        if trace is not None:
            close_trace_logger()
    report.wall_ms = (time.perf_counter() - started) * 1000.0

    report.residuals = residuals(matrix, estimate).as_dict()
    report.set_topk(estimate, options['topk'])

    if compare:
        kind = OracleKind(options['against'])
        oracle = _oracle(matrix, kind, report)
        report.oracle = kind.value
        report.distances = distances(estimate, oracle)
        report.topk_overlap = topk_overlap(estimate, oracle, min(options['topk'], matrix.n))

    if options['report']:
        write_report(report, options['report'])
    else:
        write_report_stdout(report)

    status = RunStatus(report.status)
    if status in RunStatus.get_partial_statuses():
        logger.warning(f"{algorithm.value} finished with status {status.value}")
        return EXIT_PARTIAL
    logger.info(f"✅ {algorithm.value}: f(p)={report.residuals['f']:.3e} in {report.wall_ms:.1f} ms")
    return EXIT_OK


def write_report_stdout(report: RunReport):
    errors = validate_report(report)
    if errors:
        raise jsonschema.ValidationError('; '.join(errors))
    json.dump(report.to_dict(), sys.stdout, indent=2, ensure_ascii=False, allow_nan=False)
    sys.stdout.write('\n')


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        options = resolve_options(args)
        if args.command == 'gen':
            return run_gen(options)
        return run_solve(options, compare=args.command == 'compare')
    except (RankSolverError, OSError, ValueError, yaml.YAMLError, jsonschema.ValidationError) as e:
        logger.error(f"❌ {args.command} failed: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
