"""
bench subcommand: determinant path against the dense solve as N grows.
"""
from __future__ import annotations

import argparse
import logging
import time
from typing import Callable, List, Optional, Tuple

import numpy as np
import psutil

try:
    from config.defaults import BENCH_MAX_K, BENCH_PRECHECK_MAX_N, EXIT_OK, ORACLE_MAX_N, VERIFY_U_TOL
    from core.absorbing import absorption_probabilities, absorption_probability_at
    from core.errors import OracleTooLarge, ShapeMismatch, VerificationFailed
    from core.leap_model import LeapParams, validate
    from core.oracle import ChainMode, build_transition_matrix, solve_absorption
    from core.report_writer import ReportWriter
except ImportError:
    from ...config.defaults import BENCH_MAX_K, BENCH_PRECHECK_MAX_N, EXIT_OK, ORACLE_MAX_N, VERIFY_U_TOL
    from ...core.absorbing import absorption_probabilities, absorption_probability_at
    from ...core.errors import OracleTooLarge, ShapeMismatch, VerificationFailed
    from ...core.leap_model import LeapParams, validate
    from ...core.oracle import ChainMode, build_transition_matrix, solve_absorption
    from ...core.report_writer import ReportWriter
from .common import RunConfig, emit, parse_int_list

logger = logging.getLogger(__name__)

DEFAULT_BENCH_N_LIST = (100, 10_000, 1_000_000)
BENCH_COLUMNS = ["N", "t_determinant", "t_dense", "dense_status", "rss_mb"]


def random_bench_params(k: int, seed: int) -> LeapParams:
    """Leap with every step of size 1..k in both directions present."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(2 * k))
    weights /= weights.sum()
    return validate(weights[:k].tolist(), weights[k:].tolist())


def _best_time(func: Callable[[], object], repeats: int) -> float:
    best = float("inf")
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - start)
    return best


def _rss_mb() -> float:
    return psutil.Process().memory_info().rss / 2**20


def _precheck(params: LeapParams, N: int) -> None:
    """Determinant and dense absorption probabilities must agree before timing."""
    u_det = absorption_probabilities(params, N)
    u_dense, _ = solve_absorption(build_transition_matrix(params, N, ChainMode.ABSORBING))
    deviation = float(np.abs(u_det - u_dense).max())
    if deviation > VERIFY_U_TOL:
        raise VerificationFailed(f"N={N}: determinant and dense u differ by {deviation:.3e}")
    logger.info(f"N={N}: precheck deviation {deviation:.3e}")


def _time_dense(params: LeapParams, N: int) -> Tuple[Optional[float], str]:
    if N > ORACLE_MAX_N:
        return None, f"skipped: N above dense cap {ORACLE_MAX_N}"
    try:
        start = time.perf_counter()
        solve_absorption(build_transition_matrix(params, N, ChainMode.ABSORBING))
        return time.perf_counter() - start, "ok"
    except OracleTooLarge as e:
        return None, f"skipped: {e}"


def cmd_bench(config: RunConfig, args: argparse.Namespace) -> int:
    """
    Time a single u_i query by determinants and by the dense solve.

    Determinant timings stay nearly flat in N; the dense solve grows as N^3
    and is skipped above ORACLE_MAX_N.
    """
    if args.format is None:
        config.output_format = "csv"
    k = args.k
    if not 1 <= k <= BENCH_MAX_K:
        raise ShapeMismatch(f"bench supports 1 <= k <= {BENCH_MAX_K}, got {k}")
    n_list = parse_int_list(args.N_list) or list(DEFAULT_BENCH_N_LIST)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ShapeMismatch(f"--N-list must be ascending, got {n_list}")

    params = random_bench_params(k, config.seed)
    rows: List[list] = []
    for N in n_list:
        if N <= BENCH_PRECHECK_MAX_N:
            _precheck(params, N)
        i = N // 2
        t_det = _best_time(lambda: absorption_probability_at(params, N, i), args.repeats)
        t_dense, status = _time_dense(params, N) if not args.skip_dense else (None, "skipped: --skip-dense")
        rows.append([N, t_det, t_dense, status, _rss_mb()])
        logger.info(f"N={N}: t_det={t_det:.3e}s dense={status}")

    writer = ReportWriter(decimals=6)
    writer.create_report(f"Determinant vs dense timings, k = {k}")
    if config.output_format == "json":
        writer.add_mapping({"k": k, "seed": config.seed, "params": params.to_dict()})
    writer.add_table("timings", BENCH_COLUMNS, rows)
    emit(writer, config)
    return EXIT_OK
