"""
simulate and verify subcommands.
"""
from __future__ import annotations

import argparse
import logging
import math

import numpy as np

try:
    from config.defaults import (
        EXIT_OK,
        EXIT_TOLERANCE,
        MC_SIGMA_LIMIT,
        VERIFY_U_TOL,
        VERIFY_V_REL_TOL,
    )
    from core.absorbing import analyze_absorption
    from core.errors import ShapeMismatch
    from core.oracle import ChainMode, build_transition_matrix, simulate, solve_absorption
    from core.report_writer import ReportWriter
    from core.stationary import classify
except ImportError:
    from ...config.defaults import (
        EXIT_OK,
        EXIT_TOLERANCE,
        MC_SIGMA_LIMIT,
        VERIFY_U_TOL,
        VERIFY_V_REL_TOL,
    )
    from ...core.absorbing import analyze_absorption
    from ...core.errors import ShapeMismatch
    from ...core.oracle import ChainMode, build_transition_matrix, simulate, solve_absorption
    from ...core.report_writer import ReportWriter
    from ...core.stationary import classify
from .common import RunConfig, emit, require_N

logger = logging.getLogger(__name__)


def _start_state(args: argparse.Namespace, N: int, mode: ChainMode) -> int:
    if args.start is not None:
        return args.start
    return N // 2 if mode is ChainMode.ABSORBING else 0


def cmd_simulate(config: RunConfig, args: argparse.Namespace) -> int:
    """Monte Carlo estimates with standard errors."""
    N = require_N(config)
    mode = ChainMode(args.mode)
    i0 = _start_state(args, N, mode)
    report = simulate(
        config.params,
        N,
        mode,
        i0,
        config.n_paths,
        horizon=args.horizon,
        seed=config.seed,
        workers=config.worker_count,
    )

    writer = ReportWriter()
    writer.create_report(f"Monte Carlo, mode = {mode.value}, N = {N}, start = {i0}")
    if config.output_format == "json":
        writer.add_mapping({"params": config.params.to_dict(), "N": N, "start": i0, **report.to_dict()})
    else:
        meta = report.to_dict()
        for key in ("labels", "values", "stderr"):
            meta.pop(key)
        writer.add_mapping(meta)
        writer.add_table(
            "estimates",
            ["label", "value", "stderr"],
            [[label, float(v), float(s)] for label, v, s in zip(report.labels, report.values, report.stderr)],
        )
    emit(writer, config)
    return EXIT_OK


def _sigma_distance(estimate: float, exact: float, stderr: float) -> float:
    if stderr > 0.0:
        return abs(estimate - exact) / stderr
    return 0.0 if math.isclose(estimate, exact, abs_tol=1e-12) else math.inf


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    """
    Determinant path against the dense solve and Monte Carlo.

    Exit code 0 iff det-vs-dense deviations are within VERIFY_U_TOL and
    VERIFY_V_REL_TOL and the Monte Carlo estimates lie within
    MC_SIGMA_LIMIT standard errors.
    """
    N = require_N(config)
    if args.format is None:
        config.output_format = "json"
    i0 = _start_state(args, N, ChainMode.ABSORBING)
    if not 0 < i0 < N:
        raise ShapeMismatch(f"Start state {i0} must be interior to 0..{N}")

    verdict = classify(config.params)
    det = analyze_absorption(config.params, N, method="determinant", extended_precision=config.extended_precision)
    u_dense, v_dense = solve_absorption(build_transition_matrix(config.params, N, ChainMode.ABSORBING))

    u_dev = float(np.abs(det.u - u_dense).max())
    v_scale = max(1.0, float(np.abs(v_dense).max()))
    v_rel = float(np.abs(det.v - v_dense).max()) / v_scale

    mc = simulate(
        config.params,
        N,
        ChainMode.ABSORBING,
        i0,
        config.n_paths,
        seed=config.seed,
        workers=config.worker_count,
    )
    z_u = _sigma_distance(float(mc.values[0]), float(det.u[i0]), float(mc.stderr[0]))
    z_v = _sigma_distance(float(mc.values[1]), float(det.v[i0]), float(mc.stderr[1]))

    checks = {
        "det_vs_dense_u": u_dev <= VERIFY_U_TOL,
        "det_vs_dense_v": v_rel <= VERIFY_V_REL_TOL,
        "det_vs_mc_u": z_u <= MC_SIGMA_LIMIT,
        "det_vs_mc_v": z_v <= MC_SIGMA_LIMIT,
    }
    passed = all(checks.values())
    for name, ok in checks.items():
        if not ok:
            logger.error(f"Verification check failed: {name}")

    writer = ReportWriter()
    writer.create_report(f"Verification, N = {N}, start = {i0}")
    writer.add_mapping(
        {
            "params": config.params.to_dict(),
            "N": N,
            "start": i0,
            "near_critical": verdict.near_critical,
            "max_abs_dev_u": u_dev,
            "max_rel_dev_v": v_rel,
            "mc_sigma_u": z_u,
            "mc_sigma_v": z_v,
            "mc": mc.to_dict(),
            "checks": checks,
            "passed": passed,
        }
    )
    emit(writer, config)
    return EXIT_OK if passed else EXIT_TOLERANCE
