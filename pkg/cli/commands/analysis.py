"""
absorb, stationary and classify subcommands.
"""
from __future__ import annotations

import argparse
import logging

try:
    from config.defaults import EXIT_OK
    from core.absorbing import analyze_absorption
    from core.errors import ShapeMismatch
    from core.leap_model import drift_moments, step_profile
    from core.report_writer import ReportWriter
    from core.stationary import classify, stationary_one_sided, stationary_two_sided, uniform_limit_check
except ImportError:
    from ...config.defaults import EXIT_OK
    from ...core.absorbing import analyze_absorption
    from ...core.errors import ShapeMismatch
    from ...core.leap_model import drift_moments, step_profile
    from ...core.report_writer import ReportWriter
    from ...core.stationary import classify, stationary_one_sided, stationary_two_sided, uniform_limit_check
from .common import RunConfig, emit, parse_int_list, require_N

logger = logging.getLogger(__name__)


def _summary(config: RunConfig) -> dict:
    profile = step_profile(config.params)
    drift = drift_moments(config.params)
    return {
        "params": config.params.to_dict(),
        "k_p": profile.k_p,
        "k_q": profile.k_q,
        "mu": drift.mu,
        "sigma2": drift.sigma2,
    }


def cmd_absorb(config: RunConfig, args: argparse.Namespace) -> int:
    """u_i and v_i for every start state of the absorbing leap."""
    N = require_N(config)
    result = analyze_absorption(
        config.params, N, method=args.method, extended_precision=config.extended_precision
    )
    logger.info(f"Absorption computed for N={N} via {result.method.value}")

    writer = ReportWriter()
    writer.create_report(f"Absorbing random leap, N = {N}")
    data = result.to_dict()
    if config.output_format == "json":
        writer.add_mapping({"params": config.params.to_dict(), **data})
    else:
        summary = _summary(config)
        summary.pop("params")
        summary["method"] = result.method.value
        writer.add_mapping(summary)
        writer.add_table(
            "absorption",
            ["i", "u", "v"],
            [[i, float(result.u[i]), float(result.v[i])] for i in range(N + 1)],
        )
    emit(writer, config)
    return EXIT_OK


def cmd_stationary(config: RunConfig, args: argparse.Namespace) -> int:
    """Two-sided (--N), one-sided (--one-sided) or the finite-to-infinite limit check."""
    writer = ReportWriter()
    if args.limit_check:
        n_list = parse_int_list(args.N_list) or [20, 40, 80]
        report = uniform_limit_check(config.params, n_list, tail_tol=config.tail_tol)
        writer.create_report("Convergence of two-sided to one-sided stationary distributions")
        if config.output_format == "json":
            writer.add_mapping({"params": config.params.to_dict(), **report.to_dict()})
        else:
            writer.add_mapping(
                {
                    "monotone": report.monotone,
                    "converged_floor": report.converged_floor,
                    "one_sided_states": report.one_sided_states,
                }
            )
            writer.add_table(
                "sup_deviation",
                ["N", "sup_deviation"],
                [[n, d] for n, d in zip(report.n_list, report.sup_deviation)],
            )
        emit(writer, config)
        return EXIT_OK

    if args.one_sided:
        if config.N is not None:
            raise ShapeMismatch("--one-sided does not take --N")
        result = stationary_one_sided(
            config.params, tail_tol=config.tail_tol, extended_precision=config.extended_precision
        )
        writer.create_report("One-sided reflecting random leap")
    else:
        N = require_N(config)
        result = stationary_two_sided(config.params, N, extended_precision=config.extended_precision)
        writer.create_report(f"Two-sided reflecting random leap, N = {N}")

    if config.output_format == "json":
        writer.add_mapping({"params": config.params.to_dict(), **result.to_dict()})
    else:
        writer.add_mapping(
            {
                "support": result.support.value,
                "states": result.states,
                "residual": f"{result.residual:.3e}",
                "tail_bound": f"{result.tail_bound:.3e}",
            }
        )
        writer.add_table("stationary", ["i", "pi"], [[i, float(x)] for i, x in enumerate(result.pi)])
    emit(writer, config)
    return EXIT_OK


def cmd_classify(config: RunConfig, args: argparse.Namespace) -> int:
    verdict = classify(config.params)
    writer = ReportWriter()
    writer.create_report("Classification of the unrestricted random leap")
    data = verdict.to_dict()
    if config.output_format == "json":
        writer.add_mapping({"params": config.params.to_dict(), **data})
    else:
        data["mu"] = f"{verdict.mu:.6g}"
        data["sigma2"] = f"{verdict.sigma2:.6g}"
        writer.add_mapping(data)
    if config.output_format == "csv":
        writer.add_table("classification", list(data), [list(verdict.to_dict().values())])
    emit(writer, config)
    return EXIT_OK
