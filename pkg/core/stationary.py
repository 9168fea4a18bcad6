"""
Recurrence classification and stationary distributions of reflecting leaps.

Two-sided leaps on {0..N} use pi_i proportional to det(W_i); one-sided
leaps on {0, 1, ...} with negative drift use pi_i proportional to
det(Omega_i), truncated once the geometric tail is below ``tail_tol``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    from config.defaults import (
        DEFAULT_TAIL_TOL,
        IMAG_RESIDUE_TOL,
        LIMIT_CONVERGED_TOL,
        NEAR_CRITICAL_DRIFT,
        ONE_SIDED_MAX_STATES,
        ONE_SIDED_RESIDUAL_TOL,
        STATIONARY_NEGATIVE_TOL,
        TWO_SIDED_RESIDUAL_TOL,
    )
except ImportError:
    from ..config.defaults import (
        DEFAULT_TAIL_TOL,
        IMAG_RESIDUE_TOL,
        LIMIT_CONVERGED_TOL,
        NEAR_CRITICAL_DRIFT,
        ONE_SIDED_MAX_STATES,
        ONE_SIDED_RESIDUAL_TOL,
        STATIONARY_NEGATIVE_TOL,
        TWO_SIDED_RESIDUAL_TOL,
    )
from .char_poly import (
    LocationReport,
    RootSet,
    char_poly,
    nonzero_roots,
    reverse_char_poly,
    root_location_counts,
    sorted_inverse_roots,
)
from .errors import BarrierTooNarrow, IllConditioned, NoStationaryDistribution, NotIrreducible
from .leap_model import Drift, LeapParams, StepProfile, drift_moments, drift_sign, is_zero_drift, step_profile
from .matrix_forms import det_structured, modified_accordion_product, omega_matrix
from .oracle import ChainMode, apply_transition

logger = logging.getLogger(__name__)


class Verdict(Enum):
    TRANSIENT_RIGHT = "transient_right"
    TRANSIENT_LEFT = "transient_left"
    NULL_RECURRENT = "null_recurrent"


class SupportKind(Enum):
    TWO_SIDED = "two_sided"
    ONE_SIDED_TRUNCATED = "one_sided_truncated"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    mu: float
    sigma2: float
    has_stationary: bool = False
    near_critical: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "mu": self.mu,
            "sigma2": self.sigma2,
            "has_stationary": self.has_stationary,
            "near_critical": self.near_critical,
        }


@dataclass(frozen=True)
class StationaryResult:
    """
    Stationary distribution of a reflecting leap.

    ``states`` is N for two-sided support and the truncation index M for
    one-sided support; ``tail_bound`` is 0 for two-sided results.
    """
    pi: np.ndarray
    residual: float
    tail_bound: float
    support: SupportKind
    states: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "support": self.support.value,
            "states": self.states,
            "pi": self.pi.tolist(),
            "residual": self.residual,
            "tail_bound": self.tail_bound,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    n_list: Tuple[int, ...]
    sup_deviation: Tuple[float, ...]
    monotone: bool
    one_sided_states: int
    converged_floor: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": list(self.n_list),
            "sup_deviation": list(self.sup_deviation),
            "monotone": self.monotone,
            "converged_floor": self.converged_floor,
            "one_sided_states": self.one_sided_states,
        }


# =============================================================================
# Classification
# =============================================================================
def _is_near_critical(drift: Drift) -> bool:
    if drift.mu_exact is not None:
        return drift.mu_exact != 0 and abs(drift.mu) <= NEAR_CRITICAL_DRIFT
    return abs(drift.mu) <= NEAR_CRITICAL_DRIFT


def classify(params: LeapParams) -> Classification:
    """
    Transient to the right, transient to the left or null recurrent, by sign(mu).

    A simple leap on the integers never has a stationary distribution.
    """
    drift = drift_moments(params)
    sign = drift_sign(drift)
    near_critical = _is_near_critical(drift)
    if near_critical:
        if drift.mu_exact is None and is_zero_drift(drift):
            logger.warning(f"Drift {drift.mu:.3e} treated as zero; classification is near-critical")
        else:
            logger.warning(f"Near-critical drift mu = {drift.mu:.3e}")

    if sign > 0:
        verdict = Verdict.TRANSIENT_RIGHT
    elif sign < 0:
        verdict = Verdict.TRANSIENT_LEFT
    else:
        verdict = Verdict.NULL_RECURRENT
    return Classification(
        verdict=verdict, mu=drift.mu, sigma2=drift.sigma2, near_critical=near_critical
    )


# =============================================================================
# Shared root handling
# =============================================================================
def _require_irreducible(profile: StepProfile) -> None:
    if profile.gcd_support != 1:
        raise NotIrreducible(
            f"Step support has gcd {profile.gcd_support}; the reflecting chain is not irreducible"
        )


def _located_inverse_roots(
    params: LeapParams,
    profile: StepProfile,
    drift: Drift,
    extended_precision: bool,
    force_extended: bool = False,
) -> LocationReport:
    forward = nonzero_roots(
        char_poly(params), profile, extended_precision=extended_precision, force_extended=force_extended
    )
    return root_location_counts(
        sorted_inverse_roots(forward),
        drift,
        profile,
        poly=reverse_char_poly(params),
        extended_precision=extended_precision,
    )


def _clamp_distribution(pi: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(pi)):
        raise IllConditioned("Stationary vector is not finite")
    if np.any(pi < -STATIONARY_NEGATIVE_TOL):
        raise IllConditioned(f"Stationary vector has negative entry {pi.min():.3e}")
    if np.any(pi < 0):
        logger.warning(f"Clamped {int((pi < 0).sum())} tiny negative stationary entries to 0")
        pi = np.maximum(pi, 0.0)
        pi = pi / pi.sum()
    return pi


# =============================================================================
# Two-sided
# =============================================================================
def _two_sided(params: LeapParams, N: int, inv_roots: RootSet) -> StationaryResult:
    dets = [det_structured(modified_accordion_product(i, inv_roots, N, params)) for i in range(N + 1)]
    worst = max(d.imag_residue for d in dets)
    if worst > IMAG_RESIDUE_TOL:
        raise IllConditioned(f"Imaginary residue {worst:.3e} exceeds {IMAG_RESIDUE_TOL}")
    values = np.array([d.value for d in dets])
    total = values.sum()
    if total == 0.0 or not np.isfinite(total):
        raise IllConditioned("Sum of det(W_i) vanished")

    pi = _clamp_distribution(values / total)
    residual = float(np.abs(apply_transition(pi, params, N, ChainMode.REFLECTING_TWO_SIDED) - pi).max())
    if residual > TWO_SIDED_RESIDUAL_TOL:
        raise IllConditioned(f"Stationary residual {residual:.3e} exceeds {TWO_SIDED_RESIDUAL_TOL}")
    return StationaryResult(pi=pi, residual=residual, tail_bound=0.0, support=SupportKind.TWO_SIDED, states=N)


def stationary_two_sided(params: LeapParams, N: int, extended_precision: bool = True) -> StationaryResult:
    """
    Stationary distribution of the two-sided reflecting leap on {0..N}.

    Args:
        params: Validated leap with gcd of the step support equal to 1.
        N: Upper barrier, at least k_p + k_q.
        extended_precision: Allow a retry with extended precision roots.

    Raises:
        NotIrreducible: gcd of the step support exceeds 1.
        BarrierTooNarrow: N < k_p + k_q.
        IllConditioned: Residual or sign checks fail after the retry.
    """
    profile = step_profile(params)
    _require_irreducible(profile)
    if N < profile.k_p + profile.k_q:
        raise BarrierTooNarrow(f"N = {N} is below k_p + k_q = {profile.k_p + profile.k_q}")
    drift = drift_moments(params)

    report = _located_inverse_roots(params, profile, drift, extended_precision)
    try:
        return _two_sided(params, N, report.rootset)
    except IllConditioned as e:
        if not extended_precision:
            raise
        logger.warning(f"Retrying two-sided stationary distribution with extended precision roots: {e}")
    report = _located_inverse_roots(params, profile, drift, extended_precision, force_extended=True)
    return _two_sided(params, N, report.rootset)


# =============================================================================
# One-sided
# =============================================================================
def _one_sided(params: LeapParams, inside: RootSet, profile: StepProfile, tail_tol: float) -> StationaryResult:
    rho = max(abs(root.value) for root in inside.roots)
    max_mult = max(root.multiplicity for root in inside.roots)
    min_states = 2 * profile.r + 1

    values: List[float] = []
    partial = 0.0
    streak = 0
    tail = math.inf
    i = 0
    while True:
        det = det_structured(omega_matrix(i, inside, params))
        if det.imag_residue > IMAG_RESIDUE_TOL:
            raise IllConditioned(f"Imaginary residue {det.imag_residue:.3e} at state {i}")
        values.append(det.value)
        partial += det.value

        rho_eff = rho * (1.0 + 1.0 / (i + 1)) ** (max_mult - 1)
        if i >= min_states and rho_eff < 1.0 and partial != 0.0:
            tail = abs(det.value) * rho_eff / (1.0 - rho_eff)
            streak = streak + 1 if tail < tail_tol * abs(partial) else 0
            if streak > profile.r:
                break
        i += 1
        if i >= ONE_SIDED_MAX_STATES:
            raise IllConditioned(
                f"One-sided tail still above {tail_tol} after {ONE_SIDED_MAX_STATES} states (rho = {rho:.6f})"
            )

    M = len(values) - 1
    pi = _clamp_distribution(np.array(values) / partial)
    retained = max(M - params.k, 0)
    image = apply_transition(pi, params, M, ChainMode.REFLECTING_ONE_SIDED_TRUNCATED)
    residual = float(np.abs(image[: retained + 1] - pi[: retained + 1]).max())
    if residual > ONE_SIDED_RESIDUAL_TOL:
        raise IllConditioned(f"One-sided residual {residual:.3e} exceeds {ONE_SIDED_RESIDUAL_TOL}")
    logger.debug(f"One-sided truncation at M={M}, rho={rho:.6f}")
    return StationaryResult(
        pi=pi,
        residual=residual,
        tail_bound=tail / abs(partial),
        support=SupportKind.ONE_SIDED_TRUNCATED,
        states=M,
    )


def stationary_one_sided(
    params: LeapParams,
    tail_tol: float = DEFAULT_TAIL_TOL,
    extended_precision: bool = True,
) -> StationaryResult:
    """
    Stationary distribution of the one-sided reflecting leap on {0, 1, ...}.

    Only the k_p roots of psi inside the unit circle enter Omega_i. The sum
    of det(Omega_i) stops once the geometric tail estimate falls below
    ``tail_tol`` times the partial sum for r + 1 consecutive states.

    Raises:
        NotIrreducible: gcd of the step support exceeds 1.
        NoStationaryDistribution: mu >= 0, or mu numerically zero.
        IllConditioned: Truncation, residual or sign checks fail.
    """
    if not 0.0 < tail_tol < 1.0:
        raise ValueError(f"tail_tol must lie in (0, 1), got {tail_tol}")
    profile = step_profile(params)
    _require_irreducible(profile)
    drift = drift_moments(params)
    if drift_sign(drift) >= 0:
        if drift.mu_exact is None and is_zero_drift(drift) and drift.mu != 0.0:
            logger.warning(f"Near-critical drift mu = {drift.mu:.3e}; refusing one-sided computation")
        raise NoStationaryDistribution(
            f"One-sided reflecting leap with mu = {drift.mu:.6g} >= 0 has no stationary distribution"
        )

    report = _located_inverse_roots(params, profile, drift, extended_precision)
    try:
        return _one_sided(params, report.inside_roots(), profile, tail_tol)
    except IllConditioned as e:
        if not extended_precision:
            raise
        logger.warning(f"Retrying one-sided stationary distribution with extended precision roots: {e}")
    report = _located_inverse_roots(params, profile, drift, extended_precision, force_extended=True)
    return _one_sided(params, report.inside_roots(), profile, tail_tol)


def walk_geometric_stationary(p: float, n_states: int) -> np.ndarray:
    """(1 - y) y^i with y = p / (1 - p), for the one-sided walk with p < 1/2."""
    if not 0.0 < p < 0.5:
        raise NoStationaryDistribution(f"Walk with p = {p} has no one-sided stationary distribution")
    y = p / (1.0 - p)
    return (1.0 - y) * y ** np.arange(n_states)


def jump_stationary_closed_form(params: LeapParams, n_states: int) -> np.ndarray:
    """
    Closed form for two rightward step sizes:
    pi_i = (1-y1)(1-y2)/(y1-y2) (y1^(i+1) - y2^(i+1)), y1, y2 the inside roots of psi.
    """
    profile = step_profile(params)
    if profile.k_p != 2:
        raise ValueError(f"Closed form needs k_p = 2, got k_p = {profile.k_p}")
    _require_irreducible(profile)
    drift = drift_moments(params)
    if drift_sign(drift) >= 0:
        raise NoStationaryDistribution(f"mu = {drift.mu:.6g} >= 0")

    inside = _located_inverse_roots(params, profile, drift, extended_precision=True).inside_roots()
    values = inside.values()
    i = np.arange(n_states)
    if len(inside.roots) == 1:
        y = values[0]
        pi = (1 - y) ** 2 * (i + 1) * y ** i
    else:
        y1, y2 = values
        pi = (1 - y1) * (1 - y2) / (y1 - y2) * (y1 ** (i + 1) - y2 ** (i + 1))
    return np.real(pi)


def uniform_limit_check(
    params: LeapParams,
    N_list: Sequence[int],
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> ConvergenceReport:
    """
    sup_i |pi^(N)_i - pi^(inf)_i| for each N, zero-padding the shorter vector.

    The sequence counts as monotone when every deviation is below its
    predecessor or already at the converged floor, max(LIMIT_CONVERGED_TOL,
    10 tail_tol), where truncation and rounding noise take over.

    Raises:
        NoStationaryDistribution: mu >= 0.
    """
    if not N_list:
        raise ValueError("N_list must not be empty")
    limit = stationary_one_sided(params, tail_tol=tail_tol)
    deviations: List[float] = []
    for N in N_list:
        finite = stationary_two_sided(params, N).pi
        length = max(len(finite), len(limit.pi))
        a = np.pad(finite, (0, length - len(finite)))
        b = np.pad(limit.pi, (0, length - len(limit.pi)))
        deviations.append(float(np.abs(a - b).max()))
        logger.info(f"N={N}: sup deviation {deviations[-1]:.3e}")

    floor = max(LIMIT_CONVERGED_TOL, 10.0 * tail_tol)
    monotone = all(later < earlier or later <= floor for earlier, later in zip(deviations, deviations[1:]))
    return ConvergenceReport(
        n_list=tuple(N_list),
        sup_deviation=tuple(deviations),
        monotone=monotone,
        one_sided_states=limit.states + 1,
        converged_floor=floor,
    )
