"""
Absorbing random leap on {0, ..., N}.

u_i = det(A_i Z) / det(A_N Z) is the probability of absorption at the upper
barrier and v_i = det(A*_i Z*) / det(A_N Z) the expected absorption time.
Overshooting a barrier counts as absorption there.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

try:
    from config.defaults import (
        IMAG_RESIDUE_TOL,
        NEAR_CRITICAL_AGREEMENT,
        NEAR_CRITICAL_BASE_DPS,
        NEAR_CRITICAL_CHECK_DPS,
        NEAR_CRITICAL_TIMES_DRIFT,
        NEGATIVE_CLAMP_TOL,
        TIME_CLAMP_REL_TOL,
        WALK_SERIES_MAX_ARG,
        WALK_SERIES_MAX_TERMS,
    )
except ImportError:
    from ..config.defaults import (
        IMAG_RESIDUE_TOL,
        NEAR_CRITICAL_AGREEMENT,
        NEAR_CRITICAL_BASE_DPS,
        NEAR_CRITICAL_CHECK_DPS,
        NEAR_CRITICAL_TIMES_DRIFT,
        NEGATIVE_CLAMP_TOL,
        TIME_CLAMP_REL_TOL,
        WALK_SERIES_MAX_ARG,
        WALK_SERIES_MAX_TERMS,
    )
from .char_poly import RootSet, char_poly, char_poly_mp, nonzero_roots, refine_roots, snap_unit_root
from .errors import BarrierTooNarrow, IllConditioned
from .leap_model import Drift, LeapParams, StepProfile, drift_moments, is_zero_drift, step_profile
from .matrix_forms import (
    accordion_product,
    accordion_product_mp,
    det_structured,
    extended_accordion_product,
    extended_accordion_product_mp,
)

logger = logging.getLogger(__name__)


class AbsorptionMethod(Enum):
    DETERMINANT = "determinant"
    EXTENDED_DETERMINANT = "extended_determinant"
    WALK_CLOSED_FORM = "walk_closed_form"


@dataclass(frozen=True)
class AbsorptionResult:
    """Upper absorption probabilities and expected absorption times."""
    u: np.ndarray
    v: np.ndarray
    max_imag_residue: float
    method: AbsorptionMethod
    clamped: int = 0
    roots: Optional[RootSet] = field(default=None, compare=False)

    @property
    def N(self) -> int:
        return len(self.u) - 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "u": self.u.tolist(),
            "v": self.v.tolist(),
            "diagnostics": {
                "method": self.method.value,
                "max_imag_residue": self.max_imag_residue,
                "clamped": self.clamped,
                "roots": self.roots.to_dict() if self.roots is not None else None,
            },
        }


def _check_barrier(N: int, profile: StepProfile) -> None:
    if N < profile.k_p + profile.k_q:
        raise BarrierTooNarrow(f"N = {N} is below k_p + k_q = {profile.k_p + profile.k_q}")


def _forward_roots(
    params: LeapParams,
    profile: StepProfile,
    drift: Drift,
    extended_precision: bool,
    force_extended: bool = False,
) -> RootSet:
    roots = nonzero_roots(
        char_poly(params), profile, extended_precision=extended_precision, force_extended=force_extended
    )
    return snap_unit_root(roots, drift)


def _clamp_probabilities(u: np.ndarray) -> int:
    """Clamp rounding undershoot into [0, 1] in place; return the number clamped."""
    if not np.all(np.isfinite(u)):
        raise IllConditioned("Absorption probabilities are not finite")
    low = u < 0.0
    high = u > 1.0
    if np.any(u < -NEGATIVE_CLAMP_TOL) or np.any(u > 1.0 + NEGATIVE_CLAMP_TOL):
        raise IllConditioned(
            f"Absorption probabilities leave [0, 1]: min {u.min():.3e}, max {u.max():.6f}"
        )
    u[low] = 0.0
    u[high] = 1.0
    return int(low.sum() + high.sum())


def _clamp_times(v: np.ndarray) -> int:
    if not np.all(np.isfinite(v)):
        raise IllConditioned("Expected absorption times are not finite")
    floor = -TIME_CLAMP_REL_TOL * max(1.0, float(np.abs(v).max()))
    if np.any(v < floor):
        raise IllConditioned(f"Negative expected absorption time {v.min():.3e}")
    low = v < 0.0
    v[low] = 0.0
    return int(low.sum())


def _finish(
    params: LeapParams,
    u: np.ndarray,
    v: np.ndarray,
    residues: List[float],
    roots: RootSet,
    want_times: bool,
    method: AbsorptionMethod,
) -> AbsorptionResult:
    u[-1] = 1.0
    v *= params.time_dilation

    max_residue = max(residues)
    if max_residue > IMAG_RESIDUE_TOL:
        raise IllConditioned(f"Imaginary residue {max_residue:.3e} exceeds {IMAG_RESIDUE_TOL}")

    clamped = _clamp_probabilities(u)
    if want_times:
        clamped += _clamp_times(v)
    if clamped:
        logger.warning(f"Clamped {clamped} values of magnitude below {NEGATIVE_CLAMP_TOL} to the valid range")
    return AbsorptionResult(
        u=u,
        v=v,
        max_imag_residue=max_residue,
        method=method,
        clamped=clamped,
        roots=roots,
    )


def _determinant_path(
    params: LeapParams,
    N: int,
    roots: RootSet,
    profile: StepProfile,
    drift: Drift,
    want_times: bool = True,
) -> AbsorptionResult:
    denom = det_structured(accordion_product(N, roots, N, profile))
    if denom.value == 0.0:
        raise IllConditioned("det(A_N Z) vanished")
    residues = [denom.imag_residue]

    u = np.zeros(N + 1)
    v = np.zeros(N + 1)
    for i in range(1, N):
        num = det_structured(accordion_product(i, roots, N, profile))
        u[i] = num.value / denom.value
        residues.append(num.imag_residue)
        if want_times:
            num_t = det_structured(extended_accordion_product(i, roots, N, drift, profile))
            v[i] = num_t.value / denom.value
            residues.append(num_t.imag_residue)
    return _finish(params, u, v, residues, roots, want_times, AbsorptionMethod.DETERMINANT)


def is_near_critical_for_times(drift: Drift) -> bool:
    """Nonzero drift small enough that the delta column cancels in double precision."""
    return not is_zero_drift(drift) and abs(drift.mu) <= NEAR_CRITICAL_TIMES_DRIFT


def near_critical_digits(drift: Drift, N: int) -> int:
    """mpmath digits for a near-critical leap: a base plus the digits 1/|mu| and N cost."""
    return (
        NEAR_CRITICAL_BASE_DPS
        + int(math.ceil(-math.log10(abs(drift.mu))))
        + int(math.ceil(math.log10(N)))
    )


def _residue(value: Any) -> float:
    return float(abs(value.imag) / (abs(value) + mpmath.mpf(np.finfo(float).tiny)))


def _extended_ratios(
    params: LeapParams,
    N: int,
    roots: RootSet,
    profile: StepProfile,
    dps: int,
    states: Sequence[int],
    want_times: bool,
) -> Tuple[Dict[int, Any], Dict[int, Any]]:
    """det(A_i Z) / det(A_N Z) and det(A*_i Z*) / det(A_N Z) in mpmath at ``dps`` digits."""
    with mpmath.workdps(dps):
        coeffs = char_poly_mp(params, profile)
        mu = mpmath.fsum(coeffs)
        refined = refine_roots(coeffs, roots)
        cache: Dict = {}
        denom = mpmath.det(accordion_product_mp(N, refined, N, profile, cache))
        if denom == 0:
            raise IllConditioned("det(A_N Z) vanished in extended precision")
        u: Dict[int, Any] = {}
        v: Dict[int, Any] = {}
        for i in states:
            u[i] = mpmath.det(accordion_product_mp(i, refined, N, profile, cache)) / denom
            if want_times:
                v[i] = mpmath.det(extended_accordion_product_mp(i, refined, N, mu, profile, cache)) / denom
    return u, v


def _near_critical_path(
    params: LeapParams,
    N: int,
    roots: RootSet,
    profile: StepProfile,
    drift: Drift,
) -> AbsorptionResult:
    """
    Determinant ratios evaluated in mpmath for 0 < |mu| <= NEAR_CRITICAL_TIMES_DRIFT.

    The midpoint time is recomputed with NEAR_CRITICAL_CHECK_DPS more digits;
    disagreement beyond NEAR_CRITICAL_AGREEMENT means the digits ran out.

    Raises:
        IllConditioned: The two precisions disagree.
    """
    dps = near_critical_digits(drift, N)
    logger.warning(
        f"Near-critical drift mu = {drift.mu:.3e}; evaluating absorption determinants in mpmath at {dps} digits"
    )
    states = range(1, N)
    u_mp, v_mp = _extended_ratios(params, N, roots, profile, dps, states, want_times=True)

    u = np.zeros(N + 1)
    v = np.zeros(N + 1)
    residues = [0.0]
    for i in states:
        u[i] = float(u_mp[i].real)
        v[i] = float(v_mp[i].real)
        residues.extend((_residue(u_mp[i]), _residue(v_mp[i])))

    mid = N // 2
    _, check = _extended_ratios(params, N, roots, profile, dps + NEAR_CRITICAL_CHECK_DPS, [mid], want_times=True)
    reference = float(check[mid].real)
    if abs(reference - v[mid]) > NEAR_CRITICAL_AGREEMENT * max(1.0, abs(reference)):
        raise IllConditioned(
            f"Expected time at {mid} moved from {v[mid]:.12g} to {reference:.12g} with "
            f"{NEAR_CRITICAL_CHECK_DPS} more digits"
        )
    return _finish(params, u, v, residues, roots, True, AbsorptionMethod.EXTENDED_DETERMINANT)


def _with_retry(params: LeapParams, N: int, extended_precision: bool, want_times: bool) -> AbsorptionResult:
    profile = step_profile(params)
    _check_barrier(N, profile)
    drift = drift_moments(params)
    roots = _forward_roots(params, profile, drift, extended_precision)
    if want_times and is_near_critical_for_times(drift):
        if extended_precision:
            return _near_critical_path(params, N, roots, profile, drift)
        lost = int(math.ceil(-math.log10(abs(drift.mu))))
        logger.warning(f"Near-critical drift mu = {drift.mu:.3e}; expected times may lose about {lost} digits")
    try:
        return _determinant_path(params, N, roots, profile, drift, want_times)
    except IllConditioned as e:
        if not extended_precision:
            raise
        logger.warning(f"Retrying with extended precision roots: {e}")
    roots = _forward_roots(params, profile, drift, extended_precision, force_extended=True)
    return _determinant_path(params, N, roots, profile, drift, want_times)


def _walk_times_series(log_z: float, N: int, i: np.ndarray) -> np.ndarray:
    """
    v_i for a nearly symmetric walk.

    i expm1(N t) - N expm1(i t) = i N sum_{n>=2} t^n (N^{n-1} - i^{n-1}) / n!,
    divided by expm1(N t) tanh(t / 2), with t = log((1-p)/p).
    """
    t = log_z
    # D = t^{n-1} (N^{n-1} - i^{n-1}), grown without subtracting powers
    D = (N - i) * t
    powers = np.ones_like(i)
    total = t * D / 2.0
    factorial = 2.0
    for n in range(3, WALK_SERIES_MAX_TERMS + 1):
        powers = powers * (i * t)
        D = N * t * D + powers * (N - i) * t
        factorial *= n
        term = t * D / factorial
        total = total + term
        if np.all(np.abs(term) <= np.finfo(float).eps * np.abs(total)):
            break
    return i * N * total / (math.expm1(N * t) * math.tanh(t / 2.0))


def walk_closed_forms(p: float, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gambler's ruin closed forms for the simple walk (k = 1).

    u_i = (1 - z^i) / (1 - z^N) with z = (1-p)/p and
    v_i = (i - N u_i) / (1 - 2p); for p = 1/2, u_i = i/N and v_i = i(N-i).
    Close to p = 1/2 the times come from a power series in log z.

    Args:
        p: Probability of a step to the right, 0 < p < 1.
        N: Upper barrier.

    Returns:
        (u, v) arrays of length N+1.

    Example:
        >>> round(walk_closed_forms(0.25, 4)[0][1], 12)
        0.025
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"Walk probability must be in (0, 1), got {p}")
    if N < 1:
        raise BarrierTooNarrow(f"N = {N} must be at least 1")
    i = np.arange(N + 1, dtype=float)
    if p == 0.5:
        return i / N, i * (N - i)

    log_z = math.log1p((1.0 - 2.0 * p) / p)
    if log_z < 0:
        u = np.expm1(i * log_z) / math.expm1(N * log_z)
    else:
        u = np.exp((i - N) * log_z) * np.expm1(-i * log_z) / math.expm1(-N * log_z)
    u[0], u[N] = 0.0, 1.0
    if abs(N * log_z) <= WALK_SERIES_MAX_ARG:
        v = _walk_times_series(log_z, N, i)
    else:
        v = (i - N * u) / (1.0 - 2.0 * p)
    v[0], v[N] = 0.0, 0.0
    return u, v


def _walk_step(params: LeapParams) -> Optional[float]:
    """Right-step probability if the leap is a simple walk (steps of size 1 only)."""
    profile = step_profile(params)
    if profile.k_p == 1 and profile.k_q == 1:
        return params.step_p[0]
    return None


def analyze_absorption(
    params: LeapParams,
    N: int,
    method: str = "auto",
    extended_precision: bool = True,
) -> AbsorptionResult:
    """
    Absorption probabilities and times for every starting state.

    Args:
        params: Validated leap.
        N: Upper barrier, at least k_p + k_q.
        method: "auto" uses the closed forms for simple walks,
            "determinant" always uses the determinant ratios.
        extended_precision: Allow a retry with extended precision roots.

    Raises:
        BarrierTooNarrow: N < k_p + k_q.
        IllConditioned: Results remain invalid after the retry.
    """
    if method not in ("auto", "determinant"):
        raise ValueError(f"Unknown method: {method}")
    walk_p = _walk_step(params) if method == "auto" else None
    if walk_p is not None:
        _check_barrier(N, step_profile(params))
        u, v = walk_closed_forms(walk_p, N)
        return AbsorptionResult(
            u=u,
            v=v * params.time_dilation,
            max_imag_residue=0.0,
            method=AbsorptionMethod.WALK_CLOSED_FORM,
        )
    logger.debug(f"Determinant path for k={params.k}, N={N}")
    return _with_retry(params, N, extended_precision, want_times=True)


def absorption_probabilities(params: LeapParams, N: int, extended_precision: bool = True) -> np.ndarray:
    """u_i = det(A_i Z) / det(A_N Z) for i = 0..N."""
    return _with_retry(params, N, extended_precision, want_times=False).u


def expected_absorption_times(params: LeapParams, N: int, extended_precision: bool = True) -> np.ndarray:
    """v_i = det(A*_i Z*) / det(A_N Z) for i = 0..N, scaled by 1/(1-hold)."""
    return _with_retry(params, N, extended_precision, want_times=True).v


def absorption_probability_at(params: LeapParams, N: int, i: int, extended_precision: bool = True) -> float:
    """
    Single-state u_i; two small determinants regardless of N.
    """
    profile = step_profile(params)
    _check_barrier(N, profile)
    if not 0 <= i <= N:
        raise ValueError(f"State {i} outside 0..{N}")
    if i in (0, N):
        return float(i == N)
    drift = drift_moments(params)
    roots = _forward_roots(params, profile, drift, extended_precision)
    denom = det_structured(accordion_product(N, roots, N, profile))
    num = det_structured(accordion_product(i, roots, N, profile))
    if denom.value == 0.0:
        raise IllConditioned("det(A_N Z) vanished")
    return min(max(num.value / denom.value, 0.0), 1.0)
