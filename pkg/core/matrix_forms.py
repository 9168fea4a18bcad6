"""
Structured matrices of the determinant formulas and their determinants.

Every matrix here is at most (2k+1) x (2k+1). Its rows are linear
combinations of rows of an infinite root matrix (entries e^(l-1) z^e for
exponent e), so each entry is a power sum sum_{e=a}^{b} e^m z^e evaluated in
closed form. The cost of a query therefore does not depend on N.

Column conventions:
    * one column per root and multiplicity level l = 1..m;
    * a conjugate pair (z, conj z) is stored as the real-part and
      imaginary-part columns, which multiplies every determinant over the
      same roots by the same constant;
    * a column with |z| > 1 is scaled by |z|^(-e_max), e_max being the largest
      exponent of the matrix family. ``scale_log`` records the total.
"""
from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import scipy.linalg

try:
    from config.defaults import DIRECT_SUM_MAX_TERMS, UNIT_ROOT_TOL
except ImportError:
    from ..config.defaults import DIRECT_SUM_MAX_TERMS, UNIT_ROOT_TOL
from .char_poly import RootSet
from .errors import (
    BarrierTooNarrow,
    DivergentSum,
    IllConditioned,
    NotIrreducible,
    PositiveDrift,
)
from .leap_model import Drift, LeapParams, StepProfile, drift_moments, drift_sign, is_zero_drift, step_profile

logger = logging.getLogger(__name__)


class MatrixKind(Enum):
    AZ = "AZ"
    ASTAR_ZSTAR = "AStarZStar"
    ADAGGER_Y = "ADaggerY"
    W = "W"
    OMEGA = "Omega"


@dataclass(frozen=True)
class PowerSumSpec:
    """sum_{j=a}^{b} j^m z^j; b may be math.inf when |z| < 1."""
    z: complex
    m: int
    a: int
    b: Union[int, float]


@dataclass(frozen=True)
class StructuredMatrix:
    entries: np.ndarray
    kind: MatrixKind
    scale_log: float = 0.0

    def __post_init__(self):
        rows, cols = self.entries.shape
        if rows != cols:
            raise ValueError(f"{self.kind.value} matrix is {rows}x{cols}, expected square")

    @property
    def size(self) -> int:
        return self.entries.shape[0]


class Determinant(NamedTuple):
    value: float
    imag_residue: float


@dataclass(frozen=True)
class Term:
    """Weighted sum of root-matrix rows with exponents lo..hi."""
    lo: int
    hi: Union[int, float]
    weight: float = 1.0


Row = Tuple[Term, ...]


# =============================================================================
# Power sums
# =============================================================================
def _powers(z: complex, exponents: np.ndarray, log_scale: float) -> np.ndarray:
    """z^e * exp(-log_scale) for integer exponents, exact sign for negative reals."""
    if z.imag == 0 and z.real < 0:
        magnitude = np.exp(exponents * math.log(-z.real) - log_scale)
        signs = np.where(np.asarray(exponents, dtype=np.int64) % 2 == 0, 1.0, -1.0)
        return (signs * magnitude).astype(complex)
    return np.exp(exponents * cmath.log(z) - log_scale)


def _power(z: complex, e: int, log_scale: float) -> complex:
    return complex(_powers(z, np.array([float(e)]), log_scale)[0])


@lru_cache(maxsize=4096)
def _faulhaber(m: int, n: int) -> int:
    """sum_{j=1}^{n} j^m for n >= 0, exact."""
    if n <= 0:
        return 0
    acc = Fraction((n + 1) ** (m + 1) - 1)
    for t in range(m):
        acc -= math.comb(m + 1, t) * _faulhaber(t, n)
    return int(acc / (m + 1))


def integer_power_sum(m: int, a: int, b: int) -> int:
    """
    Exact sum_{j=a}^{b} j^m over integers (0^0 = 1).

    Example:
        >>> integer_power_sum(1, 1, 10)
        55
    """
    if b < a:
        return 0
    total = 0
    if b >= 1:
        total += _faulhaber(m, b) - _faulhaber(m, max(a, 1) - 1)
    if a <= 0 <= b and m == 0:
        total += 1
    if a <= -1:
        hi = min(b, -1)
        total += (-1) ** m * (_faulhaber(m, -a) - _faulhaber(m, -hi - 1))
    return total


def power_sum(spec: PowerSumSpec, log_scale: float = 0.0) -> complex:
    """
    Closed form of sum_{j=a}^{b} j^m z^j, multiplied by exp(-log_scale).

    Short ranges are summed term by term and z within UNIT_ROOT_TOL of 1 uses
    exact integer sums. Otherwise S_m follows from S_0..S_{m-1} through
    (1-z) S_m = (a-1)^m z^a - b^m z^(b+1) - sum_{t<m} C(m,t) (-1)^(m-t) S_t,
    with the z^(b+1) term absent for b = inf.

    Args:
        spec: Root, degree and range.
        log_scale: Column scale factored out of every term.

    Returns:
        The scaled sum.

    Raises:
        DivergentSum: b is infinite and |z| >= 1.

    Example:
        >>> power_sum(PowerSumSpec(2, 0, 1, 3))
        (14+0j)
    """
    z = complex(spec.z)
    m, a, b = spec.m, spec.a, spec.b
    infinite = math.isinf(b)
    if infinite and abs(z) >= 1.0:
        raise DivergentSum(f"Infinite power sum diverges for |z| = {abs(z):.6g}")
    if not infinite and b < a:
        return 0j
    if z == 0:
        return complex(math.exp(-log_scale)) if (m == 0 and a <= 0 <= b) else 0j

    if not infinite and b - a <= DIRECT_SUM_MAX_TERMS:
        j = np.arange(a, int(b) + 1, dtype=float)
        return complex(np.sum(j ** m * _powers(z, j, log_scale)))

    if not infinite and abs(z - 1.0) <= UNIT_ROOT_TOL:
        return complex(float(integer_power_sum(m, a, int(b))) * math.exp(-log_scale))

    head = _power(z, a, log_scale)
    tail = 0j if infinite else _power(z, int(b) + 1, log_scale)
    sums: List[complex] = []
    for degree in range(m + 1):
        acc = float(a - 1) ** degree * head
        if not infinite:
            acc -= float(b) ** degree * tail
        for t in range(degree):
            acc -= math.comb(degree, t) * (-1) ** (degree - t) * sums[t]
        sums.append(acc / (1.0 - z))
    return sums[m]


# =============================================================================
# Row and column assembly
# =============================================================================
def _point(e: int, weight: float = 1.0) -> Row:
    return (Term(e, e, weight),)


def _span(a: int, b: Union[int, float]) -> Row:
    return (Term(a, b),)


def _row_value(row: Row, z: complex, degree: int, log_scale: float) -> complex:
    return sum(
        (term.weight * power_sum(PowerSumSpec(z, degree, term.lo, term.hi), log_scale) for term in row),
        0j,
    )


def _column_scales(roots: RootSet, e_max: int) -> List[float]:
    return [e_max * math.log(abs(r.value)) if abs(r.value) > 1.0 else 0.0 for r in roots.roots]


def _root_columns(
    roots: RootSet,
    rows: Sequence[Row],
    scales: Sequence[float],
    column_weights: Optional[Sequence[float]] = None,
) -> Tuple[np.ndarray, float]:
    """
    Evaluate rows against every root column.

    Returns:
        (matrix of shape len(rows) x r, total log scale of the columns)
    """
    columns: List[np.ndarray] = []
    total_scale = 0.0
    for idx, root in enumerate(roots.roots):
        z = root.value
        if z.imag < 0:
            continue
        weight = 1.0 if column_weights is None else float(column_weights[idx])
        for level in range(root.multiplicity):
            col = weight * np.array([_row_value(row, z, level, scales[idx]) for row in rows], dtype=complex)
            if z.imag == 0:
                columns.append(col.real)
                total_scale += scales[idx]
            else:
                columns.append(col.real)
                columns.append(col.imag)
                total_scale += 2.0 * scales[idx]
    return np.column_stack(columns) if columns else np.zeros((len(rows), 0)), total_scale


def _check_barrier(N: int, profile: StepProfile) -> None:
    if N < profile.k_p + profile.k_q:
        raise BarrierTooNarrow(f"N = {N} is below k_p + k_q = {profile.k_p + profile.k_q}")


def _check_state(i: int, N: int) -> None:
    if not 0 <= i <= N:
        raise ValueError(f"State {i} outside 0..{N}")


def _check_total(roots: RootSet, expected: int) -> None:
    if roots.total != expected:
        raise ValueError(f"Expected {expected} roots, got {roots.total}")


def accordion_rows(i: int, N: int, profile: StepProfile) -> List[Row]:
    """
    Rows of A_i applied to Z, as exponent ranges.

    Z row n carries exponent n + 1 - k_q, so the k_q - 1 leading rows have
    exponents 2-k_q..0, the summed middle block covers 1..i and the k_p - 1
    trailing rows have exponents N+1..N+k_p-1.
    """
    rows = [_point(e) for e in range(2 - profile.k_q, 1)]
    rows.append(_span(1, i))
    rows.extend(_point(e) for e in range(N + 1, N + profile.k_p))
    return rows


def accordion_product(
    i: int,
    roots: RootSet,
    N: int,
    profile: StepProfile,
    column_weights: Optional[Sequence[float]] = None,
) -> StructuredMatrix:
    """
    The r x r matrix A_i Z.

    Raises:
        BarrierTooNarrow: N < k_p + k_q.
    """
    _check_barrier(N, profile)
    _check_state(i, N)
    _check_total(roots, profile.r)
    scales = _column_scales(roots, N + profile.k_p - 1)
    entries, scale_log = _root_columns(roots, accordion_rows(i, N, profile), scales, column_weights)
    return StructuredMatrix(entries=entries.astype(complex), kind=MatrixKind.AZ, scale_log=scale_log)


def _delta_sum(term: Term, drift: Drift) -> float:
    """sum of delta_e over term.lo..term.hi, delta_e = -1/mu or -2e/sigma2."""
    if term.hi < term.lo:
        return 0.0
    count = term.hi - term.lo + 1
    if is_zero_drift(drift):
        return -term.weight * (term.lo + term.hi) * count / drift.sigma2
    return -term.weight * count / drift.mu


def extended_accordion_product(
    i: int,
    roots: RootSet,
    N: int,
    drift: Drift,
    profile: StepProfile,
    column_weights: Optional[Sequence[float]] = None,
) -> StructuredMatrix:
    """
    The (r+1) x (r+1) matrix A*_i Z*: the rows of A_N Z followed by the
    summed 1..i row, with the delta column appended.

    Example (walk, p = 1/2):
        [[N, -N(N+1)], [i, -i(i+1)]]
    """
    _check_barrier(N, profile)
    _check_state(i, N)
    _check_total(roots, profile.r)
    rows = accordion_rows(N, N, profile) + [_span(1, i)]
    scales = _column_scales(roots, N + profile.k_p - 1)
    body, scale_log = _root_columns(roots, rows, scales, column_weights)
    delta = np.array([sum(_delta_sum(term, drift) for term in row) for row in rows])
    entries = np.column_stack([body, delta]).astype(complex)
    return StructuredMatrix(entries=entries, kind=MatrixKind.ASTAR_ZSTAR, scale_log=scale_log)


def eta_row(params: LeapParams, profile: StepProfile) -> Row:
    """eta^T Y restricted to its nonzero exponents 1..k_q."""
    q = params.step_q
    terms = []
    for e in range(1, profile.k_q + 1):
        weight = math.fsum((ell - e + 1) * q[ell - 1] for ell in range(e, profile.k_q + 1))
        terms.append(Term(e, e, weight))
    return tuple(terms)


def _corner(params: LeapParams, profile: StepProfile) -> float:
    """sum_l p_l - sum_l l q_l."""
    return math.fsum(params.step_p) - math.fsum(
        ell * x for ell, x in enumerate(params.step_q, start=1)
    )


def _unit_difference(size: int, k_p: int) -> np.ndarray:
    """e_{k_p - 1} - e_{k_p} of the given length (first term absent when k_p = 1)."""
    column = np.zeros(size)
    if k_p >= 2:
        column[k_p - 2] = 1.0
    column[k_p - 1] = -1.0
    return column


def modified_accordion_rows(i: int, N: int, profile: StepProfile) -> List[Row]:
    """
    Rows of A-dagger_i applied to Y (exponent of Y row n is n + 1 - k_p).

    With k_q >= 2 the 1..N+1 middle block is split into 1..i and i+1..N+1
    followed by exponents N+2..N+k_q-1; with k_q = 1 only the 1..i sum remains.
    """
    rows = [_point(e) for e in range(2 - profile.k_p, 1)]
    rows.append(_span(1, i))
    if profile.k_q >= 2:
        rows.append(_span(i + 1, N + 1))
        rows.extend(_point(e) for e in range(N + 2, N + profile.k_q))
    return rows


def modified_accordion_product(
    i: int,
    inv_roots: RootSet,
    N: int,
    params: LeapParams,
    column_weights: Optional[Sequence[float]] = None,
) -> StructuredMatrix:
    """
    The (r+1) x (r+1) matrix W_i of the two-sided reflecting leap.

    Raises:
        NotIrreducible: gcd of the step support exceeds 1.
        BarrierTooNarrow: N < k_p + k_q.
    """
    profile = step_profile(params)
    if profile.gcd_support != 1:
        raise NotIrreducible(f"Step support has gcd {profile.gcd_support}")
    _check_barrier(N, profile)
    _check_state(i, N)
    _check_total(inv_roots, profile.r)

    rows = modified_accordion_rows(i, N, profile) + [eta_row(params, profile)]
    scales = _column_scales(inv_roots, N + profile.k_q - 1)
    body, scale_log = _root_columns(inv_roots, rows, scales, column_weights)
    last = _unit_difference(len(rows), profile.k_p)
    last[-1] = _corner(params, profile)
    entries = np.column_stack([body, last]).astype(complex)
    return StructuredMatrix(entries=entries, kind=MatrixKind.W, scale_log=scale_log)


def omega_matrix(
    i: int,
    inv_roots_inside: RootSet,
    params: LeapParams,
    column_weights: Optional[Sequence[float]] = None,
) -> StructuredMatrix:
    """
    The (k_p+1) x (k_p+1) matrix Omega_i of the one-sided reflecting leap,
    built on the k_p roots of psi inside the unit circle.

    Raises:
        PositiveDrift: mu >= 0.
        NotIrreducible: gcd of the step support exceeds 1.
    """
    drift = drift_moments(params)
    if drift_sign(drift) >= 0:
        raise PositiveDrift(f"Omega matrices need mu < 0, got mu = {drift.mu:.6g}")
    profile = step_profile(params)
    if profile.gcd_support != 1:
        raise NotIrreducible(f"Step support has gcd {profile.gcd_support}")
    if i < 0:
        raise ValueError(f"State {i} is negative")
    _check_total(inv_roots_inside, profile.k_p)

    rows = [_point(e) for e in range(2 - profile.k_p, 1)]
    rows.append(_span(1, i))
    rows.append(eta_row(params, profile))
    body, _ = _root_columns(inv_roots_inside, rows, [0.0] * len(inv_roots_inside.roots), column_weights)
    last = _unit_difference(len(rows), profile.k_p)
    last[-1] = _corner(params, profile)
    entries = np.column_stack([body, last]).astype(complex)
    return StructuredMatrix(entries=entries, kind=MatrixKind.OMEGA, scale_log=0.0)


# =============================================================================
# Extended precision
# =============================================================================
MpRoots = Sequence[Tuple[Any, int]]
RowCache = Dict[Tuple[Row, int, int], Any]


def power_sum_mp(z: Any, m: int, a: int, b: int) -> Any:
    """
    sum_{j=a}^{b} j^m z^j at the current mpmath precision, z != 1.

    Same recurrence as power_sum without column scaling; mpmath exponents
    do not overflow.
    """
    if b < a:
        return mpmath.mpf(0)
    if b - a <= DIRECT_SUM_MAX_TERMS:
        return mpmath.fsum(mpmath.mpf(j) ** m * z**j for j in range(a, b + 1))
    head = z**a
    tail = z ** (b + 1)
    sums: List[Any] = []
    for degree in range(m + 1):
        acc = mpmath.mpf(a - 1) ** degree * head - mpmath.mpf(b) ** degree * tail
        for t in range(degree):
            acc -= math.comb(degree, t) * (-1) ** (degree - t) * sums[t]
        sums.append(acc / (1 - z))
    return sums[m]


def _root_columns_mp(roots: MpRoots, rows: Sequence[Row], cache: Optional[RowCache]) -> List[List[Any]]:
    """One complex column per root and level; conjugate pairs are not realified."""
    cache = {} if cache is None else cache
    matrix: List[List[Any]] = [[] for _ in rows]
    for idx, (z, multiplicity) in enumerate(roots):
        for level in range(multiplicity):
            for n, row in enumerate(rows):
                key = (row, idx, level)
                if key not in cache:
                    cache[key] = mpmath.fsum(
                        term.weight * power_sum_mp(z, level, term.lo, int(term.hi)) for term in row
                    )
                matrix[n].append(cache[key])
    return matrix


def accordion_product_mp(
    i: int, roots: MpRoots, N: int, profile: StepProfile, cache: Optional[RowCache] = None
) -> Any:
    """A_i Z as an mpmath matrix over refined roots."""
    _check_barrier(N, profile)
    _check_state(i, N)
    return mpmath.matrix(_root_columns_mp(roots, accordion_rows(i, N, profile), cache))


def extended_accordion_product_mp(
    i: int, roots: MpRoots, N: int, mu: Any, profile: StepProfile, cache: Optional[RowCache] = None
) -> Any:
    """
    A*_i Z* as an mpmath matrix for nonzero drift ``mu`` given at the working
    precision. The delta column no longer cancels against the root near 1.
    """
    _check_barrier(N, profile)
    _check_state(i, N)
    rows = accordion_rows(N, N, profile) + [_span(1, i)]
    body = _root_columns_mp(roots, rows, cache)
    for n, row in enumerate(rows):
        body[n].append(mpmath.fsum(-term.weight * (int(term.hi) - term.lo + 1) / mu for term in row))
    return mpmath.matrix(body)


# =============================================================================
# Determinants
# =============================================================================
def det_structured(m: Union[StructuredMatrix, np.ndarray]) -> Determinant:
    """
    Determinant by LU with partial pivoting.

    Returns:
        Determinant(value=Re(det), imag_residue=|Im det| / (|det| + eps)).
        A singular matrix gives value 0.

    Example:
        >>> det_structured(np.array([[1.0, 2.0], [3.0, 4.0]])).value
        -2.0
    """
    entries = np.asarray(m.entries if isinstance(m, StructuredMatrix) else m, dtype=complex)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"Determinant of a non-square array of shape {entries.shape}")
    if entries.shape[0] == 0:
        return Determinant(1.0, 0.0)
    if not np.all(np.isfinite(entries)):
        raise IllConditioned("Structured matrix has non-finite entries")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        warnings.simplefilter("ignore", RuntimeWarning)
        lu, piv = scipy.linalg.lu_factor(entries, check_finite=False)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    det = complex(np.prod(np.diag(lu))) * (-1.0) ** swaps
    if not np.isfinite(det.real) or not np.isfinite(det.imag):
        raise IllConditioned("Determinant overflowed")
    residue = abs(det.imag) / (abs(det) + np.finfo(float).tiny)
    return Determinant(value=det.real, imag_residue=residue)
