"""
Characteristic polynomials of a random leap and their nonzero roots.

chi(z) has coefficients c_0..c_{2k-1}; the reverse polynomial psi has
gamma_j = -c_{2k-j-1}, so psi(z) = z^{2k-1} chi(1/z) and the roots of psi are
the reciprocals of those of chi.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from numpy.polynomial import polynomial as npoly

try:
    from config.defaults import (
        CLUSTER_REL_TOL,
        EXTENDED_NEWTON_MAX_STEPS,
        EXTENDED_PRECISION_DPS,
        EXTENDED_PRECISION_MAXSTEPS,
        RESIDUAL_REL_TOL,
        TIE_REL_TOL,
        UNIT_CIRCLE_TOL,
        UNIT_SNAP_TOL,
    )
except ImportError:
    from ..config.defaults import (
        CLUSTER_REL_TOL,
        EXTENDED_NEWTON_MAX_STEPS,
        EXTENDED_PRECISION_DPS,
        EXTENDED_PRECISION_MAXSTEPS,
        RESIDUAL_REL_TOL,
        TIE_REL_TOL,
        UNIT_CIRCLE_TOL,
        UNIT_SNAP_TOL,
    )
from .errors import LocationCountMismatch, NotIrreducible, RootResidualTooLarge
from .leap_model import Drift, LeapParams, StepProfile, drift_sign, is_zero_drift

logger = logging.getLogger(__name__)


class PolyKind(Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


@dataclass(frozen=True)
class PolyCoeffs:
    """Coefficients in ascending powers of z, zero ends retained."""
    coeffs: np.ndarray
    kind: PolyKind

    @property
    def k(self) -> int:
        return len(self.coeffs) // 2


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int = 1


@dataclass(frozen=True)
class RootSet:
    """
    Distinct nonzero roots with multiplicities.

    Non-real roots appear together with their conjugate at equal multiplicity.
    """
    roots: Tuple[Root, ...]
    kind: PolyKind

    @property
    def total(self) -> int:
        return sum(root.multiplicity for root in self.roots)

    def _count(self, predicate) -> int:
        return sum(root.multiplicity for root in self.roots if predicate(abs(root.value)))

    @property
    def inside(self) -> int:
        return self._count(lambda m: m < 1.0 - UNIT_CIRCLE_TOL)

    @property
    def on(self) -> int:
        return self._count(lambda m: abs(m - 1.0) <= UNIT_CIRCLE_TOL)

    @property
    def outside(self) -> int:
        return self._count(lambda m: m > 1.0 + UNIT_CIRCLE_TOL)

    def values(self) -> np.ndarray:
        """Roots repeated by multiplicity."""
        return np.array(
            [root.value for root in self.roots for _ in range(root.multiplicity)],
            dtype=complex,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "roots": [
                {"re": root.value.real, "im": root.value.imag, "multiplicity": root.multiplicity}
                for root in self.roots
            ],
            "inside": self.inside,
            "on": self.on,
            "outside": self.outside,
        }


@dataclass(frozen=True)
class LocationReport:
    """Unit-circle location of reverse-polynomial roots."""
    inside: int
    on: int
    outside: int
    expected: Tuple[int, int, int]
    rootset: RootSet

    def inside_roots(self) -> RootSet:
        """The smallest roots, ``inside`` of them counted with multiplicity."""
        kept: List[Root] = []
        remaining = self.inside
        for root in self.rootset.roots:
            if remaining <= 0:
                break
            kept.append(root)
            remaining -= root.multiplicity
        return RootSet(roots=tuple(kept), kind=self.rootset.kind)


# =============================================================================
# Polynomials
# =============================================================================
def char_poly(params: LeapParams) -> PolyCoeffs:
    """
    Characteristic polynomial of the leap.

    c_j = -sum_{l=k-j}^{k} q_l for j < k and c_j = sum_{l=j-k+1}^{k} p_l for j >= k.

    Example:
        >>> char_poly(validate([0.25], [0.75])).coeffs
        array([-0.75,  0.25])
    """
    k = params.k
    p, q = params.step_p, params.step_q
    coeffs = np.zeros(2 * k)
    for j in range(k):
        coeffs[j] = -math.fsum(q[k - j - 1:])
    for j in range(k, 2 * k):
        coeffs[j] = math.fsum(p[j - k:])
    return PolyCoeffs(coeffs=coeffs, kind=PolyKind.FORWARD)


def reverse_char_poly(params: LeapParams) -> PolyCoeffs:
    """Reverse characteristic polynomial, gamma_j = -c_{2k-j-1}."""
    forward = char_poly(params).coeffs
    return PolyCoeffs(coeffs=-forward[::-1].copy(), kind=PolyKind.REVERSE)


def evaluate(poly: PolyCoeffs, z: complex) -> complex:
    return complex(npoly.polyval(z, poly.coeffs))


def _trim_range(poly: PolyCoeffs, profile: StepProfile) -> Tuple[int, int]:
    k = poly.k
    if poly.kind is PolyKind.FORWARD:
        return k - profile.k_q, k + profile.k_p - 1
    return k - profile.k_p, k + profile.k_q - 1


# =============================================================================
# Root extraction
# =============================================================================
def _cluster(values: Sequence[complex]) -> List[List[complex]]:
    """Single-linkage clustering with CLUSTER_REL_TOL * max(1, |z|)."""
    n = len(values)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(n):
        for b in range(a + 1, n):
            scale = max(1.0, abs(values[a]), abs(values[b]))
            if abs(values[a] - values[b]) <= CLUSTER_REL_TOL * scale:
                parent[find(a)] = find(b)

    groups: Dict[int, List[complex]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(values[a])
    return list(groups.values())


def _polish(coeffs: np.ndarray, z: complex, multiplicity: int) -> complex:
    """One Newton step on the (m-1)th derivative, where the root is simple."""
    target = npoly.polyder(coeffs, multiplicity - 1) if multiplicity > 1 else coeffs
    slope = npoly.polyder(target)
    f = npoly.polyval(z, target)
    fp = npoly.polyval(z, slope)
    if fp == 0:
        return z
    candidate = z - f / fp
    if abs(npoly.polyval(candidate, target)) <= abs(f):
        return candidate
    return z


def _residual_ok(coeffs: np.ndarray, z: complex) -> bool:
    weights = np.abs(coeffs)
    scale = max(float(weights.sum()), float(npoly.polyval(abs(z), weights)))
    return abs(npoly.polyval(z, coeffs)) <= RESIDUAL_REL_TOL * scale


def _is_real(z: complex) -> bool:
    return abs(z.imag) <= CLUSTER_REL_TOL * max(1.0, abs(z))


def _assemble(coeffs: np.ndarray, eigenvalues: Sequence[complex], kind: PolyKind) -> RootSet:
    degree = len(coeffs) - 1
    roots: List[Root] = []
    for group in _cluster([complex(v) for v in eigenvalues]):
        center = complex(np.mean(group))
        m = len(group)
        if _is_real(center):
            value = _polish(coeffs, center.real, m)
            roots.append(Root(complex(float(np.real(value)), 0.0), m))
        elif center.imag > 0:
            value = complex(_polish(coeffs, center, m))
            roots.append(Root(value, m))
            roots.append(Root(value.conjugate(), m))

    rootset = RootSet(roots=tuple(_ordered(roots)), kind=kind)
    if rootset.total != degree:
        raise RootResidualTooLarge(
            f"Clustering produced {rootset.total} roots for a degree {degree} polynomial"
        )
    for root in rootset.roots:
        if not _residual_ok(coeffs, root.value):
            raise RootResidualTooLarge(
                f"Root {root.value:.6g} (multiplicity {root.multiplicity}) fails the residual bound"
            )
    return rootset


def _extended_eigenvalues(coeffs: np.ndarray) -> List[complex]:
    descending = [mpmath.mpf(float(c)) for c in coeffs[::-1]]
    with mpmath.workdps(EXTENDED_PRECISION_DPS):
        try:
            found = mpmath.polyroots(
                descending,
                maxsteps=EXTENDED_PRECISION_MAXSTEPS,
                extraprec=2 * EXTENDED_PRECISION_DPS,
            )
        except mpmath.libmp.libhyper.NoConvergence as e:
            raise RootResidualTooLarge(f"Extended precision root search failed: {e}") from e
    if not isinstance(found, (list, tuple)):
        found = [found]
    return [complex(z) for z in found]


def nonzero_roots(
    poly: PolyCoeffs,
    profile: StepProfile,
    extended_precision: bool = True,
    force_extended: bool = False,
) -> RootSet:
    """
    Nonzero roots of chi or psi with multiplicities.

    Zero coefficients at both ends are trimmed first, leaving a polynomial of
    degree r = k_p + k_q - 1 whose roots are the companion-matrix eigenvalues.

    Args:
        poly: Output of char_poly or reverse_char_poly.
        profile: Step profile of the same leap.
        extended_precision: Retry in mpmath when the residual check fails.
        force_extended: Skip the double precision attempt.

    Returns:
        RootSet with total == r.

    Raises:
        RootResidualTooLarge: No root set passes the residual bound.
    """
    low, high = _trim_range(poly, profile)
    trimmed = poly.coeffs[low:high + 1]

    if not force_extended:
        try:
            return _assemble(trimmed, npoly.polyroots(trimmed), poly.kind)
        except RootResidualTooLarge as e:
            if not extended_precision:
                raise
            logger.warning(f"Retrying root extraction in extended precision: {e}")

    return _assemble(trimmed, _extended_eigenvalues(trimmed), poly.kind)


# =============================================================================
# Ordering and location
# =============================================================================
def _ordered(roots: Sequence[Root]) -> List[Root]:
    """
    Ascending |z|; equal moduli ordered by argument in [0, 2pi) then imaginary part.
    """
    by_modulus = sorted(roots, key=lambda r: abs(r.value))
    ordered: List[Root] = []
    group: List[Root] = []
    for root in by_modulus:
        if group and abs(abs(root.value) - abs(group[0].value)) > TIE_REL_TOL * max(1.0, abs(group[0].value)):
            ordered.extend(sorted(group, key=_tie_key))
            group = []
        group.append(root)
    ordered.extend(sorted(group, key=_tie_key))
    return ordered


def _tie_key(root: Root) -> Tuple[float, float]:
    angle = cmath.phase(root.value) % (2.0 * math.pi)
    return angle, root.value.imag


def sorted_inverse_roots(rootset: RootSet) -> RootSet:
    """
    Reciprocals y_j = 1 / z_j of forward roots, sorted ascending by |y|.

    Example:
        >>> sorted_inverse_roots(RootSet((Root(2.0+0j), Root(0.5+0j)), PolyKind.FORWARD)).values()
        array([0.5+0.j, 2. +0.j])
    """
    inverted: List[Root] = []
    for root in rootset.roots:
        if root.value.imag < 0:
            continue
        y = 1.0 / root.value
        if root.value.imag == 0:
            inverted.append(Root(complex(y.real, 0.0), root.multiplicity))
        else:
            inverted.append(Root(y, root.multiplicity))
            inverted.append(Root(y.conjugate(), root.multiplicity))
    return RootSet(roots=tuple(_ordered(inverted)), kind=PolyKind.REVERSE)


def snap_unit_root(rootset: RootSet, drift: Drift) -> RootSet:
    """
    Replace the root nearest 1 by exactly 1 when the drift is zero.

    Raises:
        LocationCountMismatch: Zero drift but no root close to 1.
    """
    if not is_zero_drift(drift):
        return rootset
    distances = [abs(root.value - 1.0) for root in rootset.roots]
    nearest = int(np.argmin(distances))
    if distances[nearest] > UNIT_SNAP_TOL:
        raise LocationCountMismatch(
            f"Zero drift but nearest root to 1 is {rootset.roots[nearest].value:.6g}"
        )
    roots = list(rootset.roots)
    roots[nearest] = replace(roots[nearest], value=1.0 + 0.0j)
    return RootSet(roots=tuple(_ordered(roots)), kind=rootset.kind)


def _strict_counts(rootset: RootSet) -> Tuple[int, int, int]:
    inside = sum(r.multiplicity for r in rootset.roots if abs(r.value) < 1.0)
    outside = sum(r.multiplicity for r in rootset.roots if abs(r.value) > 1.0)
    return inside, rootset.total - inside - outside, outside


def root_location_counts(
    rootset: RootSet,
    drift: Drift,
    profile: StepProfile,
    poly: Optional[PolyCoeffs] = None,
    extended_precision: bool = True,
) -> LocationReport:
    """
    Check the unit-circle location law for the roots of psi.

    Expected counts are (k_p - I(mu >= 0), I(mu = 0), k_q - I(mu <= 0)).

    Args:
        rootset: Reverse-polynomial roots.
        drift: Drift of the same leap.
        profile: Step profile of the same leap.
        poly: The reverse polynomial, enables an extended precision retry.
        extended_precision: Allow the retry.

    Raises:
        NotIrreducible: gcd of the step support exceeds 1.
        LocationCountMismatch: Counts disagree with the law.
    """
    if profile.gcd_support != 1:
        raise NotIrreducible(f"Step support has gcd {profile.gcd_support}")

    sign = drift_sign(drift)
    expected = (
        profile.k_p - (1 if sign >= 0 else 0),
        1 if sign == 0 else 0,
        profile.k_q - (1 if sign <= 0 else 0),
    )
    counts = (rootset.inside, rootset.on, rootset.outside)

    if counts != expected and poly is not None and extended_precision and sign != 0:
        logger.warning(f"Root locations {counts} differ from {expected}; retrying in extended precision")
        rootset = nonzero_roots(poly, profile, force_extended=True)
        counts = _strict_counts(rootset)

    if counts != expected:
        raise LocationCountMismatch(f"Root location counts {counts} differ from expected {expected}")

    snapped = snap_unit_root(rootset, drift)
    return LocationReport(
        inside=counts[0], on=counts[1], outside=counts[2], expected=expected, rootset=snapped
    )


# =============================================================================
# Extended precision refinement
# =============================================================================
def char_poly_mp(params: LeapParams, profile: StepProfile) -> List[mpmath.mpf]:
    """
    Trimmed coefficients of chi at the current mpmath precision.

    Exact inputs are summed as rationals before rounding; float inputs are
    taken as the binary values they hold.
    """
    k = params.k
    if params.is_exact:
        scale = 1 - params.hold_exact
        p = [x / scale for x in params.p_exact]
        q = [x / scale for x in params.q_exact]

        def total(values: Sequence[Any]) -> mpmath.mpf:
            exact = sum(values, Fraction(0))
            return mpmath.mpf(exact.numerator) / exact.denominator
    else:
        p, q = list(params.step_p), list(params.step_q)

        def total(values: Sequence[Any]) -> mpmath.mpf:
            return mpmath.fsum(mpmath.mpf(x) for x in values)

    coeffs = [-total(q[k - j - 1:]) for j in range(k)] + [total(p[j - k:]) for j in range(k, 2 * k)]
    return coeffs[k - profile.k_q:k + profile.k_p]


def _derivative_mp(descending: Sequence[Any]) -> List[Any]:
    degree = len(descending) - 1
    return [c * (degree - n) for n, c in enumerate(descending[:-1])]


def refine_roots(coeffs: Sequence[mpmath.mpf], rootset: RootSet) -> List[Tuple[Any, int]]:
    """
    Newton-refine double precision roots at the current mpmath precision.

    A root of multiplicity m is refined on the (m-1)th derivative, where it
    is simple. Conjugates of refined complex roots are taken, not refined.

    Args:
        coeffs: Ascending coefficients from char_poly_mp.
        rootset: Forward roots of the same polynomial.

    Returns:
        (root, multiplicity) pairs in the order of ``rootset``.

    Raises:
        RootResidualTooLarge: Newton iteration does not settle.
    """
    descending = list(coeffs[::-1])
    refined: Dict[complex, Any] = {}
    for root in rootset.roots:
        if root.value.imag < 0:
            continue
        target = descending
        for _ in range(root.multiplicity - 1):
            target = _derivative_mp(target)
        slope = _derivative_mp(target)
        z = mpmath.mpf(root.value.real) if root.value.imag == 0 else mpmath.mpc(root.value)
        for _ in range(EXTENDED_NEWTON_MAX_STEPS):
            fp = mpmath.polyval(slope, z)
            if fp == 0:
                break
            step = mpmath.polyval(target, z) / fp
            z -= step
            if abs(step) <= 2**10 * mpmath.eps * max(1, abs(z)):
                break
        else:
            raise RootResidualTooLarge(f"Newton refinement of {root.value:.6g} did not settle")
        refined[root.value] = z
        if root.value.imag != 0:
            refined[root.value.conjugate()] = mpmath.conj(z)
    return [(refined[root.value], root.multiplicity) for root in rootset.roots]
