from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from core.char_poly import (
    PolyKind,
    Root,
    RootSet,
    char_poly,
    evaluate,
    nonzero_roots,
    reverse_char_poly,
    root_location_counts,
    snap_unit_root,
    sorted_inverse_roots,
)
from config.defaults import UNIT_SNAP_TOL
from core.errors import LocationCountMismatch, NotIrreducible
from core.leap_model import LeapParams, drift_moments, drift_sign, step_profile, validate


def _inverse_report(params: LeapParams):
    profile = step_profile(params)
    drift = drift_moments(params)
    forward = snap_unit_root(nonzero_roots(char_poly(params), profile), drift)
    return root_location_counts(
        sorted_inverse_roots(forward), drift, profile, poly=reverse_char_poly(params)
    )


def test_walk_polynomial_and_root() -> None:
    params = validate([0.25], [0.75])
    poly = char_poly(params)
    assert poly.coeffs.tolist() == pytest.approx([-0.75, 0.25])
    roots = nonzero_roots(poly, step_profile(params))
    np.testing.assert_allclose(roots.values(), [3.0])


def test_roulette_polynomial(roulette: LeapParams) -> None:
    coeffs = char_poly(roulette).coeffs * 38
    assert coeffs.tolist() == pytest.approx([-7.0, -20.0, 18.0, 6.0])
    reverse = reverse_char_poly(roulette).coeffs * 38
    assert reverse.tolist() == pytest.approx([-6.0, -18.0, 20.0, 7.0])


def test_roulette_roots_are_real_and_satisfy_polynomial(roulette: LeapParams) -> None:
    poly = char_poly(roulette)
    roots = nonzero_roots(poly, step_profile(roulette))
    assert roots.total == 3
    values = roots.values()
    assert np.all(values.imag == 0)
    assert sorted(values.real) == pytest.approx(sorted(np.roots([6, 18, -20, -7]).real))
    for z in values:
        assert abs(evaluate(poly, z)) < 1e-12


def test_polynomial_value_at_one_is_drift(leap_factory) -> None:
    for params in leap_factory(20, seed=3):
        assert evaluate(char_poly(params), 1.0).real == pytest.approx(drift_moments(params).mu, abs=1e-12)


def test_trailing_zeros_are_trimmed() -> None:
    params = validate(["1/2", "0", "0"], ["0", "1/4", "1/4"])
    roots = nonzero_roots(char_poly(params), step_profile(params))
    assert roots.total == step_profile(params).r == 3
    assert np.all(np.abs(roots.values()) > 0)


def test_conjugate_roots_are_paired(leap_factory) -> None:
    for params in leap_factory(50, seed=11, ks=(3, 4)):
        roots = nonzero_roots(char_poly(params), step_profile(params))
        key = lambda item: (item[0].real, item[0].imag)
        upper = sorted(((r.value, r.multiplicity) for r in roots.roots if r.value.imag > 0), key=key)
        lower = sorted(((r.value.conjugate(), r.multiplicity) for r in roots.roots if r.value.imag < 0), key=key)
        assert upper == lower


def test_sorted_inverse_roots_order() -> None:
    roots = RootSet(
        (Root(complex(0.5, 0.0)), Root(complex(0.0, 2.0)), Root(complex(0.0, -2.0)), Root(complex(-4.0, 0.0))),
        PolyKind.FORWARD,
    )
    inverse = sorted_inverse_roots(roots).values()
    np.testing.assert_allclose(inverse, [-0.25, 0.5j, -0.5j, 2.0], atol=1e-15)
    assert inverse[1].imag > 0


def test_inverse_roots_match_reverse_polynomial(roulette: LeapParams) -> None:
    profile = step_profile(roulette)
    forward = nonzero_roots(char_poly(roulette), profile)
    reverse = nonzero_roots(reverse_char_poly(roulette), profile)
    assert sorted(sorted_inverse_roots(forward).values().real) == pytest.approx(sorted(reverse.values().real))


def test_snap_unit_root_for_zero_drift() -> None:
    params = validate(["1/3", "1/6"], ["1/3", "1/6"])
    drift = drift_moments(params)
    roots = snap_unit_root(nonzero_roots(char_poly(params), step_profile(params)), drift)
    assert any(r.value == 1.0 + 0.0j for r in roots.roots)


def test_snap_unit_root_requires_nearby_root() -> None:
    params = validate(["1/3", "1/6"], ["1/3", "1/6"])
    far = RootSet((Root(complex(2.0, 0.0)), Root(complex(-3.0, 0.0)), Root(complex(0.5, 0.0))), PolyKind.FORWARD)
    with pytest.raises(LocationCountMismatch):
        snap_unit_root(far, drift_moments(params))


@pytest.mark.parametrize("offset, snaps", [(0.5 * UNIT_SNAP_TOL, True), (2.0 * UNIT_SNAP_TOL, False)])
def test_snap_unit_root_tolerance(offset: float, snaps: bool) -> None:
    params = validate(["1/2"], ["1/2"])
    near = RootSet((Root(complex(1.0 + offset, 0.0)),), PolyKind.FORWARD)
    if snaps:
        assert snap_unit_root(near, drift_moments(params)).roots[0].value == 1.0
    else:
        with pytest.raises(LocationCountMismatch):
            snap_unit_root(near, drift_moments(params))


def test_snap_unit_root_ignores_nonzero_drift(roulette: LeapParams) -> None:
    roots = nonzero_roots(char_poly(roulette), step_profile(roulette))
    assert snap_unit_root(roots, drift_moments(roulette)) is roots


@pytest.mark.slow
def test_root_location_law_randomized(leap_factory) -> None:
    leaps = leap_factory(200, seed=20240601, require_gcd_one=True)
    for params in leaps:
        profile = step_profile(params)
        sign = drift_sign(drift_moments(params))
        expected = (
            profile.k_p - (1 if sign >= 0 else 0),
            1 if sign == 0 else 0,
            profile.k_q - (1 if sign <= 0 else 0),
        )
        report = _inverse_report(params)
        assert (report.inside, report.on, report.outside) == expected


@pytest.mark.parametrize(
    "p, q",
    [
        (["1/3", "1/6"], ["1/3", "1/6"]),
        (["1/5", "1/5"], ["3/5", "0"]),
        (["4/9", "0", "1/6"], ["0", "2/9", "1/6"]),
    ],
)
def test_root_location_law_zero_drift(p, q) -> None:
    params = validate(p, q)
    assert drift_moments(params).mu_exact == Fraction(0)
    report = _inverse_report(params)
    profile = step_profile(params)
    assert (report.inside, report.on, report.outside) == (profile.k_p - 1, 1, profile.k_q - 1)


def test_location_law_inside_roots(roulette: LeapParams) -> None:
    report = _inverse_report(roulette)
    assert report.expected == (2, 0, 1)
    inside = report.inside_roots()
    assert inside.total == 2
    assert np.all(np.abs(inside.values()) < 1.0)


def test_location_refuses_periodic_support() -> None:
    params = validate([0, "1/2"], [0, "1/2"])
    profile = step_profile(params)
    drift = drift_moments(params)
    roots = RootSet((Root(1 + 0j),), PolyKind.REVERSE)
    with pytest.raises(NotIrreducible):
        root_location_counts(roots, drift, profile)
