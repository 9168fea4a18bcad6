from __future__ import annotations

import json
import logging
import time
from fractions import Fraction

import numpy as np
import pytest

from config.defaults import GOLDEN_TABLES_PATH, GOLDEN_TOL, ORACLE_MAX_N
from core.absorbing import (
    AbsorptionMethod,
    absorption_probabilities,
    absorption_probability_at,
    analyze_absorption,
    expected_absorption_times,
    is_near_critical_for_times,
    near_critical_digits,
    walk_closed_forms,
)
from core.errors import BarrierTooNarrow, OracleTooLarge
from core.leap_model import Drift, LeapParams, mirror, step_profile, validate
from core.oracle import ChainMode, build_transition_matrix, solve_absorption
from core.report_writer import round_half_away
from utils.system import resource_path


@pytest.fixture(scope="module")
def golden() -> dict:
    with open(resource_path(GOLDEN_TABLES_PATH), "r", encoding="utf-8") as f:
        return json.load(f)


def test_roulette_small_barrier(roulette: LeapParams) -> None:
    result = analyze_absorption(roulette, 5)
    assert result.method is AbsorptionMethod.DETERMINANT
    assert [round_half_away(x) for x in result.u[1:]] == [0.1978, 0.3541, 0.5445, 0.7252, 1.0]
    assert [round_half_away(x) for x in result.v[1:]] == [2.6764, 3.5075, 3.6019, 2.8784, 0.0]
    assert result.u[0] == 0.0 and result.v[0] == 0.0


def test_roulette_matches_published_tables(roulette: LeapParams, golden: dict) -> None:
    misprints = {(m["table"], m["N"], m["i"]) for m in golden["misprints"]}
    compared = 0
    for key in golden["u"]:
        N = int(key)
        result = analyze_absorption(roulette, N)
        for table, values in (("u", result.u), ("v", result.v)):
            for i, printed in enumerate(golden[table][key], start=1):
                if (table, N, i) in misprints:
                    continue
                assert abs(round_half_away(float(values[i])) - printed) <= GOLDEN_TOL, (table, N, i)
                compared += 1
    assert compared == 149


def test_roulette_misprint_is_inconsistent(roulette: LeapParams) -> None:
    u = analyze_absorption(roulette, 25).u
    assert round_half_away(float(u[2])) != 0.0269
    assert u[1] < u[2] < u[3]


def test_roulette_runtime(roulette: LeapParams) -> None:
    start = time.perf_counter()
    for N in (5, 10, 15, 20, 25):
        analyze_absorption(roulette, N)
    assert time.perf_counter() - start < 1.0


@pytest.mark.parametrize("p", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
@pytest.mark.parametrize("N", [5, 20, 100])
def test_determinant_path_reduces_to_walk(p, N) -> None:
    params = validate([p], [1.0 - p])
    result = analyze_absorption(params, N, method="determinant")
    u, v = walk_closed_forms(params.step_p[0], N)
    np.testing.assert_allclose(result.u, u, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(result.v, v, rtol=1e-10, atol=1e-10)


def test_symmetric_walk_closed_form() -> None:
    u, v = walk_closed_forms(0.5, 8)
    i = np.arange(9)
    np.testing.assert_allclose(u, i / 8)
    np.testing.assert_allclose(v, i * (8 - i))


def _exact_walk_times(p: float, N: int) -> np.ndarray:
    step = Fraction(p)
    z = (1 - step) / step
    times = []
    for i in range(N + 1):
        u = (1 - z**i) / (1 - z**N)
        times.append(float((i - N * u) / (1 - 2 * step)))
    return np.array(times)


@pytest.mark.parametrize("p", [0.5 + 1e-9, 0.5 - 1e-9, 0.5 + 1e-6, 0.5 - 2e-3, 0.5 + 3e-3])
@pytest.mark.parametrize("N", [10, 200])
def test_nearly_symmetric_walk_times(p, N) -> None:
    _, v = walk_closed_forms(p, N)
    np.testing.assert_allclose(v, _exact_walk_times(p, N), rtol=1e-11, atol=0)


@pytest.mark.parametrize("p", [0.5 + 1e-9, 0.5 - 1e-9])
def test_nearly_symmetric_walk_matches_dense(p) -> None:
    params = validate([p], [1.0 - p])
    u, v = walk_closed_forms(params.step_p[0], 200)
    u_dense, v_dense = solve_absorption(build_transition_matrix(params, 200, ChainMode.ABSORBING))
    np.testing.assert_allclose(u, u_dense, atol=1e-10)
    assert np.abs(v - v_dense).max() <= 1e-8 * np.abs(v_dense).max()


def test_walk_uses_closed_form_by_default() -> None:
    result = analyze_absorption(validate(["2/5"], ["3/5"]), 10)
    assert result.method is AbsorptionMethod.WALK_CLOSED_FORM
    assert result.to_dict()["diagnostics"]["method"] == "walk_closed_form"


def test_unknown_method() -> None:
    with pytest.raises(ValueError):
        analyze_absorption(validate(["1/2"], ["1/2"]), 4, method="dense")


def test_walk_closed_forms_rejects_degenerate_walk() -> None:
    with pytest.raises(ValueError):
        walk_closed_forms(1.0, 5)


def test_barrier_too_narrow(roulette: LeapParams) -> None:
    with pytest.raises(BarrierTooNarrow):
        analyze_absorption(roulette, 3)
    with pytest.raises(BarrierTooNarrow):
        absorption_probability_at(roulette, 3, 1)


def test_hold_dilates_times_only() -> None:
    busy = validate(["1/5", "1/10"], ["3/10", "2/5"])
    lazy = validate(["1/10", "1/20"], ["3/20", "1/5"], "1/2")
    a, b = analyze_absorption(busy, 12), analyze_absorption(lazy, 12)
    np.testing.assert_allclose(b.u, a.u, atol=1e-12)
    np.testing.assert_allclose(b.v, 2.0 * a.v, rtol=1e-10)


def test_mirror_symmetry(roulette: LeapParams) -> None:
    N = 17
    forward = analyze_absorption(roulette, N)
    flipped = analyze_absorption(mirror(roulette), N)
    np.testing.assert_allclose(flipped.u[::-1], 1.0 - forward.u, atol=1e-12)
    np.testing.assert_allclose(flipped.v[::-1], forward.v, rtol=1e-10, atol=1e-10)


def test_single_state_query_matches_vector(roulette: LeapParams) -> None:
    u = absorption_probabilities(roulette, 30)
    for i in (0, 1, 7, 15, 29, 30):
        assert absorption_probability_at(roulette, 30, i) == pytest.approx(u[i], abs=1e-13)
    with pytest.raises(ValueError):
        absorption_probability_at(roulette, 30, 31)


def test_expected_times_vector(roulette: LeapParams) -> None:
    v = expected_absorption_times(roulette, 5)
    assert v[3] == pytest.approx(3.6019, abs=5e-5)


@pytest.mark.slow
def test_agrees_with_dense_oracle(leap_factory) -> None:
    rng = np.random.default_rng(99)
    start = time.perf_counter()
    worst_u = worst_v = 0.0
    for params in leap_factory(200, seed=2024, hold_prob=0.2):
        profile = step_profile(params)
        N = int(rng.integers(profile.k_p + profile.k_q, 61))
        result = analyze_absorption(params, N)
        u_dense, v_dense = solve_absorption(build_transition_matrix(params, N, ChainMode.ABSORBING))
        worst_u = max(worst_u, float(np.abs(result.u - u_dense).max()))
        worst_v = max(worst_v, float(np.abs(result.v - v_dense).max()))
    assert worst_u <= 1e-8
    assert worst_v <= 1e-7
    assert time.perf_counter() - start < 30.0


NEAR_CRITICAL_LEAPS = {
    "walk-1e-6": ([0.5 + 5e-7], [0.5 - 5e-7]),
    "walk-1e-9": ([0.5 + 5e-10], [0.5 - 5e-10]),
    "jump-1e-6": (["3/10", "1/5"], ["300001/1000000", "199999/1000000"]),
    "jump-1e-9": (["3/10", "1/5"], ["300000001/1000000000", "199999999/1000000000"]),
}


@pytest.mark.parametrize("p, q", list(NEAR_CRITICAL_LEAPS.values()), ids=list(NEAR_CRITICAL_LEAPS))
def test_near_critical_times_match_dense(p, q, caplog) -> None:
    params = validate(p, q)
    with caplog.at_level(logging.WARNING, logger="core.absorbing"):
        result = analyze_absorption(params, 200, method="determinant")
    assert result.method is AbsorptionMethod.EXTENDED_DETERMINANT
    assert any("Near-critical" in r.getMessage() for r in caplog.records)

    u_dense, v_dense = solve_absorption(build_transition_matrix(params, 200, ChainMode.ABSORBING))
    np.testing.assert_allclose(result.u, u_dense, atol=1e-10)
    assert np.abs(result.v - v_dense).max() <= 1e-8 * np.abs(v_dense).max()


def test_near_critical_times_scale_with_hold() -> None:
    busy = validate(["3/10", "1/5"], ["300001/1000000", "199999/1000000"])
    lazy = validate(["3/20", "1/10"], ["300001/2000000", "199999/2000000"], "1/2")
    np.testing.assert_allclose(
        expected_absorption_times(lazy, 40), 2.0 * expected_absorption_times(busy, 40), rtol=1e-12
    )


def test_near_critical_without_extended_precision_warns(caplog) -> None:
    params = validate(*NEAR_CRITICAL_LEAPS["jump-1e-6"])
    with caplog.at_level(logging.WARNING, logger="core.absorbing"):
        result = analyze_absorption(params, 30, extended_precision=False)
    assert result.method is AbsorptionMethod.DETERMINANT
    assert any("lose about" in r.getMessage() for r in caplog.records)


def test_near_critical_digits_grow_with_smaller_drift() -> None:
    assert near_critical_digits(Drift(mu=1e-9, sigma2=1.0), 200) > near_critical_digits(Drift(mu=1e-6, sigma2=1.0), 200)
    assert near_critical_digits(Drift(mu=-1e-6, sigma2=1.0), 2000) > near_critical_digits(Drift(mu=1e-6, sigma2=1.0), 200)
    assert is_near_critical_for_times(Drift(mu=1e-6, sigma2=1.0))
    assert not is_near_critical_for_times(Drift(mu=0.0, sigma2=1.0))
    assert not is_near_critical_for_times(Drift(mu=0.1, sigma2=1.0))

@pytest.mark.slow
def test_upper_absorption_is_monotone(leap_factory) -> None:
    for params in leap_factory(50, seed=5):
        profile = step_profile(params)
        u = absorption_probabilities(params, profile.k_p + profile.k_q + 25)
        assert np.all(np.diff(u) >= -1e-12)


def test_large_barrier_is_stable() -> None:
    params = validate([0.49], [0.51])
    u = absorption_probabilities(params, 5000)
    assert np.all(np.isfinite(u))
    assert u[0] == 0.0 and u[-1] == 1.0
    assert np.all(np.diff(u) >= -1e-15)
    np.testing.assert_allclose(u, walk_closed_forms(0.49, 5000)[0], atol=1e-10)


def test_large_barrier_jump(roulette: LeapParams) -> None:
    u = absorption_probabilities(roulette, 2000)
    assert np.all(np.isfinite(u))
    assert np.all(np.diff(u) >= -1e-12)
    assert u[1000] < 1e-12


@pytest.mark.slow
def test_query_time_is_flat_in_barrier() -> None:
    params = validate(["3/10", "1/5"], ["1/4", "1/4"])

    def best(N: int) -> float:
        times = []
        for _ in range(7):
            start = time.perf_counter()
            absorption_probability_at(params, N, N // 2)
            times.append(time.perf_counter() - start)
        return min(times)

    best(100)
    assert best(1_000_000) <= 3.0 * best(100)
    with pytest.raises(OracleTooLarge):
        build_transition_matrix(params, ORACLE_MAX_N + 1, ChainMode.ABSORBING)
