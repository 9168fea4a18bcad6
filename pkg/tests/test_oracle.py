from __future__ import annotations

from types import SimpleNamespace

import numpy as np
import pytest

from config.defaults import HORIZON_FLOOR, ORACLE_MAX_N
from core import oracle
from core.errors import BarrierTooNarrow, OracleTooLarge
from core.leap_model import LeapParams, validate
from core.oracle import (
    ChainMode,
    _merge_occupation,
    apply_transition,
    build_transition_matrix,
    default_horizon,
    power_iteration_stationary,
    simulate,
    solve_absorption,
    split_paths,
    worker_generator,
)


@pytest.mark.parametrize("mode", list(ChainMode))
def test_rows_are_stochastic(roulette: LeapParams, mode) -> None:
    P = build_transition_matrix(roulette, 9, mode)
    np.testing.assert_allclose(P.entries.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(P.entries >= 0)
    assert P.N == 9


def test_absorbing_barriers_and_overshoot(roulette: LeapParams) -> None:
    P = build_transition_matrix(roulette, 6, ChainMode.ABSORBING).entries
    assert P[0, 0] == P[6, 6] == 1.0
    # from 1, a leap of -1 or -2 lands on 0
    assert P[1, 0] == pytest.approx((13 + 7) / 38)
    assert P[5, 6] == pytest.approx((12 + 6) / 38)


def test_reflecting_reassigns_to_nearest_barrier() -> None:
    params = validate(["1/4", "1/4"], ["1/4", "1/4"])
    P = build_transition_matrix(params, 5, ChainMode.REFLECTING_TWO_SIDED).entries
    assert P[0, 0] == pytest.approx(0.5)
    assert P[5, 5] == pytest.approx(0.5)
    truncated = build_transition_matrix(params, 5, ChainMode.REFLECTING_ONE_SIDED_TRUNCATED).entries
    assert truncated[5, 5] == pytest.approx(0.5)
    assert truncated[4, 5] == pytest.approx(0.25)


def test_hold_sits_on_the_diagonal() -> None:
    params = validate(["1/4"], ["1/4"], "1/2")
    P = build_transition_matrix(params, 4, ChainMode.ABSORBING).entries
    assert P[2, 2] == pytest.approx(0.5)


@pytest.mark.parametrize("mode", list(ChainMode))
def test_apply_transition_matches_dense(mode) -> None:
    params = validate([0.2, 0.05, 0.1], [0.3, 0.25, 0.1])
    N = 11
    pi = np.random.default_rng(3).random(N + 1)
    dense = pi @ build_transition_matrix(params, N, mode).entries
    np.testing.assert_allclose(apply_transition(pi, params, N, mode), dense, atol=1e-14)
    with pytest.raises(ValueError):
        apply_transition(pi[:-1], params, N, mode)


def test_solve_absorption_symmetric_walk() -> None:
    u, v = solve_absorption(build_transition_matrix(validate(["1/2"], ["1/2"]), 10, ChainMode.ABSORBING))
    i = np.arange(11)
    np.testing.assert_allclose(u, i / 10, atol=1e-12)
    np.testing.assert_allclose(v, i * (10 - i), atol=1e-10)


def test_solve_absorption_needs_absorbing_chain(roulette: LeapParams) -> None:
    with pytest.raises(ValueError):
        solve_absorption(build_transition_matrix(roulette, 6, ChainMode.REFLECTING_TWO_SIDED))


def test_power_iteration_uniform_for_symmetric_walk() -> None:
    P = build_transition_matrix(validate(["1/2"], ["1/2"]), 6, ChainMode.REFLECTING_TWO_SIDED)
    np.testing.assert_allclose(power_iteration_stationary(P), np.full(7, 1 / 7), atol=1e-10)
    with pytest.raises(ValueError):
        power_iteration_stationary(build_transition_matrix(validate(["1/2"], ["1/2"]), 6, ChainMode.ABSORBING))


def test_dense_cap(roulette: LeapParams) -> None:
    with pytest.raises(OracleTooLarge):
        build_transition_matrix(roulette, ORACLE_MAX_N + 1, ChainMode.ABSORBING)
    with pytest.raises(BarrierTooNarrow):
        build_transition_matrix(roulette, 3, ChainMode.ABSORBING)


# =============================================================================
# Monte Carlo
# =============================================================================
def test_split_paths() -> None:
    assert split_paths(10, 3) == [4, 3, 3]
    assert split_paths(2, 4) == [1, 1, 0, 0]
    assert sum(split_paths(1_000_003, 7)) == 1_000_003


def test_default_horizon(roulette: LeapParams) -> None:
    assert default_horizon(validate(["9/10"], ["1/10"]), 5) == HORIZON_FLOOR
    assert default_horizon(roulette, 100) == int(np.ceil(100.0 * 100 / (3 / 38)))
    walk = validate(["1/2"], ["1/2"])
    assert default_horizon(walk, 50) == 100 * 50 * 50


def test_worker_substreams_are_distinct_and_reproducible() -> None:
    a = worker_generator(42, 0).random(5)
    b = worker_generator(42, 1).random(5)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, worker_generator(42, 0).random(5))


def test_simulation_is_reproducible(roulette: LeapParams) -> None:
    first = simulate(roulette, 5, ChainMode.ABSORBING, 3, n_paths=5000, seed=9, workers=3)
    second = simulate(roulette, 5, ChainMode.ABSORBING, 3, n_paths=5000, seed=9, workers=3)
    np.testing.assert_array_equal(first.values, second.values)
    np.testing.assert_array_equal(first.stderr, second.stderr)
    assert first.labels == ("u", "v")
    assert first.worker_count == 3
    assert first.to_dict()["generator"] == "Philox"


def test_simulation_rejects_bad_start(roulette: LeapParams) -> None:
    with pytest.raises(ValueError):
        simulate(roulette, 5, ChainMode.ABSORBING, 6, n_paths=10)
    with pytest.raises(ValueError):
        simulate(roulette, 5, ChainMode.ABSORBING, 2, n_paths=0)


def test_simulation_from_barrier_is_already_absorbed(roulette: LeapParams) -> None:
    report = simulate(roulette, 5, ChainMode.ABSORBING, 5, n_paths=100)
    assert report.values[0] == 1.0
    assert report.values[1] == 0.0


def test_occupation_frequencies(roulette: LeapParams) -> None:
    report = simulate(roulette, 6, ChainMode.REFLECTING_TWO_SIDED, 0, n_paths=200, horizon=2000, seed=1)
    assert report.values.shape == (7,)
    assert report.values.sum() == pytest.approx(1.0)
    assert report.labels[0] == "pi_0"
    exact = power_iteration_stationary(build_transition_matrix(roulette, 6, ChainMode.REFLECTING_TWO_SIDED))
    assert np.all(np.abs(report.values - exact) <= 6 * report.stderr + 1e-3)


def test_occupation_runs_in_bounded_batches(roulette: LeapParams, monkeypatch) -> None:
    monkeypatch.setattr(oracle, "OCCUPATION_BATCH_CELLS", 2 * 7)
    report = simulate(roulette, 6, ChainMode.REFLECTING_TWO_SIDED, 0, n_paths=9, horizon=500, seed=4, workers=2)
    assert report.values.shape == (7,)
    assert report.values.sum() == pytest.approx(1.0)
    assert np.all(np.isfinite(report.stderr))
    assert np.all(report.stderr >= 0.0)
    again = simulate(roulette, 6, ChainMode.REFLECTING_TWO_SIDED, 0, n_paths=9, horizon=500, seed=4, workers=2)
    np.testing.assert_array_equal(report.values, again.values)


def test_occupation_merge_matches_per_path_statistics() -> None:
    rng = np.random.default_rng(12)
    per_path = rng.dirichlet(np.ones(5), size=11)
    pool = [
        SimpleNamespace(result={"paths": len(block), "freq_sum": block.sum(axis=0), "freq_sq_sum": (block**2).sum(axis=0)})
        for block in (per_path[:4], per_path[4:])
    ]
    report = _merge_occupation(pool, 11, seed=1, horizon=100, mode=ChainMode.REFLECTING_TWO_SIDED)
    np.testing.assert_allclose(report.values, per_path.mean(axis=0), atol=1e-15)
    np.testing.assert_allclose(report.stderr, per_path.std(axis=0, ddof=1) / np.sqrt(11), rtol=1e-9)


@pytest.mark.slow
def test_roulette_monte_carlo_agrees_with_tables(roulette: LeapParams) -> None:
    report = simulate(roulette, 5, ChainMode.ABSORBING, 3, n_paths=1_000_000, seed=20240601, workers=4)
    assert report.horizon_exceeded == 0
    assert abs(report.values[0] - 0.5445) <= 4 * report.stderr[0] + 5e-5
    assert abs(report.values[1] - 3.6019) <= 4 * report.stderr[1] + 5e-5
