from __future__ import annotations

from typing import Callable, List

import numpy as np
import pytest

from core.leap_model import LeapParams, roulette_params, step_profile, validate


@pytest.fixture
def roulette() -> LeapParams:
    return roulette_params()


def draw_leap(
    rng: np.random.Generator,
    k: int,
    zero_prob: float = 0.3,
    hold_prob: float = 0.0,
    require_gcd_one: bool = False,
    right_mass: tuple[float, float] | None = None,
) -> LeapParams:
    """
    Dirichlet weights over the 2k steps with random zeroing. p_1..p_k and
    q_1..q_k keep at least one positive entry each; ``right_mass`` pins the
    total rightward probability into an interval.
    """
    while True:
        weights = rng.dirichlet(np.ones(2 * k))
        mask = rng.random(2 * k) >= zero_prob
        weights = weights * mask
        p, q = weights[:k], weights[k:]
        if p.sum() == 0 or q.sum() == 0:
            continue
        if right_mass is not None:
            lo, hi = right_mass
            target = rng.uniform(lo, hi)
            p = p / p.sum() * target
            q = q / q.sum() * (1.0 - target)
        else:
            total = p.sum() + q.sum()
            p, q = p / total, q / total
        hold = 0.0
        if hold_prob and rng.random() < hold_prob:
            hold = float(rng.uniform(0.0, 0.5))
            p, q = p * (1.0 - hold), q * (1.0 - hold)
        q = q.copy()
        q[np.flatnonzero(q)[-1]] += 1.0 - hold - p.sum() - q.sum()
        params = validate(p.tolist(), q.tolist(), hold)
        if require_gcd_one and step_profile(params).gcd_support != 1:
            continue
        return params


@pytest.fixture
def leap_factory() -> Callable[..., List[LeapParams]]:
    """Seeded generator of random leaps."""

    def make(count: int, seed: int, ks=(1, 2, 3, 4), **kwargs) -> List[LeapParams]:
        rng = np.random.default_rng(seed)
        return [draw_leap(rng, int(rng.choice(ks)), **kwargs) for _ in range(count)]

    return make


@pytest.fixture
def settings_home(tmp_path, monkeypatch):
    """Per-user data directory redirected into tmp_path."""
    home = tmp_path / "home"
    monkeypatch.setenv("RANDOM_LEAP_HOME", str(home))
    return home
