"""
Random leap parameterization.

A random leap moves right by j with probability p_j and left by j with
probability q_j (j = 1..k), optionally holding with probability ``hold``.
All spectral computations use the lazy-removed step distribution
p / (1 - hold), q / (1 - hold).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

try:
    from config.defaults import PROBABILITY_SUM_TOL, ZERO_DRIFT_TOL
except ImportError:
    from ..config.defaults import PROBABILITY_SUM_TOL, ZERO_DRIFT_TOL
from .errors import (
    HoldTooLarge,
    MonotoneDrift,
    NegativeEntry,
    NotAProbability,
    ShapeMismatch,
)

logger = logging.getLogger(__name__)

RawProbability = Union[float, int, str, Fraction]


@dataclass(frozen=True)
class LeapParams:
    """
    Validated leap parameters.

    ``p``, ``q`` and ``hold`` are the chain as given. ``p_exact`` etc. are
    populated only when every input was an exact rational (text or Fraction).
    """
    p: Tuple[float, ...]
    q: Tuple[float, ...]
    hold: float = 0.0
    p_exact: Optional[Tuple[Fraction, ...]] = None
    q_exact: Optional[Tuple[Fraction, ...]] = None
    hold_exact: Optional[Fraction] = None

    @property
    def k(self) -> int:
        return len(self.p)

    @property
    def is_exact(self) -> bool:
        return self.p_exact is not None

    @property
    def step_p(self) -> Tuple[float, ...]:
        """Rightward probabilities of the lazy-removed chain."""
        total = math.fsum(self.p) + math.fsum(self.q)
        return tuple(x / total for x in self.p)

    @property
    def step_q(self) -> Tuple[float, ...]:
        """Leftward probabilities of the lazy-removed chain."""
        total = math.fsum(self.p) + math.fsum(self.q)
        return tuple(x / total for x in self.q)

    @property
    def chain_p(self) -> Tuple[float, ...]:
        """Rightward probabilities of the actual chain (hold included elsewhere)."""
        scale = 1.0 - self.hold
        return tuple(x * scale for x in self.step_p)

    @property
    def chain_q(self) -> Tuple[float, ...]:
        scale = 1.0 - self.hold
        return tuple(x * scale for x in self.step_q)

    @property
    def time_dilation(self) -> float:
        """Factor applied to expected absorption times of a lazy chain."""
        return 1.0 / (1.0 - self.hold)

    def to_dict(self) -> Dict[str, Any]:
        """Canonical JSON record. Exact inputs serialize as 'a/b' strings."""
        if self.is_exact:
            return {
                "p": [_fraction_text(x) for x in self.p_exact],
                "q": [_fraction_text(x) for x in self.q_exact],
                "hold": _fraction_text(self.hold_exact),
            }
        return {"p": list(self.p), "q": list(self.q), "hold": self.hold}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LeapParams":
        try:
            return validate(data["p"], data["q"], data.get("hold", 0))
        except KeyError as e:
            raise ShapeMismatch(f"Parameter record is missing field {e}") from e


@dataclass(frozen=True)
class StepProfile:
    """Support summary of a leap."""
    k_p: int
    k_q: int
    gcd_support: int

    @property
    def r(self) -> int:
        """Number of nonzero characteristic roots."""
        return self.k_p + self.k_q - 1


@dataclass(frozen=True)
class Drift:
    """Mean and variance of a single (lazy-removed) step."""
    mu: float
    sigma2: float
    mu_exact: Optional[Fraction] = None


def _fraction_text(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_probability(value: RawProbability) -> Fraction:
    """
    Parse a probability given as text or a number into an exact rational.

    Args:
        value: "a/b", a decimal string, an int or a Fraction.

    Returns:
        Exact Fraction.

    Raises:
        NotAProbability: If the text is not a number.

    Example:
        >>> parse_probability("12/38")
        Fraction(6, 19)
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise NotAProbability(f"Not a probability: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise NotAProbability(f"Not a probability: {value!r}") from e


def _is_exact_input(value: RawProbability) -> bool:
    return isinstance(value, (str, Fraction, int)) and not isinstance(value, bool)


def validate(
    raw_p: Sequence[RawProbability],
    raw_q: Sequence[RawProbability],
    hold: RawProbability = 0,
) -> LeapParams:
    """
    Validate raw leap probabilities.

    Args:
        raw_p: Rightward step probabilities p_1..p_k.
        raw_q: Leftward step probabilities q_1..q_k.
        hold: Self-transition probability.

    Returns:
        LeapParams. Exact copies are kept when all inputs were rational.

    Raises:
        ShapeMismatch: Empty vectors or unequal lengths.
        NegativeEntry: A negative probability.
        HoldTooLarge: hold >= 1.
        NotAProbability: Total mass differs from 1 beyond tolerance.
        MonotoneDrift: sum(p) = 0 or sum(q) = 0.
    """
    raw_p = list(raw_p)
    raw_q = list(raw_q)
    if not raw_p or not raw_q:
        raise ShapeMismatch("p and q must be nonempty")
    if len(raw_p) != len(raw_q):
        raise ShapeMismatch(f"p has length {len(raw_p)} but q has length {len(raw_q)}")

    exact = all(_is_exact_input(x) for x in (*raw_p, *raw_q, hold))
    p_frac = [parse_probability(x) for x in raw_p]
    q_frac = [parse_probability(x) for x in raw_q]
    hold_frac = parse_probability(hold)

    for name, values in (("p", p_frac), ("q", q_frac)):
        for j, x in enumerate(values, start=1):
            if x < 0:
                raise NegativeEntry(f"{name}_{j} = {float(x)} is negative")
    if hold_frac < 0:
        raise NegativeEntry(f"hold = {float(hold_frac)} is negative")
    if hold_frac >= 1:
        raise HoldTooLarge(f"hold = {float(hold_frac)} must be below 1")

    total = sum(p_frac) + sum(q_frac) + hold_frac
    if abs(float(total - 1)) > PROBABILITY_SUM_TOL:
        raise NotAProbability(f"Probabilities sum to {float(total)!r}, expected 1")

    if sum(p_frac) == 0 or sum(q_frac) == 0:
        raise MonotoneDrift("Both sum(p) and sum(q) must be positive")

    params = LeapParams(
        p=tuple(float(x) for x in p_frac),
        q=tuple(float(x) for x in q_frac),
        hold=float(hold_frac),
        p_exact=tuple(p_frac) if exact else None,
        q_exact=tuple(q_frac) if exact else None,
        hold_exact=hold_frac if exact else None,
    )
    logger.debug(f"Validated leap k={params.k} hold={params.hold} exact={exact}")
    return params


def step_profile(params: LeapParams) -> StepProfile:
    """
    Largest steps in each direction and the gcd of the step support.

    Example:
        >>> step_profile(validate([0, 0.5], [0, 0.5]))
        StepProfile(k_p=2, k_q=2, gcd_support=2)
    """
    k_p = max(j for j, x in enumerate(params.p, start=1) if x > 0)
    k_q = max(j for j, x in enumerate(params.q, start=1) if x > 0)
    support = [j for j in range(1, params.k + 1) if params.p[j - 1] + params.q[j - 1] > 0]
    return StepProfile(k_p=k_p, k_q=k_q, gcd_support=reduce(math.gcd, support))


def drift_moments(params: LeapParams) -> Drift:
    """
    Step mean and variance of the lazy-removed chain.

    mu = sum j (p_j - q_j), sigma2 = sum j^2 (p_j + q_j) - mu^2.
    """
    if params.is_exact:
        scale = 1 - params.hold_exact
        p = [x / scale for x in params.p_exact]
        q = [x / scale for x in params.q_exact]
        mu = sum(j * (a - b) for j, (a, b) in enumerate(zip(p, q), start=1))
        second = sum(j * j * (a + b) for j, (a, b) in enumerate(zip(p, q), start=1))
        return Drift(mu=float(mu), sigma2=float(second - mu * mu), mu_exact=mu)

    p, q = params.step_p, params.step_q
    mu = math.fsum(j * (a - b) for j, (a, b) in enumerate(zip(p, q), start=1))
    second = math.fsum(j * j * (a + b) for j, (a, b) in enumerate(zip(p, q), start=1))
    return Drift(mu=mu, sigma2=max(second - mu * mu, 0.0))


def is_zero_drift(drift: Drift) -> bool:
    """Exact zero test for rational inputs, |mu| <= ZERO_DRIFT_TOL otherwise."""
    if drift.mu_exact is not None:
        return drift.mu_exact == 0
    return abs(drift.mu) <= ZERO_DRIFT_TOL


def drift_sign(drift: Drift) -> int:
    if is_zero_drift(drift):
        return 0
    return 1 if drift.mu > 0 else -1


def mirror(params: LeapParams) -> LeapParams:
    """Reflect the leap: p and q swap roles."""
    return LeapParams(
        p=params.q,
        q=params.p,
        hold=params.hold,
        p_exact=params.q_exact,
        q_exact=params.p_exact,
        hold_exact=params.hold_exact,
    )


def roulette_params() -> LeapParams:
    """Column bet of American roulette as a random jump (k = 2)."""
    return validate(["12/38", "6/38"], ["13/38", "7/38"], "0")


def load_params(path: Union[str, Path]) -> LeapParams:
    """
    Read a canonical {"p": [...], "q": [...], "hold": ...} record.

    Raises:
        FileNotFoundError: If the file does not exist.
        NotAProbability: If the file is not valid JSON.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Parameter file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise NotAProbability(f"Invalid parameter file {path}: {e}") from e
    return LeapParams.from_dict(data)
