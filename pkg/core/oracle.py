"""
Independent ground truth for the determinant formulas.

- Dense transition matrices and (I - Q)^-1 solves
- Power iteration for stationary vectors
- Seeded Monte Carlo path simulation
"""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil
import scipy.linalg
import scipy.sparse

try:
    from config.defaults import (
        DEFAULT_SEED,
        HORIZON_FLOOR,
        MEMORY_WARNING_THRESHOLD,
        OCCUPATION_BATCH_CELLS,
        ORACLE_MAX_N,
        POWER_ITERATION_MAX_ITER,
        POWER_ITERATION_TOL,
        ROW_SUM_TOL,
    )
except ImportError:
    from ..config.defaults import (
        DEFAULT_SEED,
        HORIZON_FLOOR,
        MEMORY_WARNING_THRESHOLD,
        OCCUPATION_BATCH_CELLS,
        ORACLE_MAX_N,
        POWER_ITERATION_MAX_ITER,
        POWER_ITERATION_TOL,
        ROW_SUM_TOL,
    )
from .errors import BarrierTooNarrow, NoConvergence, OracleTooLarge, SingularSystem
from .leap_model import LeapParams, drift_moments, is_zero_drift, step_profile

logger = logging.getLogger(__name__)

GENERATOR_NAME = "Philox"


class ChainMode(Enum):
    ABSORBING = "absorbing"
    REFLECTING_TWO_SIDED = "reflecting"
    REFLECTING_ONE_SIDED_TRUNCATED = "one-sided"


@dataclass(frozen=True)
class TransitionMatrix:
    entries: np.ndarray
    mode: ChainMode

    @property
    def N(self) -> int:
        return self.entries.shape[0] - 1


@dataclass(frozen=True)
class OracleReport:
    """Monte Carlo estimates with their standard errors."""
    values: np.ndarray
    stderr: np.ndarray
    n_paths: int
    seed: int
    worker_count: int
    mode: ChainMode
    generator: str = GENERATOR_NAME
    horizon: int = 0
    horizon_exceeded: int = 0
    labels: Tuple[str, ...] = field(default=())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "labels": list(self.labels),
            "values": self.values.tolist(),
            "stderr": self.stderr.tolist(),
            "n_paths": self.n_paths,
            "seed": self.seed,
            "worker_count": self.worker_count,
            "generator": self.generator,
            "horizon": self.horizon,
            "horizon_exceeded": self.horizon_exceeded,
        }


# =============================================================================
# Transition structure
# =============================================================================
def _check_barrier(params: LeapParams, N: int) -> None:
    profile = step_profile(params)
    if N < profile.k_p + profile.k_q:
        raise BarrierTooNarrow(f"N = {N} is below k_p + k_q = {profile.k_p + profile.k_q}")


def _check_dense_budget(N: int) -> None:
    """Refuse dense work above ORACLE_MAX_N or beyond the memory threshold."""
    if N > ORACLE_MAX_N:
        raise OracleTooLarge(f"Dense oracle is capped at N = {ORACLE_MAX_N}, got {N}")
    needed = 3 * (N + 1) ** 2 * 8
    available = psutil.virtual_memory().available
    if needed > available * MEMORY_WARNING_THRESHOLD / 100.0:
        raise OracleTooLarge(
            f"Dense oracle for N = {N} needs {needed / 2**20:.0f} MiB, "
            f"available {available / 2**20:.0f} MiB"
        )


def _moves(params: LeapParams) -> List[Tuple[int, float]]:
    """(signed step, chain probability) pairs with positive probability."""
    moves = [(j, x) for j, x in enumerate(params.chain_p, start=1) if x > 0]
    moves += [(-j, x) for j, x in enumerate(params.chain_q, start=1) if x > 0]
    return moves


def _targets(states: np.ndarray, step: int, N: int, mode: ChainMode) -> np.ndarray:
    """Destination of each state after a signed step, with barrier reassignment."""
    dest = states + step
    if mode is ChainMode.REFLECTING_ONE_SIDED_TRUNCATED:
        dest = np.where(dest > N, states, dest)
        return np.maximum(dest, 0)
    return np.clip(dest, 0, N)


def build_transition_matrix(params: LeapParams, N: int, mode: ChainMode) -> TransitionMatrix:
    """
    Dense transition matrix on {0, ..., N}.

    Absorbing rows 0 and N are unit vectors and overshoot lands on the
    barrier. Reflecting chains move out of the barrier states as well,
    with out-of-range mass reassigned to the nearest barrier. The truncated
    one-sided chain rejects moves beyond N instead.

    Raises:
        BarrierTooNarrow: N < k_p + k_q.
        OracleTooLarge: N above the dense cap or memory threshold.
    """
    _check_barrier(params, N)
    _check_dense_budget(N)
    entries = np.zeros((N + 1, N + 1))

    if mode is ChainMode.ABSORBING:
        sources = np.arange(1, N)
        entries[0, 0] = entries[N, N] = 1.0
    else:
        sources = np.arange(N + 1)
    entries[sources, sources] += params.hold
    for step, prob in _moves(params):
        np.add.at(entries, (sources, _targets(sources, step, N, mode)), prob)

    worst = float(np.abs(entries.sum(axis=1) - 1.0).max())
    if worst > ROW_SUM_TOL:
        raise ValueError(f"Transition rows deviate from 1 by {worst:.3e}")
    return TransitionMatrix(entries=entries, mode=mode)


def apply_transition(pi: np.ndarray, params: LeapParams, N: int, mode: ChainMode) -> np.ndarray:
    """
    Row vector product pi P on {0, ..., N} without forming P; O(N k).
    """
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (N + 1,):
        raise ValueError(f"Expected a vector of length {N + 1}, got shape {pi.shape}")
    out = np.zeros(N + 1)
    if mode is ChainMode.ABSORBING:
        sources = np.arange(1, N)
        out[0] += pi[0]
        out[N] += pi[N]
    else:
        sources = np.arange(N + 1)
    out[sources] += params.hold * pi[sources]
    for step, prob in _moves(params):
        np.add.at(out, _targets(sources, step, N, mode), prob * pi[sources])
    return out


def solve_absorption(P: TransitionMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """
    Upper absorption probabilities and expected absorption times by a dense solve.

    (I - Q) x = R_N gives u and (I - Q) t = 1 gives v on interior states.

    Raises:
        ValueError: P is not absorbing.
        SingularSystem: I - Q is singular.
    """
    if P.mode is not ChainMode.ABSORBING:
        raise ValueError(f"solve_absorption needs an absorbing chain, got {P.mode.value}")
    N = P.N
    interior = P.entries[1:N, 1:N]
    system = np.eye(N - 1) - interior
    rhs = np.column_stack([P.entries[1:N, N], np.ones(N - 1)])
    try:
        solution = scipy.linalg.solve(system, rhs, check_finite=True)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise SingularSystem(f"I - Q is singular for N = {N}") from e

    u = np.concatenate([[0.0], solution[:, 0], [1.0]])
    v = np.concatenate([[0.0], solution[:, 1], [0.0]])
    return u, v


def power_iteration_stationary(
    P: TransitionMatrix,
    tol: float = POWER_ITERATION_TOL,
    max_iter: int = POWER_ITERATION_MAX_ITER,
) -> np.ndarray:
    """
    Stationary vector by repeated pi <- pi P from the uniform start.

    Raises:
        ValueError: P is absorbing.
        NoConvergence: max_iter reached; carries a spectral gap estimate.
    """
    if P.mode is ChainMode.ABSORBING:
        raise ValueError("Power iteration needs a reflecting chain")
    transposed = scipy.sparse.csr_matrix(P.entries.T)
    pi = np.full(P.N + 1, 1.0 / (P.N + 1))
    previous_delta = math.inf
    ratio = math.nan

    for iteration in range(1, max_iter + 1):
        nxt = transposed @ pi
        nxt /= nxt.sum()
        delta = float(np.abs(nxt - pi).max())
        pi = nxt
        if delta < tol:
            logger.debug(f"Power iteration converged after {iteration} steps")
            return pi
        if previous_delta < math.inf and previous_delta > 0:
            ratio = delta / previous_delta
        previous_delta = delta

    raise NoConvergence(
        f"Power iteration did not reach {tol} in {max_iter} steps",
        gap_estimate=1.0 - ratio if not math.isnan(ratio) else math.nan,
    )


# =============================================================================
# Monte Carlo
# =============================================================================
def default_horizon(params: LeapParams, N: int) -> int:
    """100 N^2 / sigma^2 for zero drift, 100 N / |mu| otherwise."""
    drift = drift_moments(params)
    if is_zero_drift(drift):
        horizon = 100.0 * N * N / drift.sigma2
    else:
        horizon = 100.0 * N / abs(drift.mu)
    return max(HORIZON_FLOOR, int(math.ceil(min(horizon, 1e9))))


def worker_generator(seed: int, worker: int) -> np.random.Generator:
    """Counter-based substream for one worker, fixed by (seed, worker)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(worker,))))


def split_paths(n_paths: int, workers: int) -> List[int]:
    base, extra = divmod(n_paths, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _step_table(params: LeapParams) -> Tuple[np.ndarray, np.ndarray]:
    steps = [0] + [s for s, _ in _moves(params)]
    probs = [params.hold] + [x for _, x in _moves(params)]
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return np.array(steps, dtype=np.int64), cdf


class SimulationWorker(threading.Thread):
    """
    Simulates one block of paths on its own substream.

    The stop event lets a caller abandon the run; partial results are
    discarded by the caller in that case.
    """

    def __init__(
        self,
        worker: int,
        count: int,
        params: LeapParams,
        N: int,
        mode: ChainMode,
        i0: int,
        horizon: int,
        seed: int,
        stop_event: threading.Event,
    ):
        super().__init__(daemon=True)
        self.worker = worker
        self.count = count
        self.params = params
        self.N = N
        self.mode = mode
        self.i0 = i0
        self.horizon = horizon
        self.seed = seed
        self.stop_event = stop_event
        self.result: Optional[Dict[str, Any]] = None
        self.error: Optional[BaseException] = None

    def run(self) -> None:
        try:
            rng = worker_generator(self.seed, self.worker)
            steps, cdf = _step_table(self.params)
            if self.mode is ChainMode.ABSORBING:
                self.result = self._run_absorbing(rng, steps, cdf)
            else:
                self.result = self._run_occupation(rng, steps, cdf)
        except Exception as e:
            logger.error(f"Simulation worker {self.worker} failed: {e}")
            self.error = e
            self.stop_event.set()

    def _draw(self, rng: np.random.Generator, steps: np.ndarray, cdf: np.ndarray, size: int) -> np.ndarray:
        return steps[np.searchsorted(cdf, rng.random(size), side="right")]

    def _run_absorbing(self, rng, steps, cdf) -> Dict[str, Any]:
        N = self.N
        state = np.full(self.count, self.i0, dtype=np.int64)
        elapsed = np.zeros(self.count, dtype=np.int64)
        upper = state >= N
        active = np.flatnonzero((state > 0) & (state < N))

        t = 0
        while active.size and t < self.horizon:
            if self.stop_event.is_set():
                break
            state[active] += self._draw(rng, steps, cdf, active.size)
            elapsed[active] += 1
            t += 1
            hit_upper = state[active] >= N
            hit_lower = state[active] <= 0
            upper[active[hit_upper]] = True
            active = active[~(hit_upper | hit_lower)]

        finished = np.ones(self.count, dtype=bool)
        finished[active] = False
        times = elapsed[finished].astype(float)
        return {
            "absorbed": int(finished.sum()),
            "upper": int(upper[finished].sum()),
            "time_sum": float(times.sum()),
            "time_sq_sum": float((times * times).sum()),
            "exceeded": int(active.size),
        }

    def _run_occupation(self, rng, steps, cdf) -> Dict[str, Any]:
        """
        Per-state sums of path frequencies and of their squares.

        Paths run in batches of at most OCCUPATION_BATCH_CELLS // (N + 1), so
        the count table never grows with the number of paths.
        """
        N = self.N
        burn_in = self.horizon // 10
        batch = max(1, OCCUPATION_BATCH_CELLS // (N + 1))
        freq_sum = np.zeros(N + 1)
        freq_sq_sum = np.zeros(N + 1)

        for first in range(0, self.count, batch):
            size = min(batch, self.count - first)
            state = np.full(size, self.i0, dtype=np.int64)
            counts = np.zeros((size, N + 1), dtype=np.int64)
            rows = np.arange(size)
            for t in range(burn_in + self.horizon):
                if self.stop_event.is_set():
                    break
                proposal = state + self._draw(rng, steps, cdf, size)
                if self.mode is ChainMode.REFLECTING_ONE_SIDED_TRUNCATED:
                    proposal = np.where(proposal > N, state, np.maximum(proposal, 0))
                else:
                    proposal = np.clip(proposal, 0, N)
                state = proposal
                if t >= burn_in:
                    counts[rows, state] += 1
            frequencies = counts / float(self.horizon)
            freq_sum += frequencies.sum(axis=0)
            freq_sq_sum += (frequencies * frequencies).sum(axis=0)
        return {"paths": self.count, "freq_sum": freq_sum, "freq_sq_sum": freq_sq_sum}


def simulate(
    params: LeapParams,
    N: int,
    mode: ChainMode,
    i0: int,
    n_paths: int,
    horizon: Optional[int] = None,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> OracleReport:
    """
    Monte Carlo estimates for an absorbing or reflecting leap.

    Absorbing mode reports [P(absorb at N), mean absorption time]; reflecting
    modes report occupation frequencies of every state after a burn-in of
    horizon / 10 steps. Output is identical for identical
    (seed, n_paths, workers).

    Args:
        params: Validated leap.
        N: Upper barrier.
        mode: Chain to simulate.
        i0: Starting state.
        n_paths: Number of independent paths.
        horizon: Step budget per path; defaults to default_horizon.
        seed: 64-bit seed.
        workers: Number of worker threads and substreams.

    Returns:
        OracleReport.
    """
    _check_barrier(params, N)
    if not 0 <= i0 <= N:
        raise ValueError(f"Start state {i0} outside 0..{N}")
    if n_paths < 1 or workers < 1:
        raise ValueError("n_paths and workers must be positive")
    horizon = horizon or default_horizon(params, N)

    stop_event = threading.Event()
    pool = [
        SimulationWorker(w, count, params, N, mode, i0, horizon, seed, stop_event)
        for w, count in enumerate(split_paths(n_paths, workers))
        if count > 0
    ]
    logger.info(f"Simulating {n_paths} paths on {len(pool)} worker(s), mode={mode.value}, horizon={horizon}")
    for worker in pool:
        worker.start()
    for worker in pool:
        worker.join()
    for worker in pool:
        if worker.error is not None:
            raise worker.error

    if mode is ChainMode.ABSORBING:
        return _merge_absorbing(pool, n_paths, seed, horizon)
    return _merge_occupation(pool, n_paths, seed, horizon, mode)


def _merge_absorbing(pool: Sequence[SimulationWorker], n_paths: int, seed: int, horizon: int) -> OracleReport:
    absorbed = sum(w.result["absorbed"] for w in pool)
    upper = sum(w.result["upper"] for w in pool)
    time_sum = sum(w.result["time_sum"] for w in pool)
    time_sq = sum(w.result["time_sq_sum"] for w in pool)
    exceeded = sum(w.result["exceeded"] for w in pool)
    if exceeded:
        logger.warning(f"{exceeded} of {n_paths} paths exceeded the horizon and were excluded; estimates are biased")
    if absorbed == 0:
        raise NoConvergence("No path was absorbed within the horizon")

    u_hat = upper / absorbed
    v_hat = time_sum / absorbed
    v_var = max(time_sq / absorbed - v_hat * v_hat, 0.0)
    return OracleReport(
        values=np.array([u_hat, v_hat]),
        stderr=np.array([math.sqrt(u_hat * (1.0 - u_hat) / absorbed), math.sqrt(v_var / absorbed)]),
        n_paths=n_paths,
        seed=seed,
        worker_count=len(pool),
        mode=ChainMode.ABSORBING,
        horizon=horizon,
        horizon_exceeded=exceeded,
        labels=("u", "v"),
    )


def _merge_occupation(
    pool: Sequence[SimulationWorker], n_paths: int, seed: int, horizon: int, mode: ChainMode
) -> OracleReport:
    total = sum(w.result["freq_sum"] for w in pool)
    total_sq = sum(w.result["freq_sq_sum"] for w in pool)
    mean = total / n_paths
    if n_paths > 1:
        variance = np.maximum(total_sq - n_paths * mean * mean, 0.0) / (n_paths - 1)
        stderr = np.sqrt(variance / n_paths)
    else:
        stderr = np.full_like(mean, math.nan)
    return OracleReport(
        values=mean,
        stderr=stderr,
        n_paths=n_paths,
        seed=seed,
        worker_count=len(pool),
        mode=mode,
        horizon=horizon,
        labels=tuple(f"pi_{i}" for i in range(len(mean))),
    )
