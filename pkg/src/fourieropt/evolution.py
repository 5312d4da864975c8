"""Differential Evolution (DE/rand/1/bin) with warm-start seeding.

Selection is greedy and one-to-one, so any seed injected into the initial
population can only be replaced by something at least as good: the returned
cost never exceeds the best seed's cost.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = ["BoxBounds", "DeConfig", "OptimizationResult", "de_generation", "optimize"]

log = logging.getLogger(__name__)

STRATEGIES = ("rand1bin", "best1bin")


@dataclass(frozen=True)
class BoxBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).reshape(-1)
        hi = np.array(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds differ in length")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_pairs(cls, pairs) -> "BoxBounds":
        pairs = np.asarray(pairs, dtype=float)
        return cls(pairs[:, 0], pairs[:, 1])

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class DeConfig:
    """DE hyperparameters.

    ``strategy`` is ``"rand1bin"`` (mutant built around a random member) or
    ``"best1bin"`` (around the current best).  ``mutation`` is either a fixed
    F or a ``(lo, hi)`` range sampled once per generation (dither).
    ``population_size=None`` means ``15 * dim`` capped at 90.  The run stops after ``max_generations`` or once the best
    cost improved by less than ``tol`` over ``stagnation_generations``.
    """

    population_size: int | None = None
    max_generations: int = 300
    strategy: str = "rand1bin"
    mutation: float | tuple[float, float] = (0.5, 1.0)
    crossover: float = 0.7
    seed: int | None = None
    tol: float = 1e-8
    stagnation_generations: int = 40
    jobs: int = 1

    def __post_init__(self):
        if self.population_size is not None and self.population_size < 4:
            raise ValueError("population_size must be >= 4")
        f = self.mutation
        lo, hi = (f, f) if np.isscalar(f) else f
        if not (0 <= lo <= hi <= 2):
            raise ValueError("mutation factor must lie in [0, 2]")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0 <= self.crossover <= 1:
            raise ValueError("crossover rate must lie in [0, 1]")

    def pop_size(self, dim: int) -> int:
        return self.population_size or max(4, min(15 * dim, 90))

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["mutation"] = list(self.mutation) if not np.isscalar(self.mutation) else self.mutation
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeConfig":
        d = dict(d)
        if isinstance(d.get("mutation"), list):
            d["mutation"] = tuple(d["mutation"])
        return cls(**d)


@dataclass
class OptimizationResult:
    best_vector: np.ndarray
    best_cost: float
    cost_history: list[float]
    evaluation_count: int
    rng_seed: int | None
    generations: int = 0
    stop_reason: str = ""
    population: np.ndarray | None = field(default=None, repr=False)
    population_costs: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "vector": self.best_vector.tolist(),
            "cost": self.best_cost,
            "history": list(self.cost_history),
            "seed": self.rng_seed,
            "evaluation_count": self.evaluation_count,
            "generations": self.generations,
            "stop_reason": self.stop_reason,
        }


def _safe(cost) -> float:
    cost = float(cost)
    return cost if math.isfinite(cost) else math.inf


def _evaluator(objective: Callable, pool: ThreadPoolExecutor | None):
    if pool is None:
        return lambda xs: [_safe(objective(x)) for x in xs]
    # map preserves input order, so results do not depend on scheduling
    return lambda xs: [_safe(c) for c in pool.map(objective, xs)]


def _trials(population, costs, config: DeConfig, bounds: BoxBounds, rng):
    n, d = population.shape
    f = config.mutation
    F = f if np.isscalar(f) else rng.uniform(f[0], f[1])
    best = population[int(np.argmin(costs))]
    trials = np.empty_like(population)
    for i in range(n):
        others = np.delete(np.arange(n), i)
        r1, r2, r3 = rng.choice(others, 3, replace=False)
        if config.strategy == "best1bin":
            mutant = best + F * (population[r1] - population[r2])
        else:
            mutant = population[r1] + F * (population[r2] - population[r3])
        mask = rng.random(d) < config.crossover
        mask[rng.integers(d)] = True
        trial = np.where(mask, mutant, population[i])
        bad = (trial < bounds.lower) | (trial > bounds.upper)
        if bad.any():
            trial[bad] = rng.uniform(bounds.lower[bad], bounds.upper[bad])
        trials[i] = trial
    return trials


def de_generation(population, costs, objective, config: DeConfig, bounds: BoxBounds, rng,
                  evaluate=None):
    """One generation: build all trials, evaluate them, then select greedily.

    A trial replaces its parent when its cost is ``<=`` the parent's.  Trials
    are generated before any evaluation so the random stream does not depend
    on how evaluations are scheduled.
    """
    evaluate = evaluate or (lambda xs: [_safe(objective(x)) for x in xs])
    population = np.array(population, dtype=float)
    costs = np.array(costs, dtype=float)
    trials = _trials(population, costs, config, bounds, rng)
    trial_costs = np.array(evaluate(list(trials)))
    keep = trial_costs <= costs
    population[keep] = trials[keep]
    costs[keep] = trial_costs[keep]
    return population, costs


def _check_seeds(seeds, bounds: BoxBounds):
    out = []
    for s in seeds:
        s = np.array(s, dtype=float).reshape(-1)
        if s.size != bounds.dim:
            raise ValueError(f"seed has dimension {s.size}, bounds have {bounds.dim}")
        excess = np.maximum(bounds.lower - s, s - bounds.upper).max()
        if excess > 1e-12:
            raise ValueError(f"seed lies outside bounds by {excess:.3e}")
        if excess > 0:
            warnings.warn("seed marginally outside bounds; clipped", stacklevel=3)
            s = np.clip(s, bounds.lower, bounds.upper)
        out.append(s)
    return out


def optimize(objective: Callable[[np.ndarray], float], bounds: BoxBounds,
             config: DeConfig | None = None, seed_members: Sequence = (),
             callback: Callable[[int, float], None] | None = None) -> OptimizationResult:
    """Minimise ``objective`` over ``bounds``.

    The initial population is uniform in the box with its first members
    replaced by ``seed_members``.  Non-finite objective values count as
    ``+inf``.
    """
    config = config or DeConfig()
    if not isinstance(bounds, BoxBounds):
        bounds = BoxBounds.from_pairs(bounds)
    d = bounds.dim
    n = config.pop_size(d)
    seeds = _check_seeds(seed_members, bounds)
    if len(seeds) > n:
        raise ValueError("more seeds than population members")
    rng = np.random.default_rng(config.seed)
    population = rng.uniform(bounds.lower, bounds.upper, size=(n, d))
    for i, s in enumerate(seeds):
        population[i] = s

    pool = ThreadPoolExecutor(max_workers=config.jobs) if config.jobs > 1 else None
    evaluate = _evaluator(objective, pool)
    try:
        costs = np.array(evaluate(list(population)))
        n_eval = n
        history = [float(costs.min())]
        stop = "max_generations"
        gen = 0
        w = config.stagnation_generations
        for gen in range(1, config.max_generations + 1):
            population, costs = de_generation(population, costs, objective, config, bounds,
                                              rng, evaluate)
            n_eval += n
            history.append(float(costs.min()))
            if callback is not None:
                callback(gen, history[-1])
            if w and len(history) > w and history[-1 - w] - history[-1] < config.tol:
                stop = "stagnation"
                break
    finally:
        if pool is not None:
            pool.shutdown()
    best = int(np.argmin(costs))
    log.debug("DE finished after %d generations (%s), best %.6g", gen, stop, costs[best])
    return OptimizationResult(population[best].copy(), float(costs[best]), history, n_eval,
                              config.seed, gen, stop, population, costs)
