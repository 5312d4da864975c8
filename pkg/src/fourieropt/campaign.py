"""Cost function and multi-trial optimisation campaigns for the capsule drive.

A decision vector for K harmonics is ``[phi_1 .. phi_{2K-1}, omega, p, q]``.
Its cost is ``-|z(tf) - z(t0)|`` after simulating the capsule from rest under
the control the vector describes.
"""

from __future__ import annotations

import logging
import math
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import _kernels as kern
from .capsule_plant import CapsuleParams, CapsuleSystem
from .evolution import BoxBounds, DeConfig, OptimizationResult, optimize
from .fourier_control import (
    TWO_PI,
    ControlBounds,
    ControlShape,
    FourierControl,
    SpanParams,
    build_control,
    extend_harmonics,
)
from .hybrid_integrator import IntegratorConfig, Trajectory, integrate

__all__ = [
    "CampaignConfig",
    "CampaignRecord",
    "CostFunction",
    "SearchLimits",
    "SimulationResult",
    "TrialRecord",
    "decision_bounds",
    "evaluate_cost",
    "extend_vector",
    "relative_change",
    "run_campaign",
    "run_iterative",
    "run_noniterative",
    "simulate",
    "simulate_trajectory",
    "summarize",
    "vector_to_control",
]

log = logging.getLogger(__name__)

P_Q_FLOOR = 1e-6
OMEGA_MAX = 10.0


@dataclass(frozen=True)
class SearchLimits:
    """Ranges for omega, p and q in the decision vector (angles are fixed)."""

    omega_max: float = OMEGA_MAX
    p_min: float = P_Q_FLOOR
    p_max: float = 1.0
    q_min: float = P_Q_FLOOR
    q_max: float = 1.0

    def violations(self) -> list[str]:
        out = []
        if not self.omega_max > 0:
            out.append("omega_max must be positive")
        for name in ("p", "q"):
            lo, hi = getattr(self, f"{name}_min"), getattr(self, f"{name}_max")
            if not 0 < lo <= hi:
                out.append(f"{name} range must satisfy 0 < min <= max, got [{lo}, {hi}]")
            if hi > 1:
                out.append(f"{name} upper bound {hi} exceeds 1")
        return out

    def __post_init__(self):
        bad = self.violations()
        if bad:
            raise ValueError("; ".join(bad))

    def to_dict(self) -> dict:
        return {"omega_max": self.omega_max, "p": [self.p_min, self.p_max],
                "q": [self.q_min, self.q_max]}


@dataclass(frozen=True)
class CampaignConfig:
    k_min: int = 2
    k_max: int = 10
    trials: int = 5
    t0: float = 0.0
    tf: float = 100.0
    plant: CapsuleParams = field(default_factory=CapsuleParams)
    bounds: ControlBounds = field(default_factory=ControlBounds)
    limits: SearchLimits = field(default_factory=SearchLimits)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    de: DeConfig = field(default_factory=DeConfig)
    mode: Literal["iterative", "noniterative"] = "iterative"
    base_seed: int = 0
    # iterative chain stops once the distance gain drops below this; None never stops early
    improvement_threshold: float | None = 1e-6
    seed_top_n: int = 1

    def __post_init__(self):
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError("need 1 <= k_min <= k_max")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.tf > self.t0:
            raise ValueError("need tf > t0")
        if self.mode not in ("iterative", "noniterative"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if 2 * math.pi / (self.tf - self.t0) > self.limits.omega_max:
            raise ValueError("omega_max is below the fundamental 2 pi / (tf - t0)")

    def decision_bounds(self, harmonics: int) -> BoxBounds:
        return decision_bounds(harmonics, self.t0, self.tf, self.limits)


@dataclass(frozen=True)
class SimulationResult:
    final_state: np.ndarray
    final_mode: int
    n_events: int
    n_steps: int
    n_rejected: int
    n_liftoff: int
    status: int

    @property
    def ok(self) -> bool:
        return self.status == kern.OK


def decision_bounds(harmonics: int, t0: float = 0.0, tf: float = 100.0,
                    limits: SearchLimits | None = None) -> BoxBounds:
    """Box for ``[angles, omega, p, q]``; the last angle ranges over ``[0, 2pi]``."""
    lim = limits or SearchLimits()
    n_ang = 2 * harmonics - 1
    lower = np.zeros(n_ang + 3)
    upper = np.full(n_ang + 3, math.pi)
    upper[n_ang - 1] = TWO_PI
    lower[n_ang], upper[n_ang] = TWO_PI / (tf - t0), lim.omega_max
    lower[n_ang + 1], upper[n_ang + 1] = lim.p_min, lim.p_max
    lower[n_ang + 2], upper[n_ang + 2] = lim.q_min, lim.q_max
    return BoxBounds(lower, upper)


def split_vector(v, harmonics: int):
    v = np.asarray(v, dtype=float)
    n_ang = 2 * harmonics - 1
    if v.size != n_ang + 3:
        raise ValueError(f"decision vector for K={harmonics} needs {n_ang + 3} entries")
    return ControlShape(v[:n_ang], v[n_ang]), SpanParams(v[n_ang + 1], v[n_ang + 2])


def join_vector(shape: ControlShape, span: SpanParams) -> np.ndarray:
    return np.concatenate([shape.angles, [shape.omega, span.p, span.q]])


def vector_to_control(v, harmonics: int, config: CampaignConfig | None = None) -> FourierControl:
    config = config or CampaignConfig()
    shape, span = split_vector(v, harmonics)
    return build_control(shape, span, config.bounds, config.t0, config.tf)


def extend_vector(v, harmonics: int) -> np.ndarray:
    """Same control with one more harmonic (omega, p, q carried over)."""
    shape, span = split_vector(v, harmonics)
    return join_vector(extend_harmonics(shape), span)


def simulate(control: FourierControl, config: CampaignConfig | None = None,
             y0=None) -> SimulationResult:
    """Run the compiled capsule simulation over ``[t0, tf]`` from rest (or ``y0``)."""
    config = config or CampaignConfig()
    p, ic = config.plant, config.integrator
    y0 = np.zeros(4) if y0 is None else np.asarray(y0, dtype=float)
    y, mode, n_ev, n_st, n_rej, n_lift, status, _ = kern.simulate_dp45(
        y0, float(config.t0), float(config.tf),
        control.a0, control.a, control.b, control.omega,
        p.mu, p.rho, p.nu, p.gamma,
        ic.abs_tol, ic.rel_tol, ic.initial_step, ic.max_step, ic.event_tol_time,
        ic.max_event_bisections, ic.max_events, ic.safety, ic.min_factor, ic.max_factor)
    return SimulationResult(y, int(mode), int(n_ev), int(n_st), int(n_rej), int(n_lift),
                            int(status))


def simulate_trajectory(control: FourierControl, config: CampaignConfig | None = None,
                        y0=None) -> Trajectory:
    """Full trajectory through the generic Python integrator (slower; for export)."""
    config = config or CampaignConfig()
    y0 = np.zeros(4) if y0 is None else y0
    return integrate(CapsuleSystem(config.plant), y0, None, config.t0, config.tf,
                     config.integrator, control)


def evaluate_cost(v, harmonics: int, config: CampaignConfig | None = None) -> float:
    """``-|z(tf) - z(t0)|`` for decision vector ``v``; integrator failure gives ``+inf``."""
    config = config or CampaignConfig()
    ctrl = vector_to_control(v, harmonics, config)
    res = simulate(ctrl, config)
    if not res.ok:
        log.warning("simulation failed (status %d) for K=%d, v=%s", res.status, harmonics,
                    np.array2string(np.asarray(v), precision=17))
        return math.inf
    return -abs(res.final_state[2])


class CostFunction:
    """Picklable ``v -> J`` for a fixed harmonic count."""

    def __init__(self, harmonics: int, config: CampaignConfig):
        self.harmonics = harmonics
        self.config = config

    def __call__(self, v) -> float:
        return evaluate_cost(v, self.harmonics, self.config)


def relative_change(z_k: float, z_k1: float) -> float:
    """Percent change ``(z_{K+1} - z_K) / z_K * 100``; NaN when ``z_K == 0``."""
    if z_k == 0:
        return math.nan
    return (z_k1 - z_k) / z_k * 100.0


@dataclass
class TrialRecord:
    harmonics: int
    trial: int
    vector: np.ndarray
    cost: float
    distance: float
    wall_time: float
    evaluations: int
    generations: int
    de_seed: int
    seed_cost: float | None = None
    stop_reason: str = ""

    def to_dict(self) -> dict:
        return {
            "K": self.harmonics,
            "trial": self.trial,
            "vector": np.asarray(self.vector).tolist(),
            "cost": self.cost,
            "distance": self.distance,
            "wall_time": self.wall_time,
            "evaluations": self.evaluations,
            "generations": self.generations,
            "de_seed": self.de_seed,
            "seed_cost": self.seed_cost,
            "stop_reason": self.stop_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        return cls(d["K"], d["trial"], np.array(d["vector"]), d["cost"], d["distance"],
                   d["wall_time"], d["evaluations"], d["generations"], d["de_seed"],
                   d.get("seed_cost"), d.get("stop_reason", ""))


@dataclass
class CampaignRecord:
    mode: str
    records: list[TrialRecord] = field(default_factory=list)
    chain_stops: dict[int, str] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    def for_k(self, k: int) -> list[TrialRecord]:
        return sorted((r for r in self.records if r.harmonics == k), key=lambda r: r.trial)

    @property
    def harmonics(self) -> list[int]:
        return sorted({r.harmonics for r in self.records})

    def distance(self, k: int, trial: int) -> float:
        for r in self.records:
            if r.harmonics == k and r.trial == trial:
                return r.distance
        return math.nan

    def best(self) -> TrialRecord:
        return max(self.records, key=lambda r: r.distance)

    def summary(self) -> dict:
        return summarize(self.records)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "records": [r.to_dict() for r in self.records],
            "chain_stops": {str(k): v for k, v in self.chain_stops.items()},
            "failures": list(self.failures),
            "summary": _jsonable_summary(self.summary()) if self.records else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignRecord":
        return cls(d["mode"], [TrialRecord.from_dict(r) for r in d["records"]],
                   {int(k): v for k, v in d.get("chain_stops", {}).items()},
                   list(d.get("failures", [])))


def _jsonable_summary(s: dict) -> dict:
    def clean(x):
        if isinstance(x, float) and math.isnan(x):
            return None
        return x
    rows = [{k: clean(v) for k, v in row.items()} for row in s["rows"]]
    return {**s, "rows": rows, "delta_matrix": [[clean(x) for x in r] for r in s["delta_matrix"]]}


def summarize(records: list[TrialRecord]) -> dict:
    """Per-K mean and sample SD of the distance, the relative change between
    consecutive K means, the per-trial change matrix and the best run.
    """
    ks = sorted({r.harmonics for r in records})
    trials = sorted({r.trial for r in records})
    by = {(r.harmonics, r.trial): r.distance for r in records}
    rows = []
    prev_mean = None
    for k in ks:
        d = [by[(k, t)] for t in trials if (k, t) in by]
        mean = statistics.fmean(d)
        single = len(d) < 2
        sd = 0.0 if single else statistics.stdev(d)
        delta = relative_change(prev_mean, mean) if prev_mean is not None else math.nan
        rows.append({"K": k, "n": len(d), "mean": mean, "sd": sd, "delta": delta,
                     "single_trial": single})
        prev_mean = mean
    matrix = []
    for k0, k1 in zip(ks, ks[1:]):
        matrix.append([relative_change(by[(k0, t)], by[(k1, t)])
                       if (k0, t) in by and (k1, t) in by else math.nan for t in trials])
    best = max(records, key=lambda r: r.distance)
    return {"rows": rows, "trials": trials, "delta_ks": ks[:-1], "delta_matrix": matrix,
            "best": {"K": best.harmonics, "trial": best.trial, "distance": best.distance}}


def _optimize_k(k: int, trial: int, config: CampaignConfig, de_seed: int, seeds=()):
    cost = CostFunction(k, config)
    de = replace(config.de, seed=de_seed)
    start = time.perf_counter()
    res: OptimizationResult = optimize(cost, config.decision_bounds(k), de,
                                       seed_members=seeds)
    elapsed = time.perf_counter() - start
    seed_cost = cost(seeds[0]) if len(seeds) else None
    rec = TrialRecord(k, trial, res.best_vector, res.best_cost, -res.best_cost, elapsed,
                      res.evaluation_count, res.generations, de_seed, seed_cost, res.stop_reason)
    log.info("K=%d trial=%d distance=%.6f (%d evals, %.1fs)", k, trial, rec.distance,
             res.evaluation_count, elapsed)
    return rec, res


def _trial_rng(config: CampaignConfig, trial: int):
    return np.random.default_rng(config.base_seed + trial)


def _fail(out: CampaignRecord, k: int, trial: int, exc: Exception):
    log.error("K=%d trial=%d failed: %r", k, trial, exc)
    out.failures.append(f"K={k} trial={trial}: {exc!r}")


def run_noniterative(config: CampaignConfig) -> CampaignRecord:
    """Independent DE runs from random populations for every K and trial."""
    out = CampaignRecord("noniterative")
    for trial in range(config.trials):
        rng = _trial_rng(config, trial)
        for k in range(config.k_min, config.k_max + 1):
            try:
                rec, _ = _optimize_k(k, trial, config, int(rng.integers(2**32)))
            except Exception as exc:  # keep the other trials going; caller sees failures
                _fail(out, k, trial, exc)
                continue
            out.records.append(rec)
    return out


def run_iterative(config: CampaignConfig) -> CampaignRecord:
    """Harmonic continuation: each K+1 run is seeded with the exact extension
    of the K optimum (and optionally its runners-up), so distances never drop.
    """
    out = CampaignRecord("iterative")
    for trial in range(config.trials):
        rng = _trial_rng(config, trial)
        seeds: list[np.ndarray] = []
        prev = None
        out.chain_stops[trial] = "k_max"
        for k in range(config.k_min, config.k_max + 1):
            try:
                rec, res = _optimize_k(k, trial, config, int(rng.integers(2**32)), seeds)
            except Exception as exc:
                _fail(out, k, trial, exc)
                out.chain_stops[trial] = f"failed at K={k}"
                break
            out.records.append(rec)
            thr = config.improvement_threshold
            if prev is not None and thr is not None and rec.distance - prev.distance <= thr:
                out.chain_stops[trial] = f"stalled at K={k}"
                break
            prev = rec
            order = np.argsort(res.population_costs, kind="stable")[:config.seed_top_n]
            seeds = [extend_vector(res.population[i], k) for i in order]
    return out


def run_campaign(config: CampaignConfig) -> CampaignRecord:
    if config.mode == "iterative":
        return run_iterative(config)
    return run_noniterative(config)
