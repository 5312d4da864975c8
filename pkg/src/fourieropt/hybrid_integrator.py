"""Adaptive Dormand-Prince 5(4) integration of piecewise-smooth systems.

Smooth arcs are integrated with an embedded RK pair; after every accepted
step the active mode's event functions are checked at the step end.  A sign
change is located by bisection on the sub-step length, re-integrating from
the start of the step, and the system's transition map then picks the next
mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Protocol, Sequence

import numpy as np

from . import _kernels as kern

__all__ = [
    "EventBracketError",
    "EventRecord",
    "EventStormError",
    "HybridSystem",
    "IntegratorConfig",
    "StepResult",
    "StiffnessError",
    "Trajectory",
    "integrate",
    "locate_event",
    "rk45_step",
]


class StiffnessError(RuntimeError):
    """Step size fell below the resolvable limit."""


class EventStormError(RuntimeError):
    pass


class EventBracketError(ValueError):
    """Event function has no sign change over the requested bracket."""


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-12
    initial_step: float = 1e-3
    max_step: float = 0.1
    event_tol_time: float = 1e-11
    max_event_bisections: int = 60
    max_events: int = 10**6
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 5.0

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "initial_step", "max_step", "event_tol_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_event_bisections < 1:
            raise ValueError("max_event_bisections must be >= 1")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "IntegratorConfig":
        return cls(**d)


class HybridSystem(Protocol):
    """Piecewise-smooth vector field with per-mode events.

    Event functions are positive while the mode is valid; a value ``<= 0`` at
    a step end means the mode was left during that step.
    """

    def derivative(self, mode: int, t: float, y: np.ndarray, u: float) -> np.ndarray: ...

    def events(self, mode: int, t: float, y: np.ndarray, u: float) -> np.ndarray: ...

    def transition(self, mode: int, t: float, y: np.ndarray, u: float,
                   which: int = 0) -> tuple[int, np.ndarray, str]: ...

    def initial_mode(self, t: float, y: np.ndarray, u: float) -> int: ...


class StepResult(NamedTuple):
    y: np.ndarray
    error: np.ndarray
    error_norm: float
    accepted: bool
    h_next: float
    f_end: np.ndarray


class EventRecord(NamedTuple):
    t: float
    from_mode: int
    to_mode: int
    kind: str


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    modes: np.ndarray
    events: list[EventRecord] = field(default_factory=list)
    n_steps: int = 0
    n_rejected: int = 0
    n_liftoff: int = 0

    @property
    def final_state(self) -> np.ndarray:
        return self.y[-1]

    @property
    def final_mode(self) -> int:
        return int(self.modes[-1])


def _error_norm(y, y_new, err, config):
    scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def _factor(err_norm, config):
    if err_norm == 0.0:
        return config.max_factor
    return min(config.max_factor, max(config.min_factor, config.safety * err_norm ** -0.2))


def rk45_step(fun: Callable, t: float, y, h: float, config: IntegratorConfig,
              k1=None) -> StepResult:
    """One Dormand-Prince 5(4) step of size ``h`` from ``(t, y)``.

    ``fun(t, y)`` returns the derivative; pass ``k1 = fun(t, y)`` to reuse it.
    The step is accepted when every component's error is within
    ``abs_tol + rel_tol * |y|``; ``h_next`` comes from the usual fifth-root
    controller.
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    if h < 1e-14 * max(1.0, abs(t)):
        raise StiffnessError(f"step size {h:.3e} underflows at t={t}")
    y = np.asarray(y, dtype=float)
    if k1 is None:
        k1 = np.asarray(fun(t, y), dtype=float)
    k2 = fun(t + kern.C2 * h, y + h * (kern.A21 * k1))
    k3 = fun(t + kern.C3 * h, y + h * (kern.A31 * k1 + kern.A32 * k2))
    k4 = fun(t + kern.C4 * h, y + h * (kern.A41 * k1 + kern.A42 * k2 + kern.A43 * k3))
    k5 = fun(t + kern.C5 * h, y + h * (kern.A51 * k1 + kern.A52 * k2 + kern.A53 * k3
                                       + kern.A54 * k4))
    k6 = fun(t + h, y + h * (kern.A61 * k1 + kern.A62 * k2 + kern.A63 * k3 + kern.A64 * k4
                             + kern.A65 * k5))
    y_new = y + h * (kern.B1 * k1 + kern.B3 * k3 + kern.B4 * k4 + kern.B5 * k5 + kern.B6 * k6)
    k7 = np.asarray(fun(t + h, y_new), dtype=float)
    err = h * (kern.E1 * k1 + kern.E3 * k3 + kern.E4 * k4 + kern.E5 * k5 + kern.E6 * k6
               + kern.E7 * k7)
    en = _error_norm(y, y_new, err, config)
    fac = _factor(en, config)
    accepted = en <= 1.0
    return StepResult(y_new, err, en, accepted, h * (fac if accepted else min(1.0, fac)), k7)


def _bisect(valid: Callable[[float], bool], lo: float, hi: float, tol: float, max_iter: int):
    """Shrink ``[lo, hi]`` keeping ``valid(lo)`` true and ``valid(hi)`` false."""
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if valid(mid):
            lo = mid
        else:
            hi = mid
    return hi


def locate_event(event_fn: Callable[[float], float], t_a: float, t_b: float,
                 config: IntegratorConfig) -> float:
    """Bisection for a sign change of ``event_fn`` on ``[t_a, t_b]``.

    Returns a time on the far side of the crossing, within ``event_tol_time``
    of it.  A zero at ``t_a`` returns ``t_a``.
    """
    g_a, g_b = event_fn(t_a), event_fn(t_b)
    if g_a == 0.0:
        return t_a
    if g_b != 0.0 and np.sign(g_a) == np.sign(g_b):
        raise EventBracketError(f"no sign change on [{t_a}, {t_b}]: g = {g_a}, {g_b}")
    sa = np.sign(g_a)
    return _bisect(lambda t: np.sign(event_fn(t)) == sa, t_a, t_b,
                   config.event_tol_time, config.max_event_bisections)


def _control_fn(control):
    if control is None:
        return lambda t: 0.0
    if hasattr(control, "value"):
        return control.value
    return lambda t: float(control(t))


def integrate(system: HybridSystem, y0, mode0: int | None, t0: float, tf: float,
              config: IntegratorConfig | None = None, control=None) -> Trajectory:
    """Integrate ``system`` from ``(t0, y0)`` to ``tf`` under ``control(t)``.

    ``mode0=None`` lets the system pick the initial mode.  Every accepted step
    and every event is recorded; the state stored at an event is the
    post-transition one.
    """
    config = config or IntegratorConfig()
    if not tf > t0:
        raise ValueError("need tf > t0")
    u_of = _control_fn(control)
    y = np.array(y0, dtype=float)
    t = float(t0)
    mode = system.initial_mode(t, y, u_of(t)) if mode0 is None else int(mode0)

    def fun_for(m):
        return lambda s, x: system.derivative(m, s, x, u_of(s))

    def load(m, s, x):
        fn = getattr(system, "normal_load", None)
        return math.inf if fn is None else fn(m, x, u_of(s))

    ts, ys, ms = [t], [y.copy()], [mode]
    events: list[EventRecord] = []
    n_steps = n_rej = n_lift = 0
    fun = fun_for(mode)
    k1 = np.asarray(fun(t, y), dtype=float)
    h = min(config.initial_step, config.max_step)
    while t < tf:
        h = min(h, config.max_step, tf - t)
        last = h >= tf - t
        step = rk45_step(fun, t, y, h, config, k1)
        if not step.accepted:
            n_rej += 1
            h = step.h_next
            continue
        g1 = system.events(mode, t + h, step.y, u_of(t + h))
        if np.min(g1) <= 0.0:
            cache = {}

            def valid(dt, t=t, y=y, k1=k1, mode=mode):
                sub = rk45_step(fun, t, y, dt, config, k1)
                cache[dt] = sub.y
                return bool(np.min(system.events(mode, t + dt, sub.y, u_of(t + dt))) > 0.0)

            hi = _bisect(valid, 0.0, h, config.event_tol_time, config.max_event_bisections)
            if hi < h:
                y_ev = rk45_step(fun, t, y, hi, config, k1).y
                t = t + hi
            else:
                y_ev = step.y
                t = tf if last else t + h
            u = u_of(t)
            which = int(np.argmin(system.events(mode, t, y_ev, u)))
            if load(mode, t, y_ev) <= 0.0:
                n_lift += 1
            new_mode, y, kind = system.transition(mode, t, y_ev, u, which)
            events.append(EventRecord(t, mode, int(new_mode), kind))
            mode = int(new_mode)
            n_steps += 1
            if len(events) > config.max_events:
                raise EventStormError(f"more than {config.max_events} events")
            fun = fun_for(mode)
            k1 = np.asarray(fun(t, y), dtype=float)
            h = h * min(1.0, _factor(step.error_norm, config))
        else:
            t = tf if last else t + h
            y = step.y
            k1 = step.f_end
            if load(mode, t, y) <= 0.0:
                n_lift += 1
            n_steps += 1
            h = step.h_next
        ts.append(t)
        ys.append(y.copy())
        ms.append(mode)
    return Trajectory(np.array(ts), np.array(ys), np.array(ms, dtype=int), events,
                      n_steps, n_rej, n_lift)


def fixed_step_rk4(fun: Callable, y0, t0: float, tf: float, h: float) -> np.ndarray:
    """Classical RK4 on a smooth system; a plain reference for convergence checks."""
    y = np.array(y0, dtype=float)
    t = float(t0)
    while t < tf:
        hs = min(h, tf - t)
        k1 = fun(t, y)
        k2 = fun(t + 0.5 * hs, y + 0.5 * hs * k1)
        k3 = fun(t + 0.5 * hs, y + 0.5 * hs * k2)
        k4 = fun(t + hs, y + hs * k3)
        y = y + hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = tf if hs >= tf - t else t + hs
    return y


def event_gaps(events: Sequence[EventRecord]) -> np.ndarray:
    return np.diff([e.t for e in events]) if len(events) > 1 else np.empty(0)
