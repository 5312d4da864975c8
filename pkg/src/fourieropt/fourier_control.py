"""Bounded truncated-Fourier-series controls.

A control channel is described by its *shape* (a unit amplitude direction in
hyperspherical angles, the fundamental frequency and the harmonic count) and
its *span* (two numbers ``p, q`` in ``(0, 1]`` placing the range inside
``[m, M]``).  The shape is normalised to ``[0, 1]`` on the time window and
then mapped into the admissible box, so every control built here is feasible
by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

__all__ = [
    "ControlBounds",
    "ControlShape",
    "DegenerateShape",
    "FourierControl",
    "NormalizationResult",
    "SpanParams",
    "apply_span",
    "build_control",
    "direction_from_angles",
    "evaluate_control",
    "extend_harmonics",
    "normalize_shape",
    "shape_value",
]

TWO_PI = 2.0 * math.pi

# grid density for locating extrema of the shape polynomial: 4096 per period,
# never fewer than 8192; a window longer than a period is folded onto one period
MIN_SAMPLES = 8192
REFINE_XTOL = 1e-10
DEGENERATE_RANGE = 1e-12


class DegenerateShape(ValueError):
    """Raised when the shape polynomial is (numerically) constant on the window."""


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ControlShape:
    """Hyperspherical angles, fundamental frequency and harmonic count."""

    angles: np.ndarray
    omega: float

    def __post_init__(self):
        angles = _frozen(self.angles)
        if angles.size < 1 or angles.size % 2 == 0:
            raise ValueError(f"need an odd number (2K-1) of angles, got {angles.size}")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def harmonics(self) -> int:
        return (self.angles.size + 1) // 2

    def direction(self) -> np.ndarray:
        return direction_from_angles(self.angles)

    def to_dict(self) -> dict:
        return {"angles": self.angles.tolist(), "omega": self.omega, "harmonics": self.harmonics}

    @classmethod
    def from_dict(cls, d: dict) -> "ControlShape":
        shape = cls(d["angles"], d["omega"])
        if "harmonics" in d and int(d["harmonics"]) != shape.harmonics:
            raise ValueError("harmonics does not match the number of angles")
        return shape


@dataclass(frozen=True)
class SpanParams:
    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    def to_dict(self) -> dict:
        return {"p": float(self.p), "q": float(self.q)}

    @classmethod
    def from_dict(cls, d: dict) -> "SpanParams":
        return cls(float(d["p"]), float(d["q"]))


@dataclass(frozen=True)
class ControlBounds:
    lower: float = -4.0
    upper: float = 4.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("control bounds need lower < upper")

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class NormalizationResult:
    """Shift/scale mapping the raw shape polynomial onto ``[0, 1]``.

    ``u_bar(t) = alpha / 2 + beta * shape_value(t)``.
    """

    alpha: float
    beta: float
    observed_min: float
    observed_max: float
    degenerate: bool = False


@dataclass(frozen=True)
class FourierControl:
    """``a0/2 + sum_k a[k-1] cos(k w t) + b[k-1] sin(k w t)``."""

    a0: float
    a: np.ndarray
    b: np.ndarray
    omega: float
    lower: float = field(default=-math.inf, compare=False)
    upper: float = field(default=math.inf, compare=False)

    def __post_init__(self):
        a, b = _frozen(self.a), _frozen(self.b)
        if a.shape != b.shape:
            raise ValueError("cosine and sine amplitude arrays differ in length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def harmonics(self) -> int:
        return self.a.size

    def __call__(self, t):
        return evaluate_control(self, t)

    def value(self, t: float) -> float:
        """Fast scalar evaluation (same arithmetic as the compiled simulator)."""
        return _kernels.fourier_value(float(t), self.a0, self.a, self.b, self.omega)

    def negated(self) -> "FourierControl":
        return FourierControl(-self.a0, -self.a, -self.b, self.omega, -self.upper, -self.lower)

    def to_dict(self) -> dict:
        return {
            "a0": self.a0,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "omega": self.omega,
            "harmonics": self.harmonics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FourierControl":
        ctrl = cls(d["a0"], d["a"], d["b"], d["omega"])
        if "harmonics" in d and int(d["harmonics"]) != ctrl.harmonics:
            raise ValueError("harmonics does not match the coefficient arrays")
        return ctrl


def direction_from_angles(angles) -> np.ndarray:
    """Unit vector in R^(2K) from 2K-1 hyperspherical angles.

    Component i is ``sin(phi_1)...sin(phi_{i-1}) cos(phi_i)``; the last one
    replaces the final cosine by a sine.
    """
    angles = np.asarray(angles, dtype=float).reshape(-1)
    n = angles.size
    if n < 1 or n % 2 == 0:
        raise ValueError(f"need an odd number (2K-1) of angles, got {n}")
    out = np.empty(n + 1)
    prod = 1.0
    for i in range(n):
        out[i] = prod * math.cos(angles[i])
        prod *= math.sin(angles[i])
    out[n] = prod
    return out


def _basis(omega: float, harmonics: int, t) -> np.ndarray:
    """Rows ``[cos wt, sin wt, ..., cos Kwt, sin Kwt]`` for each t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    kwt = np.outer(t, omega * np.arange(1, harmonics + 1))
    out = np.empty((t.size, 2 * harmonics))
    out[:, 0::2] = np.cos(kwt)
    out[:, 1::2] = np.sin(kwt)
    return out


def shape_value(direction, omega: float, harmonics: int, t):
    """Raw shape polynomial ``direction . basis(t)``; scalar in, scalar out."""
    direction = np.asarray(direction, dtype=float)
    if direction.size != 2 * harmonics:
        raise ValueError("direction length must be 2K")
    norm = np.linalg.norm(direction)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector (|H| = {norm})")
    vals = _basis(omega, harmonics, t) @ direction
    return float(vals[0]) if np.ndim(t) == 0 else vals


def shape_extrema(direction, omega: float, harmonics: int, t0: float, tf: float,
                  grid_points: int | None = None):
    """Min and max of the shape polynomial over ``[t0, tf]``.

    Dense uniform sampling followed by golden-section refinement around the
    best grid points.  When the window covers a whole fundamental period only
    one period is sampled; the polynomial is periodic so nothing is lost.
    """
    if not tf > t0:
        raise ValueError("need tf > t0")
    direction = np.ascontiguousarray(direction, dtype=float)
    if direction.size != 2 * harmonics:
        raise ValueError("direction length must be 2K")
    period = TWO_PI / omega
    periodic = (tf - t0) >= period
    span = period if periodic else tf - t0
    n = MIN_SAMPLES if grid_points is None else int(grid_points)
    if n < 2:
        raise ValueError("grid_points must be >= 2")
    return _kernels.shape_extrema(direction, float(omega), float(t0), span, n,
                                  not periodic, REFINE_XTOL)


def normalize_shape(direction, omega: float, harmonics: int, t0: float, tf: float,
                    grid_points: int | None = None) -> NormalizationResult:
    """Find ``alpha, beta`` so that ``alpha/2 + beta*shape`` spans exactly ``[0, 1]``.

    Raises
    ------
    DegenerateShape
        If the shape varies by less than ``1e-12`` over the window.
    """
    lo, hi = shape_extrema(direction, omega, harmonics, t0, tf, grid_points)
    rng = hi - lo
    if not rng > DEGENERATE_RANGE:
        raise DegenerateShape(f"shape polynomial range {rng:.3e} is too small to normalise")
    beta = 1.0 / rng
    alpha = -2.0 * lo / rng
    return NormalizationResult(alpha, beta, lo, hi)


def apply_span(direction, norm: NormalizationResult, omega: float, span: SpanParams,
               bounds: ControlBounds) -> FourierControl:
    """Place the normalised shape inside ``[m, M]`` and return Fourier coefficients.

    ``u(t) = m + p(1-q)(M-m) + u_bar(t) (M-m) p q``, so the maximum is
    ``m + p(M-m)`` and the minimum ``m + p(1-q)(M-m)``.
    """
    direction = np.asarray(direction, dtype=float)
    width = bounds.width
    offset = bounds.lower + span.p * (1.0 - span.q) * width
    scale = width * span.p * span.q
    if norm.degenerate:
        return FourierControl(2.0 * (offset + 0.5 * scale), np.zeros(direction.size // 2),
                              np.zeros(direction.size // 2), omega, bounds.lower, bounds.upper)
    amp = scale * norm.beta * direction
    a0 = 2.0 * offset + scale * norm.alpha
    return FourierControl(a0, amp[0::2], amp[1::2], omega, bounds.lower, bounds.upper)


def evaluate_control(ctrl: FourierControl, t):
    """Evaluate the truncated series at scalar or array ``t``."""
    if ctrl.harmonics == 0:
        vals = np.full(np.shape(np.atleast_1d(t)), 0.5 * ctrl.a0)
    else:
        coef = np.empty(2 * ctrl.harmonics)
        coef[0::2], coef[1::2] = ctrl.a, ctrl.b
        vals = 0.5 * ctrl.a0 + _basis(ctrl.omega, ctrl.harmonics, t) @ coef
    return float(vals[0]) if np.ndim(t) == 0 else vals


def build_control(shape: ControlShape, span: SpanParams, bounds: ControlBounds,
                  t0: float, tf: float) -> FourierControl:
    """Shape + span -> admissible control; a constant shape maps to ``u_bar = 0.5``."""
    direction = shape.direction()
    try:
        norm = normalize_shape(direction, shape.omega, shape.harmonics, t0, tf)
    except DegenerateShape:
        norm = NormalizationResult(0.0, 0.0, math.nan, math.nan, degenerate=True)
    return apply_span(direction, norm, shape.omega, span, bounds)


def extend_harmonics(shape: ControlShape) -> ControlShape:
    """Add one harmonic without changing the control.

    The former last angle moves from ``[0, 2pi)`` into ``[0, pi]``: it is kept
    when ``<= pi`` (next angle 0) and reflected to ``2pi - phi`` otherwise,
    in which case the next angle is ``pi`` to restore the sign of the sine
    term.  The new last angle is 0, so both new amplitudes vanish.
    """
    angles = shape.angles.copy()
    last = angles[-1]
    if last <= math.pi:
        tail = [last, 0.0, 0.0]
    else:
        tail = [TWO_PI - last, math.pi, 0.0]
    return ControlShape(np.concatenate([angles[:-1], tail]), shape.omega)
