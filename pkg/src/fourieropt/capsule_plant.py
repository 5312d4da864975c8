"""Dimensionless pendulum capsule drive with Coulomb stick-slip friction.

State ``(theta, theta', z, z')`` evolves under

    [ 1        -cos(theta) ] [theta'']   [ sin(theta) - rho theta - nu theta' + u ]
    [ -cos(theta)  gamma+1 ] [  z''  ] = [ -theta'^2 sin(theta) - f_z            ]

with normal load ``r_y = (gamma+1) - theta'' sin(theta) - theta'^2 cos(theta)``,
tangential demand ``r_z = theta'' cos(theta) - theta'^2 sin(theta)`` and the
three-branch Coulomb law for ``f_z``.  These equations come from scaling the
dimensional model by ``Omega = sqrt(g/l)``, ``tau = Omega t``, ``z = x/l``,
``gamma = M/m``, ``rho = k/(m Omega^2 l^2)``, ``nu = c/(m Omega l^2)``; forces are
divided by ``m Omega^2 l`` and the torque by ``m Omega^2 l^2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from . import _kernels as kern

__all__ = [
    "CapsuleParams",
    "CapsuleState",
    "CapsuleSystem",
    "ContactForces",
    "Mode",
    "SingularDynamics",
    "contact_load",
    "friction_force",
    "slip_derivative",
    "slip_stop_event",
    "stick_break_event",
    "stick_derivative",
    "tangential_demand",
]


class SingularDynamics(ArithmeticError):
    pass


class Mode(IntEnum):
    STICK = kern.STICK
    SLIP_POSITIVE = kern.SLIP_POS
    SLIP_NEGATIVE = kern.SLIP_NEG

    @property
    def label(self) -> str:
        return {0: "stick", 1: "slip+", -1: "slip-"}[int(self)]


@dataclass(frozen=True)
class CapsuleParams:
    mu: float = 0.3
    rho: float = 2.5
    nu: float = 1.0
    gamma: float = 10.0

    def __post_init__(self):
        if self.mu < 0 or self.rho < 0 or self.nu < 0:
            raise ValueError("mu, rho and nu must be non-negative")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CapsuleParams":
        return cls(**{k: float(d[k]) for k in ("mu", "rho", "nu", "gamma") if k in d})


@dataclass(frozen=True)
class CapsuleState:
    theta: float = 0.0
    theta_dot: float = 0.0
    z: float = 0.0
    z_dot: float = 0.0
    mode: Mode = Mode.STICK

    def __post_init__(self):
        if self.mode == Mode.STICK and self.z_dot != 0.0:
            object.__setattr__(self, "z_dot", 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.theta_dot, self.z, self.z_dot])

    @classmethod
    def from_array(cls, y, mode=Mode.STICK) -> "CapsuleState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]), Mode(mode))


class ContactForces(NamedTuple):
    r_y: float
    r_z: float
    f_z: float


def stick_derivative(state: CapsuleState, u: float, params: CapsuleParams):
    """``(theta'', z'')`` with the capsule held in place."""
    return kern.stick_accel(state.theta, state.theta_dot, u, params.rho, params.nu), 0.0


def slip_derivative(state: CapsuleState, u: float, params: CapsuleParams, s: int):
    """``(theta'', z'')`` while sliding in direction ``s``.

    Kinetic friction ``mu r_y s`` depends on ``theta''`` through the normal load,
    so both accelerations come from one 2x2 linear solve.
    """
    if s not in (1, -1):
        raise ValueError("slip sign must be +1 or -1")
    thdd, zdd, det = kern.slip_accel(state.theta, state.theta_dot, u, s,
                                     params.mu, params.rho, params.nu, params.gamma)
    if not abs(det) > 1e-12:
        raise SingularDynamics(f"slip mass matrix determinant {det:.3e}")
    return thdd, zdd


def contact_load(state: CapsuleState, theta_ddot: float, params: CapsuleParams) -> float:
    return kern.normal_load(state.theta, state.theta_dot, theta_ddot, params.gamma)


def tangential_demand(state: CapsuleState, theta_ddot: float) -> float:
    return kern.tangential_demand(state.theta, state.theta_dot, theta_ddot)


def friction_force(state: CapsuleState, r_y: float, r_z: float, params: CapsuleParams):
    """Coulomb law; returns ``(f_z, mode)``.

    Moving capsule: kinetic friction along the velocity.  At rest: static
    friction ``r_z`` if it fits under ``mu r_y``, otherwise kinetic friction
    along ``r_z`` and slip starts in that direction (ties count as slip).
    """
    mu = params.mu
    if state.z_dot != 0.0:
        s = 1 if state.z_dot > 0 else -1
        return mu * r_y * s, Mode(s)
    if abs(r_z) >= mu * r_y:
        s = 1 if r_z >= 0 else -1
        return mu * r_y * s, Mode(s)
    return r_z, Mode.STICK


def forces(state: CapsuleState, u: float, params: CapsuleParams) -> ContactForces:
    """Contact forces consistent with the state's own mode."""
    if state.mode == Mode.STICK:
        thdd, _ = stick_derivative(state, u, params)
        r_y = contact_load(state, thdd, params)
        r_z = tangential_demand(state, thdd)
        return ContactForces(r_y, r_z, r_z)
    thdd, _ = slip_derivative(state, u, params, int(state.mode))
    r_y = contact_load(state, thdd, params)
    return ContactForces(r_y, tangential_demand(state, thdd), params.mu * r_y * int(state.mode))


def stick_break_event(state: CapsuleState, u: float, params: CapsuleParams) -> float:
    """``mu r_y - |r_z|`` under stick dynamics; stick is lost once this is <= 0."""
    g, _ = kern.stick_margin(state.theta, state.theta_dot, u,
                             params.mu, params.rho, params.nu, params.gamma)
    return g


def slip_stop_event(state: CapsuleState) -> float:
    """Sliding velocity; its zero crossing ends the current slip arc."""
    return state.z_dot


class CapsuleSystem:
    """The capsule as a :class:`fourieropt.hybrid_integrator.HybridSystem`.

    Each mode has one event function, written so it is positive while the
    mode is valid: the stick margin in stick, ``s * z'`` in slip ``s``.
    """

    state_names = ("theta", "theta_dot", "z", "z_dot")

    def __init__(self, params: CapsuleParams | None = None):
        self.params = params or CapsuleParams()
        p = self.params
        self._p = (p.mu, p.rho, p.nu, p.gamma)

    def derivative(self, mode: int, t: float, y: np.ndarray, u: float) -> np.ndarray:
        mu, rho, nu, gamma = self._p
        if mode == kern.STICK:
            return np.array([y[1], kern.stick_accel(y[0], y[1], u, rho, nu), 0.0, 0.0])
        thdd, zdd, _ = kern.slip_accel(y[0], y[1], u, mode, mu, rho, nu, gamma)
        return np.array([y[1], thdd, y[3], zdd])

    def normal_load(self, mode: int, y: np.ndarray, u: float) -> float:
        mu, rho, nu, gamma = self._p
        if mode == kern.STICK:
            thdd = kern.stick_accel(y[0], y[1], u, rho, nu)
        else:
            thdd, _, _ = kern.slip_accel(y[0], y[1], u, mode, mu, rho, nu, gamma)
        return kern.normal_load(y[0], y[1], thdd, gamma)

    def events(self, mode: int, t: float, y: np.ndarray, u: float) -> np.ndarray:
        mu, rho, nu, gamma = self._p
        if mode == kern.STICK:
            g, _ = kern.stick_margin(y[0], y[1], u, mu, rho, nu, gamma)
            return np.array([g])
        return np.array([mode * y[3]])

    def transition(self, mode: int, t: float, y: np.ndarray, u: float, which: int = 0):
        """Return ``(new_mode, new_state, kind)``; slip exits snap ``z'`` to 0."""
        mu, rho, nu, gamma = self._p
        y = np.array(y, dtype=float)
        if mode == kern.STICK:
            _, rz = kern.stick_margin(y[0], y[1], u, mu, rho, nu, gamma)
            return (kern.SLIP_POS if rz >= 0 else kern.SLIP_NEG), y, "stick->slip"
        y[3] = 0.0
        g, rz = kern.stick_margin(y[0], y[1], u, mu, rho, nu, gamma)
        if g <= 0.0:
            s = kern.SLIP_POS if rz >= 0 else kern.SLIP_NEG
            if s == -mode:
                return s, y, "reversal"
        return kern.STICK, y, "slip->stick"

    def initial_mode(self, t: float, y: np.ndarray, u: float) -> int:
        if y[3] != 0.0:
            return kern.SLIP_POS if y[3] > 0 else kern.SLIP_NEG
        mu, rho, nu, gamma = self._p
        g, rz = kern.stick_margin(y[0], y[1], u, mu, rho, nu, gamma)
        if g <= 0.0:
            return kern.SLIP_POS if rz >= 0 else kern.SLIP_NEG
        return kern.STICK


def determinant(theta: float, params: CapsuleParams, s: int = 0) -> float:
    """Determinant of the mode's 2x2 system; ``gamma + sin^2`` plus the friction skew."""
    c, sn = math.cos(theta), math.sin(theta)
    return params.gamma + 1.0 - c * (c + params.mu * s * sn)
