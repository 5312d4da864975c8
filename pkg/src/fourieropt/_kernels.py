"""Compiled scalar kernels for the pendulum-capsule plant.

The plant physics here is the single source used by both the pure-Python
hybrid integrator (through :mod:`fourieropt.capsule_plant`) and the compiled
simulation loops below, which mirror :func:`fourieropt.hybrid_integrator.integrate`
step for step so the optimiser can afford tens of thousands of runs.

Modes are encoded as ints: 0 stick, +1 slip forward, -1 slip backward.
"""

import math

import numpy as np
from numba import njit

STICK = 0
SLIP_POS = 1
SLIP_NEG = -1

# status codes returned by the simulation loops
OK = 0
STEP_UNDERFLOW = 1
EVENT_STORM = 2

# event kinds
EV_STICK_TO_SLIP = 0
EV_SLIP_TO_STICK = 1
EV_SLIP_REVERSAL = 2

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth minus fourth order weights
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0


@njit(cache=True, nogil=True)
def fourier_value(t, a0, a, b, omega):
    u = 0.5 * a0
    for k in range(a.size):
        kwt = (k + 1) * omega * t
        u += a[k] * math.cos(kwt) + b[k] * math.sin(kwt)
    return u


@njit(cache=True, nogil=True)
def stick_accel(theta, theta_dot, u, rho, nu):
    """Pendulum acceleration with the capsule held (z'' = 0)."""
    return math.sin(theta) - rho * theta - nu * theta_dot + u


@njit(cache=True, nogil=True)
def slip_accel(theta, theta_dot, u, s, mu, rho, nu, gamma):
    """Solve the coupled 2x2 system with kinetic friction mu*r_y*s substituted."""
    c = math.cos(theta)
    sn = math.sin(theta)
    w2 = theta_dot * theta_dot
    g1 = gamma + 1.0
    r1 = sn - rho * theta - nu * theta_dot + u
    a21 = -c - mu * s * sn
    r2 = -w2 * sn - mu * s * g1 + mu * s * w2 * c
    det = g1 + c * a21
    thdd = (r1 * g1 + c * r2) / det
    zdd = (r2 - a21 * r1) / det
    return thdd, zdd, det


@njit(cache=True, nogil=True)
def normal_load(theta, theta_dot, theta_ddot, gamma):
    return (gamma + 1.0) - theta_ddot * math.sin(theta) - theta_dot * theta_dot * math.cos(theta)


@njit(cache=True, nogil=True)
def tangential_demand(theta, theta_dot, theta_ddot):
    return theta_ddot * math.cos(theta) - theta_dot * theta_dot * math.sin(theta)


@njit(cache=True, nogil=True)
def stick_margin(theta, theta_dot, u, mu, rho, nu, gamma):
    """mu*r_y - |r_z| evaluated with stick dynamics; positive while stick holds."""
    thdd = stick_accel(theta, theta_dot, u, rho, nu)
    ry = normal_load(theta, theta_dot, thdd, gamma)
    rz = tangential_demand(theta, theta_dot, thdd)
    return mu * ry - abs(rz), rz


@njit(cache=True, nogil=True)
def capsule_rhs(t, y, mode, a0, a, b, omega, mu, rho, nu, gamma, out):
    u = fourier_value(t, a0, a, b, omega)
    out[0] = y[1]
    if mode == STICK:
        out[1] = stick_accel(y[0], y[1], u, rho, nu)
        out[2] = 0.0
        out[3] = 0.0
        return 1.0
    thdd, zdd, _ = slip_accel(y[0], y[1], u, mode, mu, rho, nu, gamma)
    out[1] = thdd
    out[2] = y[3]
    out[3] = zdd
    return normal_load(y[0], y[1], thdd, gamma)


@njit(cache=True, nogil=True)
def event_value(t, y, mode, a0, a, b, omega, mu, rho, nu, gamma):
    if mode == STICK:
        u = fourier_value(t, a0, a, b, omega)
        g, _ = stick_margin(y[0], y[1], u, mu, rho, nu, gamma)
        return g
    return mode * y[3]


@njit(cache=True, nogil=True)
def apply_transition(t, y, mode, a0, a, b, omega, mu, rho, nu, gamma):
    """Mode after an event at (t, y); snaps z' to 0 when leaving slip.

    Returns (new_mode, event_kind).
    """
    u = fourier_value(t, a0, a, b, omega)
    if mode == STICK:
        _, rz = stick_margin(y[0], y[1], u, mu, rho, nu, gamma)
        return (SLIP_POS if rz >= 0.0 else SLIP_NEG), EV_STICK_TO_SLIP
    y[3] = 0.0
    g, rz = stick_margin(y[0], y[1], u, mu, rho, nu, gamma)
    if g <= 0.0:
        s = SLIP_POS if rz >= 0.0 else SLIP_NEG
        if s == -mode:
            return s, EV_SLIP_REVERSAL
    return STICK, EV_SLIP_TO_STICK


@njit(cache=True, nogil=True)
def initial_mode(t, y, a0, a, b, omega, mu, rho, nu, gamma):
    if y[3] > 0.0:
        return SLIP_POS
    if y[3] < 0.0:
        return SLIP_NEG
    u = fourier_value(t, a0, a, b, omega)
    g, rz = stick_margin(y[0], y[1], u, mu, rho, nu, gamma)
    if g <= 0.0:
        return SLIP_POS if rz >= 0.0 else SLIP_NEG
    return STICK


@njit(cache=True, nogil=True)
def dp_step(t, y, h, mode, k1, a0, a, b, omega, mu, rho, nu, gamma, ynew, err, ws):
    """One Dormand-Prince step given k1 = f(t, y); fills ynew, err, and ws[5] = f(t+h, ynew).

    Returns the minimum normal load seen at the stage points.
    """
    n = y.size
    k2, k3, k4, k5, k6, k7, yt = ws[0], ws[1], ws[2], ws[3], ws[4], ws[5], ws[7]
    for i in range(n):
        yt[i] = y[i] + h * (A21 * k1[i])
    ry = capsule_rhs(t + C2 * h, yt, mode, a0, a, b, omega, mu, rho, nu, gamma, k2)
    for i in range(n):
        yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    ry = min(ry, capsule_rhs(t + C3 * h, yt, mode, a0, a, b, omega, mu, rho, nu, gamma, k3))
    for i in range(n):
        yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    ry = min(ry, capsule_rhs(t + C4 * h, yt, mode, a0, a, b, omega, mu, rho, nu, gamma, k4))
    for i in range(n):
        yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    ry = min(ry, capsule_rhs(t + C5 * h, yt, mode, a0, a, b, omega, mu, rho, nu, gamma, k5))
    for i in range(n):
        yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
    ry = min(ry, capsule_rhs(t + h, yt, mode, a0, a, b, omega, mu, rho, nu, gamma, k6))
    for i in range(n):
        ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
    ry = min(ry, capsule_rhs(t + h, ynew, mode, a0, a, b, omega, mu, rho, nu, gamma, k7))
    for i in range(n):
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    return ry


@njit(cache=True, nogil=True)
def error_norm(y, ynew, err, atol, rtol):
    worst = 0.0
    for i in range(y.size):
        scale = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        worst = max(worst, abs(err[i]) / scale)
    return worst


@njit(cache=True, nogil=True)
def step_factor(err_norm, safety, min_factor, max_factor):
    if err_norm == 0.0:
        return max_factor
    return min(max_factor, max(min_factor, safety * err_norm ** -0.2))


@njit(cache=True, nogil=True)
def simulate_dp45(y0, t0, tf, a0, a, b, omega, mu, rho, nu, gamma,
                  atol, rtol, h0, max_step, event_tol, max_bisect, max_events,
                  safety, min_factor, max_factor):
    """Adaptive hybrid simulation; returns (y_final, mode, n_events, n_steps, n_rejected,
    n_liftoff, status, t_reached)."""
    n = y0.size
    y = y0.copy()
    ynew = np.empty(n)
    err = np.empty(n)
    k1 = np.empty(n)
    ws = np.empty((8, n))
    ysub = np.empty(n)
    esub = np.empty(n)
    ws2 = np.empty((8, n))

    t = t0
    mode = initial_mode(t, y, a0, a, b, omega, mu, rho, nu, gamma)
    capsule_rhs(t, y, mode, a0, a, b, omega, mu, rho, nu, gamma, k1)
    h = min(h0, max_step)
    n_events = 0
    n_steps = 0
    n_rej = 0
    n_lift = 0
    status = OK
    while t < tf:
        h = min(h, max_step, tf - t)
        last = h >= tf - t
        if h < 1e-14 * max(1.0, abs(t)):
            status = STEP_UNDERFLOW
            break
        ry = dp_step(t, y, h, mode, k1, a0, a, b, omega, mu, rho, nu, gamma, ynew, err, ws)
        en = error_norm(y, ynew, err, atol, rtol)
        fac = step_factor(en, safety, min_factor, max_factor)
        if en > 1.0:
            n_rej += 1
            h = h * min(1.0, fac)
            continue
        g1 = event_value(t + h, ynew, mode, a0, a, b, omega, mu, rho, nu, gamma)
        if g1 <= 0.0:
            # bisection over the sub-step length, re-integrating from (t, y)
            lo = 0.0
            hi = h
            for _ in range(max_bisect):
                if hi - lo <= event_tol:
                    break
                mid = 0.5 * (lo + hi)
                dp_step(t, y, mid, mode, k1, a0, a, b, omega, mu, rho, nu, gamma, ysub, esub, ws2)
                gm = event_value(t + mid, ysub, mode, a0, a, b, omega, mu, rho, nu, gamma)
                if gm > 0.0:
                    lo = mid
                else:
                    hi = mid
            if hi < h:
                ry = min(ry, dp_step(t, y, hi, mode, k1, a0, a, b, omega, mu, rho, nu, gamma,
                                     ysub, esub, ws2))
                for i in range(n):
                    ynew[i] = ysub[i]
            t = t + hi if hi < h else (tf if last else t + h)
            for i in range(n):
                y[i] = ynew[i]
            mode, _ = apply_transition(t, y, mode, a0, a, b, omega, mu, rho, nu, gamma)
            n_events += 1
            if ry <= 0.0:
                n_lift += 1
            n_steps += 1
            capsule_rhs(t, y, mode, a0, a, b, omega, mu, rho, nu, gamma, k1)
            if n_events > max_events:
                status = EVENT_STORM
                break
            h = h * min(1.0, fac)
            continue
        t = tf if last else t + h
        for i in range(n):
            y[i] = ynew[i]
            k1[i] = ws[5, i]
        if ry <= 0.0:
            n_lift += 1
        n_steps += 1
        h = h * fac
    return y, mode, n_events, n_steps, n_rej, n_lift, status, t


@njit(cache=True, nogil=True)
def rk4_step(t, y, h, mode, a0, a, b, omega, mu, rho, nu, gamma, out, ws):
    n = y.size
    k1, k2, k3, k4, yt = ws[0], ws[1], ws[2], ws[3], ws[4]
    capsule_rhs(t, y, mode, a0, a, b, omega, mu, rho, nu, gamma, k1)
    for i in range(n):
        yt[i] = y[i] + 0.5 * h * k1[i]
    capsule_rhs(t + 0.5 * h, yt, mode, a0, a, b, omega, mu, rho, nu, gamma, k2)
    for i in range(n):
        yt[i] = y[i] + 0.5 * h * k2[i]
    capsule_rhs(t + 0.5 * h, yt, mode, a0, a, b, omega, mu, rho, nu, gamma, k3)
    for i in range(n):
        yt[i] = y[i] + h * k3[i]
    capsule_rhs(t + h, yt, mode, a0, a, b, omega, mu, rho, nu, gamma, k4)
    for i in range(n):
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@njit(cache=True, nogil=True)
def simulate_rk4(y0, t0, tf, h, a0, a, b, omega, mu, rho, nu, gamma, event_tol, max_bisect):
    """Fixed-step classical RK4 with the same event and transition logic as simulate_dp45."""
    n = y0.size
    y = y0.copy()
    ynew = np.empty(n)
    ysub = np.empty(n)
    ws = np.empty((5, n))
    t = t0
    mode = initial_mode(t, y, a0, a, b, omega, mu, rho, nu, gamma)
    n_events = 0
    while t < tf:
        hs = min(h, tf - t)
        last = hs >= tf - t
        rk4_step(t, y, hs, mode, a0, a, b, omega, mu, rho, nu, gamma, ynew, ws)
        g1 = event_value(t + hs, ynew, mode, a0, a, b, omega, mu, rho, nu, gamma)
        if g1 <= 0.0:
            lo = 0.0
            hi = hs
            for _ in range(max_bisect):
                if hi - lo <= event_tol:
                    break
                mid = 0.5 * (lo + hi)
                rk4_step(t, y, mid, mode, a0, a, b, omega, mu, rho, nu, gamma, ysub, ws)
                if event_value(t + mid, ysub, mode, a0, a, b, omega, mu, rho, nu, gamma) > 0.0:
                    lo = mid
                else:
                    hi = mid
            if hi < hs:
                rk4_step(t, y, hi, mode, a0, a, b, omega, mu, rho, nu, gamma, ynew, ws)
                t = t + hi
            else:
                t = tf if last else t + hs
            for i in range(n):
                y[i] = ynew[i]
            mode, _ = apply_transition(t, y, mode, a0, a, b, omega, mu, rho, nu, gamma)
            n_events += 1
            continue
        t = tf if last else t + hs
        for i in range(n):
            y[i] = ynew[i]
    return y, mode, n_events


@njit(cache=True, nogil=True)
def shape_at(t, direction, omega):
    v = 0.0
    for k in range(direction.size // 2):
        kwt = (k + 1) * omega * t
        v += direction[2 * k] * math.cos(kwt) + direction[2 * k + 1] * math.sin(kwt)
    return v


@njit(cache=True, nogil=True)
def _golden(direction, omega, a, b, sign, xtol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = sign * shape_at(c, direction, omega)
    fd = sign * shape_at(d, direction, omega)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = sign * shape_at(c, direction, omega)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = sign * shape_at(d, direction, omega)
    return shape_at(0.5 * (a + b), direction, omega)


@njit(cache=True, nogil=True)
def shape_extrema(direction, omega, t0, span, n, clip, xtol):
    """Min/max of the shape polynomial sampled on n points of [t0, t0 + span],
    each refined by golden-section search within one grid spacing.

    Harmonics are generated by the angle-addition recurrence, so each sample
    costs one sin/cos pair.
    """
    K = direction.size // 2
    dt = span / (n - 1)
    vmin = math.inf
    vmax = -math.inf
    imin = 0
    imax = 0
    for i in range(n):
        t = t0 + i * dt
        c1 = math.cos(omega * t)
        s1 = math.sin(omega * t)
        ck = c1
        sk = s1
        v = 0.0
        for k in range(K):
            v += direction[2 * k] * ck + direction[2 * k + 1] * sk
            ck, sk = ck * c1 - sk * s1, sk * c1 + ck * s1
        if v < vmin:
            vmin = v
            imin = i
        if v > vmax:
            vmax = v
            imax = i
    # exact re-evaluation at the grid optima guards against recurrence drift
    tmin = t0 + imin * dt
    tmax = t0 + imax * dt
    vmin = shape_at(tmin, direction, omega)
    vmax = shape_at(tmax, direction, omega)
    lo = t0
    hi = t0 + span
    a, b = tmin - dt, tmin + dt
    if clip:
        a, b = max(a, lo), min(b, hi)
    vmin = min(vmin, _golden(direction, omega, a, b, 1.0, xtol))
    a, b = tmax - dt, tmax + dt
    if clip:
        a, b = max(a, lo), min(b, hi)
    vmax = max(vmax, _golden(direction, omega, a, b, -1.0, xtol))
    return vmin, vmax
