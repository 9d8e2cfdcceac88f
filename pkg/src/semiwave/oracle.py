"""Shooting solver for the semi-wave of a constant medium.

In the moving frame the profile ``q(xi)``, ``xi <= 0``, of a front moving
at constant speed ``c`` satisfies

    q'' + c q' + q (a0 - q) = 0,   q(-inf) = a0,   q(0) = 0,   q' < 0,

and the Stefan condition fixes the speed through ``c = -mu q'(0)``.
``shoot_profile`` integrates from the ``a0`` end along the unstable
manifold; ``solve_speed`` bisects on ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

__all__ = ["OracleError", "ShootingResult", "exit_rate", "shoot_profile", "solve_speed"]

DELTA = 1e-6


class OracleError(RuntimeError):
    pass


def exit_rate(a0: float, c: float) -> float:
    """Growth rate of ``a0 - q`` as xi increases away from the rest state."""
    return 0.5 * (-c + math.sqrt(c * c + 4.0 * a0))


def _rk4(state, h, a0, c):
    q, p = state
    a1, b1 = p, -c * p - q * (a0 - q)
    q2, p2 = q + 0.5 * h * a1, p + 0.5 * h * b1
    a2, b2 = p2, -c * p2 - q2 * (a0 - q2)
    q3, p3 = q + 0.5 * h * a2, p + 0.5 * h * b2
    a3, b3 = p3, -c * p3 - q3 * (a0 - q3)
    q4, p4 = q + h * a3, p + h * b3
    a4, b4 = p4, -c * p4 - q4 * (a0 - q4)
    return (q + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4),
            p + h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4))


@dataclass
class ShootingResult:
    a0: float
    mu: float
    c: float
    xi: np.ndarray
    q: np.ndarray
    dq: np.ndarray
    slope0: float
    residual: float

    def profile(self, xi):
        """Evaluate ``q`` anywhere on ``xi <= 0``; linear-manifold tail beyond the samples."""
        xi = np.asarray(xi, dtype=float)
        spline = CubicHermiteSpline(self.xi, self.q, self.dq)
        out = np.where(xi >= self.xi[0], spline(np.clip(xi, self.xi[0], 0.0)), 0.0)
        lam = exit_rate(self.a0, self.c)
        gap0 = self.a0 - self.q[0]
        tail = self.a0 - gap0 * np.exp(lam * (xi - self.xi[0]))
        out = np.where(xi < self.xi[0], tail, out)
        return out


def shoot_profile(a0: float, c: float, L_far: float = 80.0, ode_dx: float = 1e-2,
                  delta: float = DELTA):
    """Integrate one trajectory of the unstable manifold of ``q = a0``.

    Returns ``(xi, q, dq, slope0)`` with ``xi`` translated so that the zero
    crossing sits at ``xi = 0``.
    """
    if not 0.0 < c < 2.0 * math.sqrt(a0):
        raise OracleError(f"speed {c} outside (0, 2 sqrt(a0))")
    lam = exit_rate(a0, c)
    state = (a0 - delta, -lam * delta)
    xs = [0.0]
    states = [state]
    n_max = int(math.ceil(L_far / ode_dx))
    for k in range(n_max):
        nxt = _rk4(state, ode_dx, a0, c)
        if nxt[0] > a0:
            raise OracleError("trajectory left the unstable manifold (q > a0)")
        if nxt[0] <= 0.0:
            s = brentq(lambda h: _rk4(state, h, a0, c)[0], 0.0, ode_dx, xtol=1e-15, rtol=1e-15)
            last = (0.0, _rk4(state, s, a0, c)[1])
            xs.append(xs[-1] + s)
            states.append(last)
            break
        xs.append((k + 1) * ode_dx)
        states.append(nxt)
        state = nxt
    else:
        raise OracleError(f"no zero crossing within L_far={L_far}")
    xs = np.asarray(xs)
    states = np.asarray(states)
    xi = xs - xs[-1]
    return xi, states[:, 0], states[:, 1], float(states[-1, 1])


def _phi(c, a0, mu, L_far, ode_dx):
    try:
        _, _, _, slope0 = shoot_profile(a0, c, L_far, ode_dx)
    except OracleError:
        # no crossing: the trajectory creeps into q = 0 with vanishing slope
        slope0 = 0.0
    return -mu * slope0 - c


def solve_speed(a0: float = 1.0, mu: float = 1.0, tol: float = 1e-12,
                L_far: float = 200.0, ode_dx: float = 1e-2, eps: float = 1e-6) -> ShootingResult:
    """Bisect for the speed at which the Stefan condition closes."""
    if a0 <= 0 or mu <= 0:
        raise OracleError("a0 and mu must be positive")
    lo, hi = eps, 2.0 * math.sqrt(a0) - eps
    f_lo = _phi(lo, a0, mu, L_far, ode_dx)
    f_hi = _phi(hi, a0, mu, L_far, ode_dx)
    if f_lo * f_hi > 0:
        raise OracleError(f"no sign change: Phi({lo:g})={f_lo:g}, Phi({hi:g})={f_hi:g}")
    while True:
        mid = 0.5 * (lo + hi)
        f_mid = _phi(mid, a0, mu, L_far, ode_dx)
        if abs(f_mid) <= tol or hi - lo <= 4 * np.finfo(float).eps * mid:
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    xi, q, dq, slope0 = shoot_profile(a0, mid, L_far, ode_dx)
    return ShootingResult(a0, mu, mid, xi, q, dq, slope0, abs(mid + mu * slope0))
