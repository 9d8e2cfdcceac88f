"""Bounded positive steady state of ``u_t = u_xx + u (g(x) - u)`` on a truncated line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .media import QuasiPeriodicMedium, bounds

__all__ = [
    "SteadyStateError",
    "SteadyState",
    "compute_steady_state",
    "march_steady",
    "steady_residual",
]


class SteadyStateError(RuntimeError):
    pass


@dataclass
class SteadyState:
    """Samples of the steady state on ``[center - L, center + L]``."""

    L: float
    dx: float
    values: np.ndarray
    medium: QuasiPeriodicMedium
    residual_norm: float
    tol: float = 0.0
    center: float = 0.0
    sandwich_gap: float = float("nan")
    iterations: int = 0

    @property
    def x(self) -> np.ndarray:
        n = len(self.values) - 1
        return self.x0 + self.dx * np.arange(n + 1)

    @property
    def x0(self) -> float:
        return self.center - self.L

    def __call__(self, x):
        """Linear interpolation; raises outside the sampled interval."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.x0, self.x0 + self.dx * (len(self.values) - 1)
        if np.any(x < lo - 1e-9 * self.dx) or np.any(x > hi + 1e-9 * self.dx):
            raise SteadyStateError(
                f"steady state sampled on [{lo:g}, {hi:g}] queried outside it"
            )
        out = np.interp(x, self.x, self.values)
        return float(out) if out.ndim == 0 else out


def _grid(L, dx, center):
    n = int(round(2 * L / dx))
    if n < 2 or abs(n * dx - 2 * L) > 1e-9 * max(L, 1.0):
        raise SteadyStateError(f"2L/dx must be an integer (L={L}, dx={dx})")
    return center - L + dx * np.arange(n + 1)


def _second_difference(u, dx):
    """Zero-slope ends via reflection."""
    d2 = np.empty_like(u)
    d2[1:-1] = u[2:] - 2 * u[1:-1] + u[:-2]
    d2[0] = 2 * (u[1] - u[0])
    d2[-1] = 2 * (u[-2] - u[-1])
    return d2 / (dx * dx)


def steady_residual(values, g, dx) -> float:
    """Max-norm of ``u_xx + u (g - u)`` at interior nodes."""
    u = np.asarray(values, dtype=float)
    g = np.broadcast_to(np.asarray(g, dtype=float), u.shape)
    if u.size < 3:
        return 0.0
    res = (u[2:] - 2 * u[1:-1] + u[:-2]) / (dx * dx) + u[1:-1] * (g[1:-1] - u[1:-1])
    return float(np.max(np.abs(res)))


def march_steady(g, u0, dx, tol, pseudo_dt=10.0, max_iter=5000, band=None):
    """Linearly implicit pseudo-time march to a steady state.

    Each step solves ``(1/dt + u^n - D2) u^{n+1} = u^n (1/dt + g)``. The
    matrix is an M-matrix and the right side is nonnegative, so the march is
    order preserving: constant upper (lower) solutions give monotonically
    decreasing (increasing) iterates.

    Returns ``(u, residual, iterations)``.
    """
    g = np.asarray(g, dtype=float)
    u = np.array(u0, dtype=float, copy=True) * np.ones_like(g)
    n = u.size
    r = 1.0 / (dx * dx)
    ab = np.zeros((3, n))
    for it in range(1, max_iter + 1):
        ab[0, 1:] = -r
        ab[2, :-1] = -r
        ab[0, 1] = -2 * r
        ab[2, -2] = -2 * r
        ab[1] = 1.0 / pseudo_dt + u + 2 * r
        u = solve_banded((1, 1), ab, u * (1.0 / pseudo_dt + g))
        if band is not None:
            lo, hi = band
            if u.min() < lo or u.max() > hi:
                raise SteadyStateError(
                    f"iterate left [{lo:g}, {hi:g}] at iteration {it}: "
                    f"range [{u.min():g}, {u.max():g}]"
                )
        res = float(np.max(np.abs(_second_difference(u, dx) + u * (g - u))))
        if res < tol:
            return u, res, it
    raise SteadyStateError(f"no convergence in {max_iter} iterations (residual {res:g})")


def compute_steady_state(medium: QuasiPeriodicMedium, L: float, dx: float, tol: float = 1e-9,
                         center: float = 0.0, max_iter: int = 5000,
                         pseudo_dt: float = 10.0) -> SteadyState:
    """March down from ``S = max g`` and up from ``s = min g``.

    The two limits must agree to within ``2 tol``; the upper march is
    returned.
    """
    if tol <= 0:
        raise SteadyStateError("tol must be positive")
    lower, upper = bounds(medium)
    x = _grid(L, dx, center)
    g = medium(x)
    band = (lower * (1 - tol), upper * (1 + tol))
    u_hi, res_hi, it_hi = march_steady(g, upper, dx, tol, pseudo_dt, max_iter, band)
    u_lo, _, it_lo = march_steady(g, lower, dx, tol, pseudo_dt, max_iter, band)
    gap = float(np.max(np.abs(u_hi - u_lo)))
    if gap > 2 * tol / lower:
        raise SteadyStateError(f"upper and lower marches disagree by {gap:g}")
    return SteadyState(L=L, dx=dx, values=u_hi, medium=medium,
                       residual_norm=steady_residual(u_hi, g, dx), tol=tol,
                       center=center, sandwich_gap=gap, iterations=max(it_hi, it_lo))
