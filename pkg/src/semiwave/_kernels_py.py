"""NumPy fallback for the stepping loop; mirrors ``_kernels.pyx`` step for step."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_banded

OK = 0
CFL_VIOLATION = 1
NOT_FINITE = 2
PIN_OUT_OF_RANGE = 3


def thomas_factor(n, r, zero_slope_left):
    cp = np.empty(n)
    inv = np.empty(n)
    b = 1.0 + 2.0 * r
    inv[0] = 1.0 / b
    cp[0] = (-2.0 * r if zero_slope_left else -r) * inv[0]
    for i in range(1, n):
        inv[i] = 1.0 / (b + r * cp[i - 1])
        cp[i] = -r * inv[i]
    return cp, inv


def _banded(n, r, zero_slope_left):
    ab = np.empty((3, n))
    ab[0] = -r
    ab[1] = 1.0 + 2.0 * r
    ab[2] = -r
    if zero_slope_left and n > 1:
        ab[0, 1] = -2.0 * r
    return ab


def advance(w, h, t, nsteps, h_stop, dx, dt, mu, flux_order, zero_slope_left, central,
            base, amps, freqs, cos_tab, sin_tab, ustar, ustar_x0, ustar_dx,
            cprime, inv, out_t, out_h, out_hp, offset, prev_w):
    N = w.shape[0] - 1
    first = 0 if zero_slope_left else 1
    r = dt / (dx * dx)
    L = N * dx
    nu = ustar.shape[0]
    ab = _banded(N - first, r, zero_slope_left)
    cos_in = cos_tab[:, first:N]
    sin_in = sin_tab[:, first:N]
    status = OK
    crossed = 0
    step = 0
    while step < nsteps:
        if h >= h_stop:
            break
        if flux_order == 2:
            flux = (-4.0 * w[N - 1] + w[N - 2]) / (2.0 * dx)
        else:
            flux = -w[N - 1] / dx
        hp = -mu * flux
        out_t[offset + step] = t
        out_h[offset + step] = h
        out_hp[offset + step] = hp
        if not math.isfinite(hp):
            status = NOT_FINITE
            break
        if dt * abs(hp) > dx:
            status = CFL_VIOLATION
            break
        lam = hp * dt / dx
        h_new = h + dt * hp
        if h_new >= h_stop:
            crossed = 1
            prev_w[:] = w
        if not zero_slope_left:
            pos = (h_new - L - ustar_x0) / ustar_dx
            j = int(math.floor(pos))
            if j == nu - 1 and pos - j < 1e-9:
                j = nu - 2
            if j < 0 or j >= nu - 1:
                status = PIN_OUT_OF_RANGE
                break
            left = ustar[j] + (pos - j) * (ustar[j + 1] - ustar[j])
        else:
            left = 0.0

        g = base + amps @ (cos_in * np.cos(freqs * h)[:, None]
                           - sin_in * np.sin(freqs * h)[:, None]) if len(amps) else base
        wi = w[first:N]
        if central:
            adv = np.zeros_like(wi)
            adv[1 - first:] = 0.5 * lam * (w[2:N + 1] - w[:N - 1])
        elif hp >= 0:
            adv = lam * (w[first + 1:N + 1] - wi)
        else:
            back = w[first - 1:N - 1] if first else np.concatenate(([w[1]], w[:N - 1]))
            adv = lam * (wi - back)
        d = wi + adv + dt * wi * (g - wi)
        if first:
            d[0] += r * left
        sol = solve_banded((1, 1), ab, d, check_finite=False)
        if not np.isfinite(sol).all():
            status = NOT_FINITE
            break
        w[first:N] = sol
        if first:
            w[0] = left
        w[N] = 0.0
        h = h_new
        t = t + dt
        step += 1
        if crossed:
            break
    return h, t, step, status, crossed
