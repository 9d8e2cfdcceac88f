# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled time-stepping loop for the moving-frame free boundary problem.

Must stay numerically equivalent to ``_kernels_py.advance``.
"""

from libc.math cimport cos, sin, floor, isfinite

OK = 0
CFL_VIOLATION = 1
NOT_FINITE = 2
PIN_OUT_OF_RANGE = 3
REACHED_H = 4


def thomas_factor(int n, double r, int zero_slope_left):
    """Prefactor ``(I - r D2)`` on the unknowns of one step.

    Returns ``(cprime, inv)``: modified upper diagonal and reciprocal pivots.
    """
    import numpy as np
    cp = np.empty(n)
    inv = np.empty(n)
    cdef double[::1] c_ = cp
    cdef double[::1] i_ = inv
    cdef double b = 1.0 + 2.0 * r
    cdef double upper0 = -2.0 * r if zero_slope_left else -r
    cdef int i
    i_[0] = 1.0 / b
    c_[0] = upper0 * i_[0]
    for i in range(1, n):
        i_[i] = 1.0 / (b + r * c_[i - 1])
        c_[i] = -r * i_[i]
    return cp, inv


def advance(double[::1] w, double h, double t, long nsteps, double h_stop,
            double dx, double dt, double mu, int flux_order, int zero_slope_left, int central,
            double base, double[::1] amps, double[::1] freqs,
            double[:, ::1] cos_tab, double[:, ::1] sin_tab,
            double[::1] ustar, double ustar_x0, double ustar_dx,
            double[::1] cprime, double[::1] inv,
            double[::1] out_t, double[::1] out_h, double[::1] out_hp, long offset,
            double[::1] prev_w):
    """Take up to ``nsteps`` steps in place on ``w``.

    The step that carries ``h`` to ``h_stop`` or beyond is the last one; the
    state before it is copied to ``prev_w``. Returns
    ``(h, t, steps_taken, status, crossed)``.
    """
    cdef Py_ssize_t N = w.shape[0] - 1
    cdef Py_ssize_t nm = amps.shape[0]
    cdef Py_ssize_t nu = ustar.shape[0]
    cdef Py_ssize_t i, k, j, first
    cdef long step
    cdef double r = dt / (dx * dx)
    cdef double L = N * dx
    cdef double flux, hp, g, adv, wi, d, prev, pos, frac, left
    cdef double lam = 0.0
    cdef double h_new
    cdef double ch[16]
    cdef double sh[16]
    cdef int status = OK
    cdef int crossed = 0
    if nm > 16:
        raise ValueError("at most 16 modes supported")
    import numpy as np
    dbuf = np.empty(N + 1)
    cdef double[::1] dp = dbuf

    first = 1 - zero_slope_left
    for step in range(nsteps):
        if h >= h_stop:
            status = REACHED_H
            break
        if flux_order == 2:
            flux = (-4.0 * w[N - 1] + w[N - 2]) / (2.0 * dx)
        else:
            flux = -w[N - 1] / dx
        hp = -mu * flux
        out_t[offset + step] = t
        out_h[offset + step] = h
        out_hp[offset + step] = hp
        if not isfinite(hp):
            status = NOT_FINITE
            break
        if dt * (hp if hp > 0 else -hp) > dx:
            status = CFL_VIOLATION
            break
        lam = hp * dt / dx
        for k in range(nm):
            ch[k] = cos(freqs[k] * h)
            sh[k] = sin(freqs[k] * h)

        # new boundary values
        h_new = h + dt * hp
        if not zero_slope_left:
            pos = (h_new - L - ustar_x0) / ustar_dx
            j = <Py_ssize_t> floor(pos)
            if j < 0 or j >= nu - 1:
                if j == nu - 1 and pos - j < 1e-9:
                    j = nu - 2
                else:
                    status = PIN_OUT_OF_RANGE
                    break
            frac = pos - j
            left = ustar[j] + frac * (ustar[j + 1] - ustar[j])
        else:
            left = 0.0

        if h_new >= h_stop:
            crossed = 1
            for i in range(N + 1):
                prev_w[i] = w[i]

        # explicit advection + reaction
        if central:
            for i in range(1, N):
                wi = w[i]
                dp[i] = wi + 0.5 * lam * (w[i + 1] - w[i - 1]) + dt * wi * (base - wi)
            if first == 0:
                wi = w[0]
                dp[0] = wi + dt * wi * (base - wi)
        elif hp >= 0:
            for i in range(first, N):
                wi = w[i]
                dp[i] = wi + lam * (w[i + 1] - wi) + dt * wi * (base - wi)
        else:
            for i in range(1, N):
                wi = w[i]
                dp[i] = wi + lam * (wi - w[i - 1]) + dt * wi * (base - wi)
            if first == 0:
                wi = w[0]
                dp[0] = wi + lam * (wi - w[1]) + dt * wi * (base - wi)
        for k in range(nm):
            for i in range(first, N):
                wi = w[i]
                dp[i] += dt * wi * amps[k] * (cos_tab[k, i] * ch[k] - sin_tab[k, i] * sh[k])
        if first == 1:
            dp[1] += r * left
        # forward sweep
        prev = dp[first] * inv[0]
        dp[first] = prev
        for i in range(first + 1, N):
            prev = (dp[i] + r * prev) * inv[i - first]
            dp[i] = prev
        if not isfinite(prev):
            status = NOT_FINITE
            break
        # back substitution; w[N] stays 0
        w[N - 1] = dp[N - 1]
        for i in range(N - 2, first - 1, -1):
            w[i] = dp[i] - cprime[i - first] * w[i + 1]
        if first == 1:
            w[0] = left
        w[N] = 0.0
        h = h_new
        t = t + dt
        if crossed:
            step += 1
            break
    else:
        step = nsteps
    if status == REACHED_H:
        status = OK
    return h, t, step, status, crossed
