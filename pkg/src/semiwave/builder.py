"""Semi-wave construction: cutoff ladders, pull-back profiles and their checks."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .freeboundary import (
    SolverConfig,
    Trajectory,
    evolve,
    init_cutoff,
    steady_for_run,
)
from .media import QuasiPeriodicMedium
from .steady_state import SteadyState

__all__ = [
    "ProfileError",
    "Profile",
    "ResidualReport",
    "LadderRun",
    "SemiwaveReport",
    "MonotoneReport",
    "extract_profile",
    "veq_residual",
    "profile_distance",
    "build_semiwave",
    "tail_gap",
    "monotone_in_time_check",
    "lab_window",
]


class ProfileError(ValueError):
    pass


@dataclass
class Profile:
    """``v(xi, tau)``: row ``k`` is the moving-frame state when the front sits at ``tau[k]``."""

    xi: np.ndarray
    tau: np.ndarray
    v: np.ndarray
    medium: QuasiPeriodicMedium
    mu: float

    @property
    def dx(self) -> float:
        return float(self.xi[1] - self.xi[0])

    def at(self, tau: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.tau - tau)))
        if not math.isclose(self.tau[k], tau, rel_tol=0, abs_tol=1e-9):
            raise ProfileError(f"tau={tau} is not on the profile grid")
        return self.v[k]

    def window(self, lo: float, hi: float) -> "Profile":
        sel = (self.tau >= lo - 1e-9) & (self.tau <= hi + 1e-9)
        return Profile(self.xi, self.tau[sel], self.v[sel], self.medium, self.mu)


def extract_profile(trajectory: Trajectory, tau_grid) -> Profile:
    """Pull back to front-position time: ``v(., tau) = w(., h^{-1}(tau))``.

    ``h^{-1}`` is read off the dense ``(t, h)`` record; snapshots are then
    interpolated linearly in ``t``.
    """
    tau = np.asarray(tau_grid, dtype=float)
    snaps = trajectory.snapshots
    st = np.array([s.t for s in snaps])
    sh = np.array([s.h for s in snaps])
    if tau.min() < sh[0] or tau.max() > sh[-1]:
        raise ProfileError(
            f"tau range [{tau.min():g}, {tau.max():g}] outside front range [{sh[0]:g}, {sh[-1]:g}]"
        )
    t_dense, h_dense = trajectory.t, trajectory.h
    lo = np.searchsorted(h_dense, tau.min(), side="right") - 1
    hi = np.searchsorted(h_dense, tau.max(), side="left") + 1
    window = h_dense[max(lo, 0):hi]
    if window.size > 1 and np.any(np.diff(window) <= 0):
        raise ProfileError("front position is not strictly increasing over the tau window")
    t_star = np.interp(tau, h_dense[max(lo, 0):hi], t_dense[max(lo, 0):hi])
    v = np.empty((tau.size, len(snaps[0].w)))
    for i, ts in enumerate(t_star):
        k = int(np.searchsorted(st, ts, side="right") - 1)
        k = min(max(k, 0), len(snaps) - 2)
        span = st[k + 1] - st[k]
        theta = (ts - st[k]) / span
        if theta <= 0.0:
            v[i] = snaps[k].w
        elif theta >= 1.0:
            v[i] = snaps[k + 1].w
        else:
            v[i] = (1.0 - theta) * snaps[k].w + theta * snaps[k + 1].w
    return Profile(trajectory.xi, tau, v, trajectory.medium, trajectory.config.mu)


@dataclass
class ResidualReport:
    field: np.ndarray
    norm: float
    literal: bool


def veq_residual(profile: Profile, medium: QuasiPeriodicMedium | None = None,
                 mu: float | None = None, literal: bool = False, trim: int = 1) -> ResidualReport:
    """Residual of the pulled-back equation

        mu (-v_xi(0, tau)) (-v_xi + v_tau) = v_xixi + v (g(xi + tau) - v)

    by central differences at interior ``(xi, tau)`` nodes. ``literal=True``
    drops the factor ``mu``. ``trim`` removes extra layers of nodes next to
    the ``xi`` ends.
    """
    medium = profile.medium if medium is None else medium
    mu = profile.mu if mu is None else mu
    coef = 1.0 if literal else mu
    v, xi, tau = profile.v, profile.xi, profile.tau
    if tau.size < 3:
        raise ProfileError("need at least 3 tau levels")
    dx = xi[1] - xi[0]
    slope0 = (-4.0 * v[:, -2] + v[:, -3]) / (2.0 * dx)
    vc = v[1:-1, 1:-1]
    v_xi = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * dx)
    v_xixi = (v[1:-1, 2:] - 2 * vc + v[1:-1, :-2]) / dx ** 2
    dtau = (tau[2:] - tau[:-2])[:, None]
    v_tau = (v[2:, 1:-1] - v[:-2, 1:-1]) / dtau
    g = medium(xi[None, 1:-1] + tau[1:-1, None])
    lhs = coef * (-slope0[1:-1, None]) * (-v_xi + v_tau)
    res = lhs - v_xixi - vc * (g - vc)
    t = max(trim - 1, 0)
    core = res[:, t:res.shape[1] - t] if t else res
    return ResidualReport(res, float(np.max(np.abs(core))) if core.size else 0.0, literal)


def profile_distance(p1: Profile, p2: Profile, search: float = 0.0, relative: bool = False) -> tuple[float, float]:
    """Sup distance at equal ``tau``, optionally minimised over a ``tau`` shift.

    Returns ``(distance, best_shift)``.
    """
    if p1.v.shape[1] != p2.v.shape[1]:
        raise ProfileError("profiles live on different xi grids")
    dtau = p1.tau[1] - p1.tau[0] if p1.tau.size > 1 else 1.0
    kmax = int(round(search / dtau)) if search > 0 else 0
    best = (math.inf, 0.0)
    scale = max(np.max(np.abs(p2.v)), 1e-300) if relative else 1.0
    for k in range(-kmax, kmax + 1):
        t1 = p1.tau + k * dtau
        common = np.intersect1d(np.round(t1, 9), np.round(p2.tau, 9))
        if common.size == 0:
            continue
        i1 = np.searchsorted(np.round(t1, 9), common)
        i2 = np.searchsorted(np.round(p2.tau, 9), common)
        d = float(np.max(np.abs(p1.v[i1] - p2.v[i2]))) / scale
        if d < best[0]:
            best = (d, k * dtau)
    return best


@dataclass
class LadderRun:
    n: float
    h0: float
    trajectory: Trajectory
    profile: Profile


@dataclass
class SemiwaveReport:
    profile: Profile
    runs: list[LadderRun]
    rows: list[tuple[str, float, float, float]] = field(default_factory=list)
    monotone_in_n: bool = True
    cauchy_shrinking: bool = True
    h0_distance: float = float("nan")
    h0_best_shift: float = 0.0
    min_n_increment: float = float("nan")
    max_h_excess: float = float("nan")

    @property
    def construction_violated(self) -> bool:
        return not self.monotone_in_n


def _ladder_job(args):
    medium, config, steady, n, h0, tau, h_end = args
    state = init_cutoff(medium, steady, h0, n, config)
    traj = evolve(state, config, stop_t=None, stop_h=h_end, capture=tau)
    return LadderRun(n, h0, traj, extract_profile(traj, tau))


def build_semiwave(medium: QuasiPeriodicMedium, config: SolverConfig, n_list, h0_list,
                   tau_window: tuple[float, float], tau_step: float = 0.5,
                   steady: SteadyState | None = None, jobs: int = 1,
                   search: float = 0.0) -> SemiwaveReport:
    """Run every ``(n, h0)`` cutoff and compare profiles on a common tau window.

    ``n_list`` must increase and ``h0_list`` decrease. The returned profile
    is the run with the largest ``n`` and most negative ``h0``.
    """
    n_list = list(n_list)
    h0_list = list(h0_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    if any(b >= a for a, b in zip(h0_list, h0_list[1:])):
        raise ValueError("h0_list must be decreasing")
    lo, hi = tau_window
    if lo < max(h0_list):
        raise ValueError("tau window must start after every h0")
    tau = lo + tau_step * np.arange(int(round((hi - lo) / tau_step)) + 1)
    h_end = tau[-1] + 2 * tau_step + config.dx
    if steady is None:
        steady = steady_for_run(medium, config, min(h0_list), h_end + 5)
    jobs_args = [(medium, config, steady, n, h0, tau, h_end) for h0 in h0_list for n in n_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_ladder_job, jobs_args))
    else:
        runs = [_ladder_job(a) for a in jobs_args]
    by_key = {(r.n, r.h0): r for r in runs}

    rows = []
    monotone = True
    shrinking = True
    min_inc = math.inf
    max_h_excess = -math.inf
    tol_h = 2 * config.dx
    for h0 in h0_list:
        prev_diff = math.inf
        for n_lo, n_hi in zip(n_list, n_list[1:]):
            a, b = by_key[(n_lo, h0)], by_key[(n_hi, h0)]
            inc = float(np.min(b.profile.v - a.profile.v))
            slope = float(np.max(np.abs(np.diff(b.profile.v, axis=1)))) / config.dx
            min_inc = min(min_inc, inc)
            if inc < -2 * config.dx * slope:
                monotone = False
            m = min(len(a.trajectory.h), len(b.trajectory.h))
            excess = float(np.max(a.trajectory.h[:m] - b.trajectory.h[:m]))
            max_h_excess = max(max_h_excess, excess)
            if excess > tol_h:
                monotone = False
            diff = float(np.max(np.abs(b.profile.v - a.profile.v)))
            if diff > prev_diff:
                shrinking = False
            prev_diff = diff
            rows.append(("n", n_hi, h0, diff))
    n_top = n_list[-1]
    h0_dist, h0_shift = float("nan"), 0.0
    for h_a, h_b in zip(h0_list, h0_list[1:]):
        d, s = profile_distance(by_key[(n_top, h_b)].profile, by_key[(n_top, h_a)].profile,
                                search=search)
        rows.append(("h0", n_top, h_b, d))
        h0_dist, h0_shift = d, s
    finest = by_key[(n_top, h0_list[-1])]
    return SemiwaveReport(finest.profile, runs, rows, monotone, shrinking, h0_dist, h0_shift,
                          min_inc, max_h_excess)


def tail_gap(profile: Profile, steady: SteadyState) -> np.ndarray:
    """``sup_tau |v(xi, tau) - u*(xi + tau)|`` for every ``xi`` of the profile."""
    ustar = steady(profile.xi[None, :] + profile.tau[:, None])
    return np.max(np.abs(profile.v - ustar), axis=0)


def lab_window(state, xi, x) -> np.ndarray:
    """Lab-frame values ``u(x)`` from a moving-frame state by cubic interpolation.

    Zero beyond the front, NaN left of the frame.
    """
    x = np.asarray(x, dtype=float)
    xs = xi + state.h
    out = CubicSpline(xs, state.w)(np.clip(x, xs[0], xs[-1]))
    out = np.where(x > xs[-1], 0.0, out)
    return np.where(x < xs[0], np.nan, out)


@dataclass
class MonotoneReport:
    min_increment: float
    pairs: int
    tol: float

    @property
    def holds(self) -> bool:
        return self.min_increment >= -self.tol


def monotone_in_time_check(trajectory: Trajectory, t_from: float | None = None,
                           tol: float | None = None, pairs=None, margin: float = 5.0) -> MonotoneReport:
    """Smallest ``u(x, t2) - u(x, t1)`` over ``x <= h(t1)`` for snapshot pairs ``t1 < t2``.

    By default consecutive snapshots with ``t1 >= t_from`` are compared.
    Points within ``margin`` of the truncated left end of either frame are
    skipped; the pinned boundary layer there is not part of the solution.
    """
    xi = trajectory.xi
    snaps = trajectory.snapshots
    if t_from is None:
        t_from = trajectory.config.transient_cutoff
    if pairs is None:
        idx = [i for i, s in enumerate(snaps) if s.t >= t_from]
        pairs = list(zip(idx, idx[1:]))
    worst = math.inf
    for i, j in pairs:
        s1, s2 = snaps[i], snaps[j]
        x = xi + s1.h
        sel = x >= s2.h + xi[0] + margin
        d = lab_window(s2, xi, x[sel]) - s1.w[sel]
        if d.size:
            worst = min(worst, float(np.min(d)))
    if worst == math.inf:
        worst = 0.0
    return MonotoneReport(worst, len(pairs), trajectory.config.dt if tol is None else tol)
