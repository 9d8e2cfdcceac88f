"""Measurements on trajectories and profiles: the ratio functional, the speed
law ``h' = f(h)``, harmonic-mean average speed, speed bounds and Bohr
almost-period scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from scipy.integrate import trapezoid

from .builder import Profile, lab_window
from .freeboundary import Trajectory
from .steady_state import SteadyState

__all__ = [
    "DiagnosticsError",
    "rho",
    "RhoSeries",
    "rho_series",
    "SpeedLaw",
    "speed_law",
    "average_speed",
    "AlmostPeriods",
    "almost_period_scan",
    "SpeedBounds",
    "speed_bounds",
    "period_defect",
    "AverageSpeedTrend",
    "average_speed_trend",
    "ForwardConvergence",
    "forward_convergence",
]


class DiagnosticsError(ValueError):
    pass


def rho(v1, v2, dx: float) -> float:
    """``inf_{xi < 0} v1 / v2`` on a grid ending at ``xi = 0``.

    Both slices vanish at ``xi = 0``; there the limit is the ratio of
    one-sided slopes, which competes with the interior minimum.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    inner2 = v2[:-1]
    if np.any(inner2 <= 0):
        raise DiagnosticsError("denominator slice must be positive for xi < 0")
    value = float(np.min(v1[:-1] / inner2))
    s2 = (-4.0 * v2[-2] + v2[-3] + 3.0 * v2[-1]) / (2.0 * dx)
    s1 = (-4.0 * v1[-2] + v1[-3] + 3.0 * v1[-1]) / (2.0 * dx)
    if s2 < 0:
        value = min(value, s1 / s2)
    return value


@dataclass
class RhoSeries:
    tau: np.ndarray
    rho: np.ndarray
    tol: float
    hypothesis_violations: list[str] = field(default_factory=list)

    @property
    def max_backward_step(self) -> float:
        if self.rho.size < 2:
            return 0.0
        return float(max(0.0, np.max(self.rho[:-1] - self.rho[1:])))

    @property
    def nondecreasing(self) -> bool:
        return self.max_backward_step <= self.tol


def rho_series(profile1: Profile, profile2: Profile, steady: SteadyState | None = None,
               tol: float = 1e-3, screen_tol: float = 1e-6) -> RhoSeries:
    """``rho(tau)`` over the tau levels the two profiles share.

    Screens the comparison hypotheses ``v1 <= v2 <= u*`` and
    ``-v2_xi + v2_tau >= 0``; violations are reported, never raised.
    """
    t1 = np.round(profile1.tau, 9)
    t2 = np.round(profile2.tau, 9)
    common = np.intersect1d(t1, t2)
    i1 = np.searchsorted(t1, common)
    i2 = np.searchsorted(t2, common)
    v1 = profile1.v[i1]
    v2 = profile2.v[i2]
    tau = profile1.tau[i1]
    dx = profile1.dx
    issues = []
    excess = float(np.max(v1 - v2))
    if excess > screen_tol:
        issues.append(f"v1 > v2 by up to {excess:.3g}")
    if steady is not None:
        over = float(np.max(v2 - steady(profile2.xi[None, :] + tau[:, None])))
        if over > screen_tol:
            issues.append(f"v2 > u* by up to {over:.3g}")
    if tau.size >= 3:
        v2_xi = (v2[1:-1, 2:] - v2[1:-1, :-2]) / (2 * dx)
        v2_tau = (v2[2:, 1:-1] - v2[:-2, 1:-1]) / (tau[2:] - tau[:-2])[:, None]
        worst = float(np.min(-v2_xi + v2_tau))
        if worst < -screen_tol:
            issues.append(f"-v2_xi + v2_tau negative down to {worst:.3g}")
    values = np.array([rho(a, b, dx) for a, b in zip(v1, v2)])
    return RhoSeries(tau, values, tol, issues)


@dataclass
class SpeedLaw:
    """Piecewise-linear ``f`` with ``h'(t) = f(h(t))``."""

    h: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        if self.h.size == 0:
            raise DiagnosticsError("empty speed law")
        if np.any(np.diff(self.h) <= 0):
            raise DiagnosticsError("front positions must increase strictly")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.h[0] - 1e-12) or np.any(x > self.h[-1] + 1e-12):
            raise DiagnosticsError(f"positions outside [{self.h[0]:g}, {self.h[-1]:g}]")
        out = np.interp(x, self.h, self.f)
        return float(out) if out.ndim == 0 else out

    @property
    def mean(self) -> float:
        return float(np.mean(self.f))

    def resample(self, step: float, lo: float | None = None, hi: float | None = None):
        lo = self.h[0] if lo is None else lo
        hi = self.h[-1] if hi is None else hi
        grid = lo + step * np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1)
        return grid, self(grid)

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.f > 0))


def speed_law(trajectory: Trajectory, transient_cutoff: float | None = None) -> SpeedLaw:
    """Tabulate ``(h(t), h'(t))`` after the transient, one entry per distinct ``h``."""
    cut = trajectory.config.transient_cutoff if transient_cutoff is None else transient_cutoff
    mask = trajectory.t >= cut
    if not mask.any():
        raise DiagnosticsError(f"no samples after transient cutoff t={cut:g}")
    h = trajectory.h[mask]
    f = trajectory.hp[mask]
    keep = np.concatenate(([True], np.diff(h) > 0))
    if not np.all(np.maximum.accumulate(h)[keep] == h[keep]):
        raise DiagnosticsError("front is not monotone after the transient")
    return SpeedLaw(h[keep], f[keep])


def average_speed(law: SpeedLaw, r: float, s: float) -> float:
    """``|s - r| / int_r^s dh / f(h)`` by the trapezoid rule on the law's nodes."""
    lo, hi = min(r, s), max(r, s)
    if lo < law.h[0] - 1e-12 or hi > law.h[-1] + 1e-12:
        raise DiagnosticsError(f"window [{lo:g}, {hi:g}] exceeds [{law.h[0]:g}, {law.h[-1]:g}]")
    if hi == lo:
        return float(law(lo))
    inside = (law.h > lo) & (law.h < hi)
    x = np.concatenate(([lo], law.h[inside], [hi]))
    f = np.concatenate(([law(lo)], law.f[inside], [law(hi)]))
    if np.any(f <= 0):
        raise DiagnosticsError("speed law is not positive on the window")
    return (hi - lo) / float(trapezoid(1.0 / f, x))


@dataclass
class AlmostPeriods:
    shifts: np.ndarray
    sup_diff: np.ndarray
    eps: float

    @property
    def qualifying(self) -> np.ndarray:
        return self.shifts[self.sup_diff <= self.eps]

    @property
    def max_gap(self) -> float:
        """Largest shift-free stretch in ``[0, max scanned shift]``.

        The stretch after the last qualifying shift counts too, so a
        scan that stops finding periods early is not reported as dense.
        """
        q = self.qualifying[self.qualifying > 0]
        if q.size == 0:
            return math.inf
        q = np.concatenate(([0.0], q, [float(np.max(self.shifts))]))
        return float(np.max(np.diff(q)))


def almost_period_scan(series, eps: float, shift_grid, spacing: float | None = None) -> AlmostPeriods:
    """Bohr test of every shift: ``T`` qualifies if ``sup |F(. + T) - F(.)| <= eps``.

    ``series`` is sampled on a uniform grid of step ``spacing`` along axis 0;
    any further axes are included in the sup. Shifts that are not grid
    multiples use linear interpolation.
    """
    F = np.asarray(series, dtype=float)
    n = F.shape[0]
    d = 1.0 if spacing is None else float(spacing)
    shifts = np.asarray(shift_grid, dtype=float)
    length = (n - 1) * d
    if shifts.size and length < 4 * np.max(np.abs(shifts)) - 1e-9:
        raise DiagnosticsError(
            f"window length {length:g} shorter than 4x the largest shift {np.max(np.abs(shifts)):g}"
        )
    sup = np.empty(shifts.size)
    for i, T in enumerate(shifts):
        q = abs(T) / d
        k = int(math.floor(q + 1e-9))
        theta = q - k
        if theta < 1e-9:
            theta = 0.0
        m = n - k - (1 if theta > 0 else 0)
        base = F[:m]
        moved = F[k:k + m] if theta == 0 else (1 - theta) * F[k:k + m] + theta * F[k + 1:k + 1 + m]
        sup[i] = float(np.max(np.abs(moved - base))) if m > 0 else math.inf
    return AlmostPeriods(shifts, sup, eps)


@dataclass
class SpeedBounds:
    m: float
    M: float

    @property
    def violated(self) -> bool:
        return not (self.m > 0)

    @property
    def ratio(self) -> float:
        return self.M / self.m if self.m > 0 else math.inf


def speed_bounds(trajectory: Trajectory, transient_cutoff: float | None = None) -> SpeedBounds:
    """Extremes of ``h'`` after the transient; ``violated`` when ``m <= 0``."""
    cut = trajectory.config.transient_cutoff if transient_cutoff is None else transient_cutoff
    mask = trajectory.t >= cut
    if not mask.any():
        raise DiagnosticsError(f"no samples after transient cutoff t={cut:g}")
    hp = trajectory.hp[mask]
    return SpeedBounds(float(hp.min()), float(hp.max()))


def period_defect(law: SpeedLaw, period: float) -> float:
    """``sup |f(h + P) - f(h)|`` over the law's nodes whose shift stays in range."""
    h = law.h[law.h + period <= law.h[-1]]
    if h.size == 0:
        raise DiagnosticsError(f"speed law shorter than one period {period:g}")
    return float(np.max(np.abs(law(h + period) - law(h))))


@dataclass
class AverageSpeedTrend:
    start: float
    lengths: np.ndarray
    speeds: np.ndarray

    @property
    def differences(self) -> np.ndarray:
        return np.abs(np.diff(self.speeds))

    @property
    def contraction(self) -> float:
        """Smallest ratio of successive differences.

        Differences already at roundoff relative to the speed count as
        converged and give ``inf``.
        """
        d = self.differences
        if d.size < 2:
            raise DiagnosticsError("need at least three window lengths")
        floor = 1e-12 * float(np.max(np.abs(self.speeds)))
        ratios = [math.inf if b <= floor else a / b for a, b in zip(d, d[1:])]
        return float(min(ratios))


def average_speed_trend(law: SpeedLaw, start: float, lengths) -> AverageSpeedTrend:
    lengths = np.asarray(sorted(lengths), dtype=float)
    speeds = np.array([average_speed(law, start, start + L) for L in lengths])
    return AverageSpeedTrend(start, lengths, speeds)


@dataclass
class ForwardConvergence:
    """Lab-frame gap ``sup_window |u(., t) - u*|`` at successive snapshots."""

    t: np.ndarray
    h: np.ndarray
    gap: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(np.max(self.gap)) if self.gap.size else math.nan

    @property
    def max_increase(self) -> float:
        return float(np.max(np.diff(self.gap), initial=0.0))

    def decreasing(self, tol: float = 0.0) -> bool:
        return self.max_increase <= tol


def forward_convergence(trajectory: Trajectory, steady: SteadyState, window=(-10.0, 0.0),
                        h_from: float = 30.0) -> ForwardConvergence:
    """Gap to ``u*`` on a fixed lab window at every snapshot with ``h > h_from``.

    Snapshots whose frame no longer covers the window are skipped.
    """
    lo, hi = window
    xi = trajectory.xi
    x = np.arange(lo, hi + 0.5 * trajectory.config.dx, trajectory.config.dx)
    ustar = steady(x)
    ts, hs, gaps = [], [], []
    for s in trajectory.snapshots:
        if s.h <= h_from or s.h + xi[0] > lo or s.h < hi:
            continue
        ts.append(s.t)
        hs.append(s.h)
        gaps.append(float(np.max(np.abs(lab_window(s, xi, x) - ustar))))
    if not gaps:
        raise DiagnosticsError(f"no snapshot with h > {h_from:g} covers the window [{lo:g}, {hi:g}]")
    return ForwardConvergence(np.array(ts), np.array(hs), np.array(gaps))
