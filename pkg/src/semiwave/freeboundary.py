"""Free boundary problem in the front-fixed frame ``xi = x - h(t)``.

On ``xi in [-L, 0]`` the unknown ``w(xi, t) = u(xi + h(t), t)`` solves

    w_t = w_xixi + h'(t) w_xi + w (g(xi + h(t)) - w),   w(0, t) = 0,
    h'(t) = -mu w_xi(0, t).

Diffusion is implicit (prefactored tridiagonal solve), advection
(first-order upwind) and reaction explicit, and ``h`` advances by
explicit Euler with the boundary flux of the old state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import get_backend
from .media import QuasiPeriodicMedium, bounds
from .steady_state import SteadyState, compute_steady_state

__all__ = [
    "SolverError",
    "SolverConfig",
    "FrontState",
    "Trajectory",
    "OrderingReport",
    "cutoff",
    "init_cutoff",
    "boundary_flux",
    "step",
    "evolve",
    "compare_ordered",
    "steady_for_run",
]

LEFT_BCS = ("pin", "zero-slope")
ADVECTION = ("upwind", "central")
_STATUS = {1: "CFL violation dt*|h'| > dx", 2: "non-finite values", 3: "pinned boundary left the steady-state grid"}


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    dx: float = 0.05
    dt: float = 1e-3
    L: float = 40.0
    mu: float = 1.0
    left_bc: str = "pin"
    flux_order: int = 2
    advection: str = "upwind"
    transient_cutoff: float = 0.0
    stop_t: float | None = None
    stop_h: float | None = None
    snapshot_stride: int = 0

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0:
            raise ValueError("dx and dt must be positive")
        if self.dt > 0.5 * self.dx ** 2 * (1 + 1e-9):
            raise ValueError(f"dt={self.dt:g} exceeds 0.5*dx^2={0.5 * self.dx ** 2:g}")
        if self.L < 20:
            raise ValueError(f"L={self.L:g} must be at least 20")
        n = round(self.L / self.dx)
        if abs(n * self.dx - self.L) > 1e-9 * self.L:
            raise ValueError(f"L/dx must be an integer (L={self.L}, dx={self.dx})")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.left_bc not in LEFT_BCS:
            raise ValueError(f"left_bc must be one of {LEFT_BCS}, got {self.left_bc!r}")
        if self.flux_order not in (1, 2):
            raise ValueError("flux_order must be 1 or 2")
        if self.advection not in ADVECTION:
            raise ValueError(f"advection must be one of {ADVECTION}, got {self.advection!r}")
        if self.snapshot_stride < 0:
            raise ValueError("snapshot_stride must be >= 0")

    @property
    def n_cells(self) -> int:
        return int(round(self.L / self.dx))

    @property
    def xi(self) -> np.ndarray:
        n = self.n_cells
        return self.dx * (np.arange(n + 1) - n)

    def refined(self, factor: int = 2) -> "SolverConfig":
        """``(dx, dt) -> (dx/f, dt/f^2)`` with the stride scaled to keep snapshot times."""
        return replace(self, dx=self.dx / factor, dt=self.dt / factor ** 2,
                       snapshot_stride=self.snapshot_stride * factor ** 2)


@dataclass
class FrontState:
    t: float
    h: float
    w: np.ndarray
    medium: QuasiPeriodicMedium
    steady: SteadyState | None = None
    step: int = 0

    @property
    def dx(self) -> float:
        return self.steady.dx if self.steady is not None else float("nan")

    def xi(self, dx: float) -> np.ndarray:
        n = len(self.w) - 1
        return dx * (np.arange(n + 1) - n)

    def copy(self) -> "FrontState":
        return replace(self, w=self.w.copy())


@dataclass
class Trajectory:
    config: SolverConfig
    medium: QuasiPeriodicMedium
    steady: SteadyState | None
    t: np.ndarray
    h: np.ndarray
    hp: np.ndarray
    snapshots: list[FrontState] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def final(self) -> FrontState:
        return self.snapshots[-1]

    @property
    def xi(self) -> np.ndarray:
        return self.config.xi

    def post_transient(self) -> np.ndarray:
        return self.t >= self.config.transient_cutoff

    @property
    def speed_bounds(self) -> tuple[float, float]:
        mask = self.post_transient()
        if not mask.any():
            return float("nan"), float("nan")
        return float(self.hp[mask].min()), float(self.hp[mask].max())

    @property
    def snapshot_times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def snapshot_fronts(self) -> np.ndarray:
        return np.array([s.h for s in self.snapshots])


def cutoff(z):
    """Ramp equal to 1 for ``z <= -1`` and ``-z`` on ``(-1, 0]``."""
    z = np.asarray(z, dtype=float)
    return np.where(z <= -1.0, 1.0, -z)


def steady_for_run(medium, config: SolverConfig, h0: float, h_end: float,
                   tol: float = 1e-10, margin: float = 25.0) -> SteadyState:
    """Steady state on a grid covering every pinned left end of the run."""
    lo = h0 - config.L - margin
    hi = max(h0, h_end) + margin
    n = int(math.ceil((hi - lo) / config.dx))
    n += n % 2
    half = 0.5 * n * config.dx
    return compute_steady_state(medium, half, config.dx, tol, center=lo + half)


def init_cutoff(medium, steady: SteadyState, h0: float, n: float,
                config: SolverConfig) -> FrontState:
    """``w(xi) = H(n xi) u*(xi + h0)`` on the moving grid."""
    if n < 1:
        raise ValueError("cutoff index n must be >= 1")
    xi = config.xi
    w = cutoff(n * xi) * steady(xi + h0)
    w[-1] = 0.0
    return FrontState(t=0.0, h=float(h0), w=w, medium=medium, steady=steady)


def boundary_flux(state_or_w, config: SolverConfig) -> float:
    """One-sided ``w_xi(0)`` with ``w(0) = 0``."""
    w = state_or_w.w if isinstance(state_or_w, FrontState) else np.asarray(state_or_w)
    if len(w) < 3:
        raise ValueError("need at least 3 grid points")
    if config.flux_order == 2:
        return float((-4.0 * w[-2] + w[-3]) / (2.0 * config.dx))
    return float(-w[-2] / config.dx)


class _Stepper:
    """Precomputed tables shared by every call into the backend."""

    def __init__(self, medium, steady, config, backend=None):
        self.config = config
        self.medium = medium
        self.steady = steady
        self.kern = get_backend(backend)
        xi = config.xi
        amps, freqs, cos_tab, sin_tab = medium.mode_tables(xi)
        self.base = medium.base
        self.amps = np.ascontiguousarray(amps)
        self.freqs = np.ascontiguousarray(freqs)
        self.cos_tab = np.ascontiguousarray(cos_tab.reshape(len(amps), len(xi)))
        self.sin_tab = np.ascontiguousarray(sin_tab.reshape(len(amps), len(xi)))
        zero_slope = config.left_bc == "zero-slope"
        self.zero_slope = int(zero_slope)
        n_unknown = config.n_cells - (0 if zero_slope else 1)
        r = config.dt / config.dx ** 2
        self.cprime, self.inv = self.kern.thomas_factor(n_unknown, r, self.zero_slope)
        if steady is not None:
            self.ustar = np.ascontiguousarray(steady.values)
            self.ustar_x0, self.ustar_dx = steady.x0, steady.dx
        elif zero_slope:
            self.ustar, self.ustar_x0, self.ustar_dx = np.zeros(2), 0.0, 1.0
        else:
            raise ValueError("pinned left boundary needs a steady state")

    def run(self, w, h, t, nsteps, h_stop, out_t, out_h, out_hp, offset, prev_w=None):
        c = self.config
        if prev_w is None:
            prev_w = np.empty_like(w)
        return self.kern.advance(
            w, h, t, nsteps, h_stop, c.dx, c.dt, c.mu, c.flux_order, self.zero_slope,
            int(c.advection == "central"),
            self.base, self.amps, self.freqs, self.cos_tab, self.sin_tab,
            self.ustar, self.ustar_x0, self.ustar_dx, self.cprime, self.inv,
            out_t, out_h, out_hp, offset, prev_w)


def _check_state(state: FrontState, cap: float) -> list[str]:
    w = state.w
    issues = []
    if w[-1] != 0.0:
        issues.append(f"t={state.t:.6g}: w(0) = {w[-1]!r} != 0")
    if not np.isfinite(w).all():
        issues.append(f"t={state.t:.6g}: non-finite values")
    lo, hi = float(w.min()), float(w.max())
    if lo < -1e-12:
        issues.append(f"t={state.t:.6g}: negative value {lo:g}")
    if hi > cap * (1 + 1e-9):
        issues.append(f"t={state.t:.6g}: value {hi:g} above bound {cap:g}")
    return issues


def step(state: FrontState, config: SolverConfig, backend: str | None = None) -> FrontState:
    """One time step; returns a new state."""
    stepper = _Stepper(state.medium, state.steady, config, backend)
    new = state.copy()
    buf = np.empty(1), np.empty(1), np.empty(1)
    h, t, done, status, _ = stepper.run(new.w, new.h, new.t, 1, math.inf, *buf, 0)
    if status:
        raise SolverError(f"{_STATUS[status]} at t={state.t:.6g}")
    new.h, new.t, new.step = h, t, state.step + done
    return new


def evolve(state: FrontState, config: SolverConfig, stop_t: float | None = None,
           stop_h: float | None = None, backend: str | None = None,
           capture=None, max_steps: int = 50_000_000) -> Trajectory:
    """Repeated steps until ``t >= stop_t`` or ``h >= stop_h``.

    Records ``(t, h, h')`` at every step and a snapshot every
    ``config.snapshot_stride`` steps, plus the first and last states. For
    every front position in ``capture`` the two states straddling it (one
    step apart) are added to the snapshots. Nonpositive speeds after
    ``config.transient_cutoff`` are flagged in ``violations``.
    """
    stop_t = config.stop_t if stop_t is None else stop_t
    stop_h = config.stop_h if stop_h is None else stop_h
    if stop_t is None and stop_h is None:
        raise ValueError("need stop_t or stop_h")
    if not np.any(state.w[:-1] > 0):
        raise ValueError("initial data is identically zero; the front would not move")
    stepper = _Stepper(state.medium, state.steady, config, backend)
    upper = bounds(state.medium)[1]
    cap = max(upper, float(state.w.max()))
    if state.steady is not None:
        cap = max(cap, float(state.steady.values.max()))

    cur = state.copy()
    total = max_steps
    if stop_t is not None:
        total = min(total, max(0, int(round((stop_t - cur.t) / config.dt))))
    h_final = math.inf if stop_h is None else stop_h
    targets = [] if capture is None else sorted(float(x) for x in capture if x > cur.h)
    stride = config.snapshot_stride
    next_snap = cur.step + stride if stride else None
    prev_w = np.empty_like(cur.w)

    ts, hs, hps = [], [], []
    snapshots = {cur.step: cur.copy()}
    violations = _check_state(cur, cap)
    done_total = 0
    ti = 0
    while done_total < total and cur.h < h_final:
        chunk = total - done_total
        chunk = min(chunk, next_snap - cur.step if next_snap is not None else 8192)
        while ti < len(targets) and targets[ti] <= cur.h:
            ti += 1
        h_stop = min(h_final, targets[ti]) if ti < len(targets) else h_final
        out = np.empty(chunk), np.empty(chunk), np.empty(chunk)
        t_before = cur.t
        h, t, done, status, crossed = stepper.run(cur.w, cur.h, cur.t, chunk, h_stop,
                                                  *out, 0, prev_w)
        ts.append(out[0][:done])
        hs.append(out[1][:done])
        hps.append(out[2][:done])
        cur.h, cur.t, cur.step = float(h), float(t), cur.step + done
        done_total += done
        if status:
            raise SolverError(f"{_STATUS[status]} at t={t:.6g}, h={h:.6g}")
        violations += _check_state(cur, cap)
        if crossed and h_stop < h_final:
            before = FrontState(t=float(out[0][done - 1]), h=float(out[1][done - 1]),
                                w=prev_w.copy(), medium=cur.medium, steady=cur.steady,
                                step=cur.step - 1)
            snapshots[before.step] = before
            snapshots[cur.step] = cur.copy()
        if next_snap is not None and cur.step == next_snap:
            snapshots[cur.step] = cur.copy()
            next_snap += stride
        if done == 0 and t == t_before:
            break
    final_hp = -config.mu * boundary_flux(cur.w, config)
    ts.append(np.array([cur.t]))
    hs.append(np.array([cur.h]))
    hps.append(np.array([final_hp]))
    snapshots[cur.step] = cur.copy()
    ordered = [snapshots[k] for k in sorted(snapshots)]
    traj = Trajectory(config, state.medium, state.steady, np.concatenate(ts),
                      np.concatenate(hs), np.concatenate(hps), ordered, violations)
    mask = traj.post_transient()
    if mask.any():
        m, _ = traj.speed_bounds
        if m <= 0:
            traj.violations.append(f"h' <= 0 after transient cutoff (min {m:g})")
        dh = np.diff(traj.h[mask])
        if dh.size and dh.min() <= 0:
            traj.violations.append("h not strictly increasing after transient cutoff")
    return traj


@dataclass
class OrderingReport:
    max_h_excess: float
    min_h_excess: float
    max_u_excess: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.max_h_excess <= self.tol and self.max_u_excess <= self.tol

    @property
    def violation(self) -> float:
        return max(self.max_h_excess, self.max_u_excess, 0.0)


def _lab_values(state: FrontState, xi, x):
    """``u(x)`` from a moving-frame state; zero beyond the front."""
    xs = xi + state.h
    out = np.interp(x, xs, state.w, left=np.nan, right=0.0)
    return out


def compare_ordered(traj1: Trajectory, traj2: Trajectory, tol: float | None = None) -> OrderingReport:
    """Check ``h1 <= h2`` and ``u1 <= u2`` on the common lab-frame overlap."""
    n = min(len(traj1.t), len(traj2.t))
    if not np.allclose(traj1.t[:n], traj2.t[:n], rtol=0, atol=1e-9 * max(1.0, abs(traj1.t[n - 1]))):
        raise ValueError("trajectories are not on a common time grid")
    tol = 2 * traj1.config.dx if tol is None else tol
    diff = traj1.h[:n] - traj2.h[:n]
    xi1, xi2 = traj1.xi, traj2.xi
    u_excess = -math.inf
    steps2 = {s.step: s for s in traj2.snapshots}
    for s1 in traj1.snapshots:
        s2 = steps2.get(s1.step)
        if s2 is None:
            continue
        x = xi1 + s1.h
        lo = max(s1.h + xi1[0], s2.h + xi2[0])
        sel = x >= lo
        u2 = _lab_values(s2, xi2, x[sel])
        u_excess = max(u_excess, float(np.max(s1.w[sel] - u2)))
    return OrderingReport(float(diff.max()), float(diff.min()), u_excess, tol)
