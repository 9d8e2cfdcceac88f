"""Command-line driver: ``semiwave <subcommand> --config FILE [--out DIR]``.

Every subcommand writes CSV artifacts plus ``summary_<name>.txt`` of
``key=value`` lines. Exit status is 0 when every check passes, 1 when a
check fails and 2 on errors.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io as sio
from .builder import build_semiwave, extract_profile, monotone_in_time_check, tail_gap, veq_residual
from .config import ConfigError, ExperimentConfig, load
from .diagnostics import (
    DiagnosticsError,
    almost_period_scan,
    average_speed,
    average_speed_trend,
    forward_convergence,
    period_defect,
    rho_series,
    speed_bounds,
    speed_law,
)
from .freeboundary import FrontState, SolverError, evolve, init_cutoff, steady_for_run
from .media import MediumError, bounds, format_medium
from .oracle import OracleError, shoot_profile, solve_speed
from .steady_state import SteadyStateError

SUBCOMMANDS = ("steady", "evolve", "semiwave", "speed", "rho", "almost-period", "oracle", "verify-all")


class Summary(list):
    """Ordered ``(key, value)`` pairs; booleans are checks."""

    def check(self, key, ok):
        self.append((key, bool(ok)))

    def value(self, key, v):
        self.append((key, v))

    @property
    def passed(self) -> bool:
        return all(v for _, v in self if isinstance(v, bool))


def _h_end(cfg: ExperimentConfig) -> float:
    s = cfg.solver
    if s.stop_h is not None:
        return s.stop_h
    if s.stop_t is None:
        raise ConfigError("solver needs stop_t or stop_h")
    # generous bound on the front travel; a pin outside the table is reported by the solver
    top = bounds(cfg.medium)[1]
    return cfg.h0 + 4.0 * math.sqrt(top) * s.stop_t + 10.0


def _steady(cfg: ExperimentConfig, h0: float | None = None, h_end: float | None = None):
    h0 = cfg.h0 if h0 is None else h0
    return steady_for_run(cfg.medium, cfg.solver, h0, _h_end(cfg) if h_end is None else h_end,
                          tol=cfg.steady_tol)


def _cutoff_run(cfg: ExperimentConfig, steady=None, **kw):
    steady = _steady(cfg) if steady is None else steady
    state = init_cutoff(cfg.medium, steady, cfg.h0, cfg.n, cfg.solver)
    return steady, evolve(state, cfg.solver, **kw)


# subcommands ----------------------------------------------------------------

def cmd_steady(cfg, out: Path, args) -> Summary:
    st = _steady(cfg)
    sio.write_steady(out / "steady.csv", st)
    lo, hi = bounds(cfg.medium)
    tol = cfg.steady_tol
    s = Summary()
    s.value("steady.residual", st.residual_norm)
    s.value("steady.min", float(st.values.min()))
    s.value("steady.max", float(st.values.max()))
    s.check("steady.residual_ok", st.residual_norm <= tol)
    s.check("steady.within_bounds", st.values.min() >= lo * (1 - tol) and st.values.max() <= hi * (1 + tol))
    s.check("steady.sandwich_closed", st.sandwich_gap <= 2 * tol / lo)
    if cfg.medium.is_constant:
        s.check("steady.constant_exact", float(np.max(np.abs(st.values - cfg.medium.base))) <= 1e-8)
    return s


def _resume_state(cfg, path, steady) -> FrontState:
    snap = sio.read_snapshot(path)
    if snap.medium_spec != format_medium(cfg.medium).replace(" ", ""):
        raise sio.SnapshotError(f"{path}: medium {snap.medium_spec!r} differs from the config")
    if snap.dx != cfg.solver.dx or len(snap.w) != cfg.solver.n_cells + 1:
        raise sio.SnapshotError(f"{path}: grid (dx={snap.dx!r}, {len(snap.w)} points) differs from the config")
    return snap.to_state(steady)


def cmd_evolve(cfg, out: Path, args) -> Summary:
    steady = _steady(cfg)
    if args.resume:
        state = _resume_state(cfg, args.resume, steady)
    else:
        state = init_cutoff(cfg.medium, steady, cfg.h0, cfg.n, cfg.solver)
    traj = evolve(state, cfg.solver)
    stride = cfg.solver.snapshot_stride
    for snap in traj.snapshots:
        if stride and snap.step % stride == 0 and snap.step != state.step:
            sio.write_snapshot(out / "snapshots" / f"step_{snap.step:010d}.csv", snap, cfg.solver.dx)
    sio.write_snapshot(out / "final.csv", traj.final, cfg.solver.dx)
    sio.write_speed_series(out / "speed.csv", traj)
    s = Summary()
    s.value("evolve.t_final", traj.final.t)
    s.value("evolve.h_final", traj.final.h)
    s.value("evolve.steps", traj.final.step)
    for v in traj.violations:
        s.value("evolve.violation", v.replace("\n", " "))
    s.check("evolve.invariants", not traj.violations)
    if traj.post_transient().any():
        b = speed_bounds(traj)
        s.value("evolve.m", b.m)
        s.value("evolve.M", b.M)
        s.check("evolve.m_positive", b.m > 0)
    if stride and len(traj.snapshots) > 2:
        mono = monotone_in_time_check(traj)
        s.value("evolve.monotone_min_increment", mono.min_increment)
        s.check("evolve.monotone_in_t", mono.holds)
        try:
            fc = forward_convergence(traj, steady)
        except DiagnosticsError:
            fc = None
        if fc is not None:
            s.value("evolve.forward_gap", fc.max_gap)
            s.value("evolve.forward_max_increase", fc.max_increase)
            s.check("evolve.forward_converges", fc.max_gap < 1e-2 and fc.decreasing(cfg.solver.dt))
    return s


def cmd_semiwave(cfg, out: Path, args) -> Summary:
    tau_lo, tau_hi = cfg.tau_window
    steady = _steady(cfg, min(cfg.h0_list), tau_hi + 2 * cfg.tau_step + cfg.solver.dx + 5)
    search = cfg.shift_search * cfg.tau_step
    if cfg.ladder_window is None:
        rep = build_semiwave(cfg.medium, cfg.solver, cfg.n_list, cfg.h0_list, cfg.tau_window,
                             cfg.tau_step, steady=steady, jobs=args.jobs, search=search)
        ladder = rep
    else:
        # the n-ladder only separates close to h0; the h0 ladder is compared later on
        ladder = build_semiwave(cfg.medium, cfg.solver, cfg.n_list, [min(cfg.h0_list)],
                                tuple(cfg.ladder_window), cfg.tau_step, steady=steady, jobs=args.jobs)
        rep = build_semiwave(cfg.medium, cfg.solver, [cfg.n_list[-1]], cfg.h0_list, cfg.tau_window,
                             cfg.tau_step, steady=steady, jobs=args.jobs, search=search)
        rep.rows = ladder.rows + rep.rows
    sio.write_profile(out / "profile.csv", rep.profile)
    sio.write_convergence(out / "convergence.csv", rep.rows)
    res = veq_residual(rep.profile, literal=args.mu_literal_veq)
    L = cfg.solver.L
    xi = rep.profile.xi
    gaps = tail_gap(rep.profile, steady)
    g_half = float(gaps[int(np.argmin(np.abs(xi + L / 2)))])
    g_quarter = float(gaps[int(np.argmin(np.abs(xi + L / 4)))])
    s = Summary()
    for kind, n, h0, d in rep.rows:
        s.value(f"semiwave.diff.{kind}.n{n:g}.h0{h0:g}", d)
    s.value("semiwave.min_n_increment", ladder.min_n_increment)
    s.value("semiwave.max_h_excess", ladder.max_h_excess)
    s.check("semiwave.monotone_in_n", ladder.monotone_in_n)
    s.check("semiwave.cauchy_shrinking", ladder.cauchy_shrinking)
    if len(cfg.h0_list) > 1:
        rel = rep.h0_distance / float(np.max(np.abs(rep.profile.v)))
        s.value("semiwave.h0_distance", rep.h0_distance)
        s.value("semiwave.h0_distance_rel", rel)
        s.value("semiwave.h0_best_shift", rep.h0_best_shift)
        s.check("semiwave.unique_up_to_translation", rel <= 0.02)
    s.value("semiwave.veq_residual", res.norm)
    s.value("semiwave.veq_mode", "literal" if res.literal else "mu")
    s.value("semiwave.tail_gap_half", g_half)
    s.value("semiwave.tail_gap_quarter", g_quarter)
    s.check("semiwave.tail_converges", g_half < 1e-2 and g_half < g_quarter)
    return s


def cmd_speed(cfg, out: Path, args) -> Summary:
    steady, traj = _cutoff_run(cfg)
    law = speed_law(traj)
    b = speed_bounds(traj)
    sio.write_speed_series(out / "speed.csv", traj)
    sio.write_speed_law(out / "speedlaw.csv", law)
    sio.write_bounds(out / "bounds.csv", [(format_medium(cfg.medium).replace(" ", ""), b.m, b.M)])
    s = Summary()
    s.value("speed.m", b.m)
    s.value("speed.M", b.M)
    s.value("speed.mean_f", law.mean)
    s.check("speed.m_positive", b.m > 0)
    s.check("speed.M_finite", math.isfinite(b.M))
    med = cfg.medium
    if med.is_constant:
        tail = traj.hp[int(0.8 * len(traj.hp)):]
        oracle = solve_speed(med.base, cfg.solver.mu)
        rel = abs(float(np.mean(tail)) - oracle.c) / oracle.c
        s.value("speed.oracle_c", oracle.c)
        s.value("speed.tail_mean", float(np.mean(tail)))
        s.check("speed.oracle_match", rel <= 0.01)
    elif len(med.modes) == 1:
        period = 2 * math.pi / med.modes[0][1]
        defect = period_defect(law, period) / law.mean
        starts = law.h[0] + period * np.arange(int((law.h[-1] - law.h[0]) // period))
        avg = np.array([average_speed(law, r, r + period) for r in starts])
        s.value("speed.period_defect_rel", defect)
        s.check("speed.periodic_f", defect < 0.02)
        if avg.size:
            spread = float(np.ptp(avg) / np.mean(avg))
            s.value("speed.window_average_spread", spread)
            s.check("speed.window_average_constant", spread < 0.01)
    return s


def _state_at(traj, h):
    for snap in traj.snapshots:
        if snap.h >= h:
            return snap
    raise SolverError(f"run never reached h={h:g}")


def _restart(cfg, state, tau, h_end):
    state = state.copy()
    state.t, state.step = 0.0, 0
    traj = evolve(state, cfg.solver, stop_t=None, stop_h=h_end, capture=tau)
    return extract_profile(traj, tau)


def cmd_rho(cfg, out: Path, args) -> Summary:
    tau_r = cfg.tau_start
    # tau levels strictly after the restart, spanning tau_length
    tau = tau_r + cfg.tau_step * np.arange(1, int(round(cfg.tau_length / cfg.tau_step)) + 2)
    h_end = tau[-1] + 1.0
    lag = 5.0
    steady = _steady(cfg, cfg.h0, h_end + 5)
    _, base = _cutoff_run(cfg, steady, stop_t=None, stop_h=tau_r + 1.0, capture=[tau_r - lag, tau_r])
    upper = _restart(cfg, _state_at(base, tau_r), tau, h_end)
    earlier = _restart(cfg, _state_at(base, tau_r - lag), tau, h_end)
    scaled_state = _state_at(base, tau_r).copy()
    scaled_state.w = cfg.rho_scale * scaled_state.w
    scaled = _restart(cfg, scaled_state, tau, h_end)
    s = Summary()
    for name, lower in (("shifted", earlier), ("scaled", scaled)):
        series = rho_series(lower, upper, steady, tol=cfg.rho_tol)
        sio.write_rho(out / f"rho_{name}.csv", series)
        s.value(f"rho.{name}.first", float(series.rho[0]))
        s.value(f"rho.{name}.last", float(series.rho[-1]))
        s.value(f"rho.{name}.max_backward_step", series.max_backward_step)
        for issue in series.hypothesis_violations:
            s.value(f"rho.{name}.screen", issue)
        s.check(f"rho.{name}.nondecreasing", series.max_backward_step <= cfg.rho_tol)
    return s


def cmd_almost_period(cfg, out: Path, args) -> Summary:
    _, traj = _cutoff_run(cfg)
    law = speed_law(traj)
    lo = max(cfg.avg_start, float(law.h[0]))
    hs, fs = law.resample(cfg.ap_step, lo, float(law.h[-1]))
    shifts = cfg.ap_step * np.arange(1, int(round(cfg.ap_max_shift / cfg.ap_step)) + 1)
    ap = almost_period_scan(fs, cfg.ap_eps * law.mean, shifts, cfg.ap_step)
    trend = average_speed_trend(law, lo, cfg.avg_lengths)
    sio.write_speed_law(out / "speedlaw.csv", law)
    sio.write_almost_periods(out / "almostperiods.csv", ap)
    s = Summary()
    s.value("almost_period.eps", ap.eps)
    s.value("almost_period.count", int(ap.qualifying.size))
    s.value("almost_period.max_gap", ap.max_gap)
    s.check("almost_period.relatively_dense", ap.max_gap < cfg.ap_max_gap)
    for L, c in zip(trend.lengths, trend.speeds):
        s.value(f"almost_period.average_speed.{L:g}", c)
    s.value("almost_period.contraction", trend.contraction)
    s.check("almost_period.average_converges", trend.contraction >= 1.5)
    return s


def cmd_oracle(cfg, out: Path, args) -> Summary:
    rows, first = [], None
    s = Summary()
    for mu in cfg.oracle_mu:
        r = solve_speed(cfg.a0, mu)
        rows.append((mu, r.c))
        first = first or r
        s.value(f"oracle.c.mu{mu:g}", r.c)
        s.check(f"oracle.residual.mu{mu:g}", r.residual <= 1e-9)
    sio.write_oracle_table(out / "oracle.csv", rows)
    xi, q, _, _ = shoot_profile(cfg.a0, first.c)
    sio.write_oracle_profile(out / "oracle_profile.csv", xi, q)
    return s


def cmd_verify_all(cfg, out: Path, args) -> Summary:
    total = Summary()
    for name in ("steady", "oracle", "speed", "semiwave", "rho", "almost-period"):
        part = COMMANDS[name](cfg, out, args)
        sio.write_summary(out / f"summary_{name}.txt", part)
        total.extend(part)
    return total


COMMANDS = {
    "steady": cmd_steady,
    "evolve": cmd_evolve,
    "semiwave": cmd_semiwave,
    "speed": cmd_speed,
    "rho": cmd_rho,
    "almost-period": cmd_almost_period,
    "oracle": cmd_oracle,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semiwave", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--out", default=None, help="output directory (default: $SEMIWAVE_OUT, the config, or ./out)")
    p.add_argument("--jobs", type=int, default=1, help="parallel ladder runs")
    p.add_argument("--resume", default=None, help="snapshot file to continue from (evolve only)")
    p.add_argument("--mu-literal-veq", action="store_true",
                   help="drop the mu factor from the pull-back residual")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.resume and args.command != "evolve":
        print("error: --resume only applies to evolve", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or os.environ.get("SEMIWAVE_OUT") or cfg.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    try:
        summary = COMMANDS[args.command](cfg, out, args)
    except (ConfigError, MediumError, SteadyStateError, SolverError, OracleError,
            DiagnosticsError, sio.SnapshotError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    name = "summary.txt" if args.command == "verify-all" else f"summary_{args.command}.txt"
    sio.write_summary(out / name, summary)
    for key, value in summary:
        if isinstance(value, bool):
            value = "PASS" if value else "FAIL"
        print(f"{key}={sio.fmt(value)}")
    return 0 if summary.passed else 1


if __name__ == "__main__":
    sys.exit(main())
