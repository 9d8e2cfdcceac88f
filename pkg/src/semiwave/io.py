"""Plain-text artifacts: CSV tables, snapshots and key=value summaries.

Every float goes through ``%.17g`` so files are byte-deterministic and
read back to the identical double.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .freeboundary import FrontState, Trajectory
from .media import format_medium, parse_medium

SNAPSHOT_VERSION = 1
_SNAPSHOT_MAGIC = "# semiwave-snapshot"
_SNAPSHOT_FIELDS = ("t", "h", "step", "dx", "n", "medium")


class SnapshotError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def _write(path, header: list[str], columns: tuple[str, ...], rows) -> str:
    path = os.fspath(path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_csv(path) -> tuple[dict[str, str], list[str], np.ndarray]:
    """Metadata (from ``# key=value`` lines), column names and the numeric body."""
    meta, cols, body = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                for tok in line[1:].strip().split(" "):
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        meta[k] = v
            elif cols is None:
                cols = line.split(",")
            elif line:
                body.append([float(v) for v in line.split(",")])
    return meta, cols or [], np.array(body, dtype=float).reshape(-1, len(cols or [0]))


def write_steady(path, steady) -> str:
    header = [f"medium={format_medium(steady.medium).replace(' ', '')}",
              f"L={fmt(steady.L)} dx={fmt(steady.dx)} center={fmt(steady.center)}",
              f"tol={fmt(steady.tol)} residual={fmt(steady.residual_norm)}"]
    return _write(path, header, ("x", "u_star"), zip(steady.x, steady.values))


def write_speed_series(path, traj: Trajectory) -> str:
    return _write(path, [], ("t", "h", "hprime"), zip(traj.t, traj.h, traj.hp))


def write_profile(path, profile) -> str:
    path = os.fspath(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tau, row in zip(profile.tau, profile.v):
            fh.write(f"# tau={fmt(tau)}\nxi,v\n")
            for x, v in zip(profile.xi, row):
                fh.write(f"{fmt(x)},{fmt(v)}\n")
    return path


def read_profile(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(xi, tau, v)`` from a block-structured profile file."""
    taus, blocks, xi = [], [], None
    cur = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# tau="):
                taus.append(float(line[6:]))
                cur = []
                blocks.append(cur)
            elif line and line != "xi,v":
                a, b = line.split(",")
                cur.append((float(a), float(b)))
    arr = np.array(blocks, dtype=float)
    xi = arr[0, :, 0] if arr.size else np.empty(0)
    return xi, np.array(taus), arr[:, :, 1] if arr.size else np.empty((0, 0))


def write_convergence(path, rows) -> str:
    return _write(path, [], ("ladder", "n", "h0", "sup_diff"), rows)


def write_rho(path, series) -> str:
    return _write(path, [f"tol={fmt(series.tol)}"], ("tau", "rho"), zip(series.tau, series.rho))


def write_speed_law(path, law) -> str:
    return _write(path, [], ("h", "f"), zip(law.h, law.f))


def write_almost_periods(path, ap) -> str:
    return _write(path, [f"eps={fmt(ap.eps)}"], ("T", "sup_diff"), zip(ap.shifts, ap.sup_diff))


def write_bounds(path, rows) -> str:
    """Rows of ``(label, m, M)``."""
    return _write(path, [], ("medium", "m", "M", "ratio"),
                  ((lab, m, M, M / m if m > 0 else float("inf")) for lab, m, M in rows))


def write_oracle_table(path, rows) -> str:
    return _write(path, [], ("mu", "c"), rows)


def write_oracle_profile(path, xi, q) -> str:
    return _write(path, [], ("xi", "q"), zip(xi, q))


def write_summary(path, items) -> str:
    """``key=value`` lines; booleans become PASS/FAIL."""
    path = os.fspath(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in items:
            if isinstance(value, (bool, np.bool_)):
                value = "PASS" if value else "FAIL"
            fh.write(f"{key}={fmt(value)}\n")
    return path


# snapshots ---------------------------------------------------------------

@dataclass
class Snapshot:
    t: float
    h: float
    step: int
    dx: float
    w: np.ndarray
    medium_spec: str

    def to_state(self, steady=None) -> FrontState:
        return FrontState(t=self.t, h=self.h, w=self.w.copy(), medium=parse_medium(self.medium_spec),
                          steady=steady, step=self.step)


def write_snapshot(path, state: FrontState, dx: float) -> str:
    n = len(state.w) - 1
    spec = format_medium(state.medium).replace(" ", "")
    header = [f"semiwave-snapshot version={SNAPSHOT_VERSION}",
              f"t={fmt(state.t)} h={fmt(state.h)} step={state.step} dx={fmt(dx)} n={n} medium={spec}"]
    xi = dx * (np.arange(n + 1) - n)
    path = _write(path, header, ("xi", "w"), zip(xi, state.w))
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write("# end\n")
    return path


def read_snapshot(path) -> Snapshot:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise SnapshotError(f"{path}: {exc}") from None
    if not lines or not lines[0].startswith(_SNAPSHOT_MAGIC):
        raise SnapshotError(f"{path}: not a snapshot file")
    version = lines[0][len(_SNAPSHOT_MAGIC):].strip()
    if version != f"version={SNAPSHOT_VERSION}":
        raise SnapshotError(f"{path}: unsupported snapshot {version!r}, expected version={SNAPSHOT_VERSION}")
    if len(lines) < 3 or not lines[1].startswith("# "):
        raise SnapshotError(f"{path}: truncated header")
    meta = dict(tok.split("=", 1) for tok in lines[1][2:].split(" ") if "=" in tok)
    if tuple(meta) != _SNAPSHOT_FIELDS:
        raise SnapshotError(f"{path}: header fields {tuple(meta)} do not match {_SNAPSHOT_FIELDS}")
    if lines[2] != "xi,w":
        raise SnapshotError(f"{path}: expected column line 'xi,w'")
    n = int(meta["n"])
    body = lines[3:3 + n + 1]
    tail = lines[3 + n + 1:]
    if len(body) != n + 1 or not tail or tail[0] != "# end":
        raise SnapshotError(f"{path}: truncated, expected {n + 1} rows and an end marker")
    try:
        w = np.array([float(r.split(",")[1]) for r in body])
    except (IndexError, ValueError) as exc:
        raise SnapshotError(f"{path}: bad row ({exc})") from None
    return Snapshot(t=float(meta["t"]), h=float(meta["h"]), step=int(meta["step"]),
                    dx=float(meta["dx"]), w=w, medium_spec=meta["medium"])
