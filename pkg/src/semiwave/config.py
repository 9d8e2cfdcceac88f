"""Experiment configuration: INI-style ``key = value`` files with sections."""
from __future__ import annotations

import configparser
import io
import re
from dataclasses import dataclass, fields, replace

from .freeboundary import SolverConfig
from .media import MediumError, QuasiPeriodicMedium, format_medium, parse_medium


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    medium: QuasiPeriodicMedium
    solver: SolverConfig
    # initial cutoff datum
    h0: float = -40.0
    n: float = 8.0
    steady_tol: float = 1e-10
    # semi-wave ladder
    n_list: tuple[int, ...] = (1, 2, 4, 8)
    h0_list: tuple[float, ...] = (-40.0,)
    tau_start: float = 20.0
    tau_length: float = 50.0
    tau_step: float = 0.5
    shift_search: int = 0
    # tau range for comparing the n-ladder; the main window when unset
    ladder_window: tuple[float, ...] | None = None
    # diagnostics
    rho_scale: float = 0.8
    rho_tol: float = 1e-3
    ap_eps: float = 0.05
    ap_max_shift: float = 95.0
    ap_step: float = 0.05
    ap_max_gap: float = 40.0
    avg_start: float = -10.0
    avg_lengths: tuple[float, ...] = (100.0, 200.0, 400.0)
    # oracle
    oracle_a0: float | None = None
    oracle_mu: tuple[float, ...] = (1.0,)
    out: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("initial.n must be >= 1")
        if any(k < 1 for k in self.n_list):
            raise ConfigError("semiwave.n_list entries must be >= 1")
        if not self.n_list or not self.h0_list:
            raise ConfigError("semiwave.n_list and semiwave.h0_list must be non-empty")
        if self.ladder_window is not None and (len(self.ladder_window) != 2
                                               or self.ladder_window[1] <= self.ladder_window[0]):
            raise ConfigError("semiwave.ladder_window must be two increasing numbers")
        if self.tau_length <= 0 or self.tau_step <= 0:
            raise ConfigError("semiwave.tau_length and semiwave.tau_step must be positive")
        if not 0 < self.rho_scale <= 1:
            raise ConfigError("diagnostics.rho_scale must lie in (0, 1]")
        if self.ap_eps <= 0 or self.ap_step <= 0 or self.ap_max_shift <= 0:
            raise ConfigError("almost-period settings must be positive")
        if any(x <= 0 for x in self.avg_lengths):
            raise ConfigError("diagnostics.avg_lengths must be positive")
        if any(m <= 0 for m in self.oracle_mu):
            raise ConfigError("oracle.mu must be positive")

    @property
    def a0(self) -> float:
        """Homogeneous rate for the oracle; the medium's lower bound unless set."""
        if self.oracle_a0 is not None:
            return self.oracle_a0
        from .media import bounds
        return bounds(self.medium)[0]

    @property
    def tau_window(self) -> tuple[float, float]:
        return self.tau_start, self.tau_start + self.tau_length


def _fmt(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, tuple):
        return ", ".join(_fmt(v) for v in x)
    return str(x)


# section -> [(key, attribute)]; "solver.<field>" attributes live on SolverConfig
_SOLVER_REQUIRED = {"dx", "dt", "L", "mu"}
_LAYOUT = [
    ("solver", [(f.name, "solver." + f.name) for f in fields(SolverConfig)]),
    ("initial", [("h0", "h0"), ("n", "n")]),
    ("steady", [("tol", "steady_tol")]),
    ("semiwave", [("n_list", "n_list"), ("h0_list", "h0_list"), ("tau_start", "tau_start"),
                  ("tau_length", "tau_length"), ("tau_step", "tau_step"),
                  ("shift_search", "shift_search"), ("ladder_window", "ladder_window")]),
    ("diagnostics", [("rho_scale", "rho_scale"), ("rho_tol", "rho_tol"), ("ap_eps", "ap_eps"),
                     ("ap_max_shift", "ap_max_shift"), ("ap_step", "ap_step"),
                     ("ap_max_gap", "ap_max_gap"), ("avg_start", "avg_start"),
                     ("avg_lengths", "avg_lengths")]),
    ("oracle", [("a0", "oracle_a0"), ("mu", "oracle_mu")]),
    ("output", [("dir", "out")]),
]

_KINDS = {
    "solver.dx": float, "solver.dt": float, "solver.L": float, "solver.mu": float,
    "solver.left_bc": str, "solver.flux_order": int, "solver.advection": str,
    "solver.transient_cutoff": float, "solver.stop_t": "optfloat", "solver.stop_h": "optfloat",
    "solver.snapshot_stride": int,
    "h0": float, "n": float, "steady_tol": float,
    "n_list": "ints", "h0_list": "floats", "tau_start": float, "tau_length": float,
    "tau_step": float, "shift_search": int, "ladder_window": "optfloats",
    "rho_scale": float, "rho_tol": float, "ap_eps": float, "ap_max_shift": float,
    "ap_step": float, "ap_max_gap": float, "avg_start": float, "avg_lengths": "floats",
    "oracle_a0": "optfloat", "oracle_mu": "floats", "out": "optstr",
}


def _convert(kind, text: str):
    text = text.strip()
    if kind == "optfloat":
        return None if text.lower() == "none" else float(text)
    if kind == "optstr":
        return None if text.lower() == "none" else text
    if kind == "ints":
        return tuple(int(v) for v in text.split(",") if v.strip())
    if kind == "optfloats":
        return None if text.lower() == "none" else _convert("floats", text)
    if kind == "floats":
        return tuple(float(v) for v in text.split(",") if v.strip())
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return text


def _line_numbers(text: str) -> dict[tuple[str, str], int]:
    """Line of every ``key = value`` entry, keyed by (section, key)."""
    out = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]$", s)
        if m:
            section = m.group(1).strip()
        elif section and s and s[0] not in "#;":
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            out[(section, key)] = i
    return out


def loads(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines = _line_numbers(text)

    def where(section, key):
        ln = lines.get((section, key))
        return f"{source}:{ln}" if ln else source

    if not parser.has_option("medium", "spec"):
        raise ConfigError(f"{source}: missing required key 'spec' in section [medium]")
    try:
        medium = parse_medium(parser.get("medium", "spec"))
    except MediumError as exc:
        raise ConfigError(f"{where('medium', 'spec')}: medium.spec: {exc}") from None

    known = {("medium", "spec")}
    solver_kw, top_kw = {}, {}
    for section, keys in _LAYOUT:
        for key, attr in keys:
            known.add((section, key))
            if not parser.has_option(section, key):
                if section == "solver" and key in _SOLVER_REQUIRED:
                    raise ConfigError(f"{source}: missing required key '{key}' in section [solver]")
                continue
            try:
                value = _convert(_KINDS[attr], parser.get(section, key))
            except ValueError as exc:
                raise ConfigError(f"{where(section, key)}: {section}.{key}: {exc}") from None
            if attr.startswith("solver."):
                solver_kw[attr[7:]] = value
            else:
                top_kw[attr] = value
    for section in parser.sections():
        for key in parser.options(section):
            if (section, key) not in known:
                raise ConfigError(f"{where(section, key)}: unknown key '{key}' in section [{section}]")
    try:
        solver = SolverConfig(**solver_kw)
    except ValueError as exc:
        raise ConfigError(f"{source}: [solver]: {exc}") from None
    return ExperimentConfig(medium=medium, solver=solver, **top_kw)


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), source=str(path))


def dumps(cfg: ExperimentConfig) -> str:
    buf = io.StringIO()
    buf.write("[medium]\n")
    buf.write(f"spec = {format_medium(cfg.medium)}\n")
    for section, keys in _LAYOUT:
        buf.write(f"\n[{section}]\n")
        for key, attr in keys:
            obj = cfg.solver if attr.startswith("solver.") else cfg
            value = getattr(obj, attr.split(".")[-1])
            if value is not None and (_KINDS[attr] in ("floats", "optfloats") or _KINDS[attr] is float):
                value = tuple(float(v) for v in value) if isinstance(value, tuple) else float(value)
            buf.write(f"{key} = {_fmt(value)}\n")
    return buf.getvalue()


def dump(cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(cfg))


def with_solver(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, solver=replace(cfg.solver, **changes))
