from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiwave import io as sio
from semiwave.cli import main
from semiwave.config import ConfigError, ExperimentConfig, dumps, loads
from semiwave.freeboundary import FrontState, SolverConfig
from semiwave.media import QuasiPeriodicMedium, quasi_periodic_medium

ROOT = Path(__file__).resolve().parents[1]

SMALL = """\
[medium]
spec = base=1.5; mode=0.3,1.0,0.0; mode=0.2,sqrt2,0.0

[solver]
dx = 0.1
dt = 0.004
L = 20.0
mu = 1.0
transient_cutoff = 5.0
stop_t = 8.0
snapshot_stride = 250

[initial]
h0 = -10.0
n = 4
"""


@st.composite
def configs(draw):
    dx = draw(st.sampled_from([0.05, 0.1, 0.2]))
    solver = SolverConfig(dx=dx, dt=0.4 * dx * dx, L=dx * draw(st.integers(400, 800)),
                          mu=draw(st.floats(0.1, 10)), left_bc=draw(st.sampled_from(["pin", "zero-slope"])),
                          flux_order=draw(st.sampled_from([1, 2])),
                          stop_t=draw(st.none() | st.floats(1, 100)),
                          snapshot_stride=draw(st.integers(0, 1000)))
    medium = QuasiPeriodicMedium(draw(st.floats(1.0, 3.0)),
                                 tuple(draw(st.lists(st.tuples(st.floats(0, 0.3), st.floats(0.1, 3),
                                                               st.floats(-3, 3)), max_size=3))))
    return ExperimentConfig(medium=medium, solver=solver, h0=draw(st.floats(-100, 0)),
                            n_list=tuple(sorted(draw(st.sets(st.integers(1, 64), min_size=1)))),
                            oracle_mu=tuple(draw(st.lists(st.floats(0.1, 50), min_size=1, max_size=3))),
                            out=draw(st.none() | st.sampled_from(["out", "runs/a b"])))


@given(configs())
@settings(max_examples=50, deadline=None)
def test_config_round_trip(cfg):
    text = dumps(cfg)
    again = loads(text)
    assert again == cfg
    assert dumps(again) == text


def test_missing_key_is_named():
    text = SMALL.replace("mu = 1.0\n", "")
    with pytest.raises(ConfigError, match="'mu'"):
        loads(text)


def test_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match=r":6: solver.dt"):
        loads(SMALL.replace("dt = 0.004", "dt = fast"), source="cfg")
    with pytest.raises(ConfigError, match="unknown key 'colour'"):
        loads(SMALL + "colour = red\n")
    with pytest.raises(ConfigError, match="line"):
        loads("[medium]\nspec = base=1\nnot a key value line\n[")


def test_solver_constraints_revalidated():
    with pytest.raises(ConfigError, match="exceeds"):
        loads(SMALL.replace("dt = 0.004", "dt = 0.01"))


def _state():
    w = np.linspace(1.0, 0.0, 201) ** 1.3
    w[-1] = 0.0
    return FrontState(t=1.0 / 3.0, h=np.pi, w=w, medium=quasi_periodic_medium(), step=12345)


def test_snapshot_round_trip_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    sio.write_snapshot(a, _state(), 0.1)
    snap = sio.read_snapshot(a)
    assert snap.t == 1.0 / 3.0 and snap.h == np.pi and snap.step == 12345
    assert np.array_equal(snap.w, _state().w)
    sio.write_snapshot(b, snap.to_state(), snap.dx)
    assert a.read_bytes() == b.read_bytes()


def test_snapshot_errors(tmp_path):
    good = tmp_path / "s.csv"
    sio.write_snapshot(good, _state(), 0.1)
    lines = good.read_text().splitlines(keepends=True)
    cut = tmp_path / "cut.csv"
    cut.write_text("".join(lines[:120]))
    with pytest.raises(sio.SnapshotError, match="truncated"):
        sio.read_snapshot(cut)
    old = tmp_path / "old.csv"
    old.write_text("".join([lines[0].replace("version=1", "version=0")] + lines[1:]))
    with pytest.raises(sio.SnapshotError, match="version"):
        sio.read_snapshot(old)
    odd = tmp_path / "odd.csv"
    odd.write_text("".join([lines[0], lines[1].replace(" step=", " stage=")] + lines[2:]))
    with pytest.raises(sio.SnapshotError, match="fields"):
        sio.read_snapshot(odd)


def test_csv_formats(tmp_path):
    sio.write_convergence(tmp_path / "c.csv", [("n", 2, -40.0, 0.1)])
    assert (tmp_path / "c.csv").read_text() == "ladder,n,h0,sup_diff\nn,2,-40,0.10000000000000001\n"
    sio.write_oracle_table(tmp_path / "o.csv", [(1.0, 0.5)])
    meta, cols, body = sio.read_csv(tmp_path / "o.csv")
    assert cols == ["mu", "c"] and body.tolist() == [[1.0, 0.5]]


def _cli(tmp_path, *args, config=SMALL):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(config)
    return main([args[0], "--config", str(cfg), *args[1:]])


def test_cli_oracle(tmp_path):
    out = tmp_path / "o"
    assert _cli(tmp_path, "oracle", "--out", str(out)) == 0
    text = (out / "oracle.csv").read_text().splitlines()
    assert text[0] == "mu,c"
    # default oracle rate is the lower bound of the medium (1.0)
    assert float(text[1].split(",")[1]) == pytest.approx(0.36437072332817433, abs=1e-10)
    assert "oracle.residual.mu1=PASS" in (out / "summary_oracle.txt").read_text()


def test_cli_malformed_config(tmp_path, capsys):
    assert _cli(tmp_path, "steady", "--out", str(tmp_path), config=SMALL.replace("mu = 1.0\n", "")) == 2
    assert "'mu'" in capsys.readouterr().err


def test_cli_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SEMIWAVE_OUT", str(tmp_path / "env"))
    assert _cli(tmp_path, "steady") == 0
    assert (tmp_path / "env" / "steady.csv").exists()


def test_cli_deterministic(tmp_path):
    for d in ("a", "b"):
        assert _cli(tmp_path, "evolve", "--out", str(tmp_path / d)) == 0
    for name in ("speed.csv", "final.csv", "summary_evolve.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_resume_is_exact(tmp_path):
    full, part = tmp_path / "full", tmp_path / "part"
    assert _cli(tmp_path, "evolve", "--out", str(full)) == 0
    snap = full / "snapshots" / "step_0000001000.csv"
    assert _cli(tmp_path, "evolve", "--out", str(part), "--resume", str(snap)) == 0
    assert (full / "final.csv").read_bytes() == (part / "final.csv").read_bytes()
    for f in (part / "snapshots").iterdir():
        assert f.read_bytes() == (full / "snapshots" / f.name).read_bytes()


def test_cli_resume_rejects_other_medium(tmp_path):
    full = tmp_path / "full"
    assert _cli(tmp_path, "evolve", "--out", str(full)) == 0
    other = SMALL.replace("base=1.5", "base=1.6")
    rc = _cli(tmp_path, "evolve", "--out", str(tmp_path / "x"), "--resume",
              str(full / "snapshots" / "step_0000001000.csv"), config=other)
    assert rc == 2


def test_shipped_configs_parse():
    for path in sorted((ROOT / "configs").glob("*.ini")):
        cfg = loads(path.read_text(), source=str(path))
        assert cfg.solver.dx > 0
