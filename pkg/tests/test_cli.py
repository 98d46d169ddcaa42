import os

import pytest

from ccmsim import meshgen
from ccmsim.cli import main
from ccmsim.mesh import save_mesh

CONFIG = """
[material.solid]
rho = 1.0
cp = 1.0
kappa = 1e-3
T_s = 0.0

[material.liquid]
rho = 1.0
cp = 1.0
kappa = 1.0
mu = 1e-3

[melting]
h_m = 1.0
T_m = 0.5

[source]
mode = temperature
coupling = equilibrium
T_w = 1.0
F_ex = 1.0
R = 1.0
tip_tags = left

[time]
dt = 0.02
n_steps = 3

[mesh]
path = m.mesh
farfield_tags = right

[output]
directory = {out}
"""


def make_config(tmp_path, extra=""):
    save_mesh(meshgen.make_unit_square(5), tmp_path / "m.mesh")
    path = tmp_path / "case.ini"
    path.write_text(CONFIG.format(out=tmp_path / "out") + extra)
    return str(path)


def test_no_command_prints_usage(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_run_command(tmp_path, capsys):
    assert main(["run", "--config", make_config(tmp_path)]) == 0
    assert "run complete" in capsys.readouterr().out
    assert (tmp_path / "out" / "run.csv").exists()


def test_run_output_dir_override(tmp_path):
    other = tmp_path / "other"
    assert main(["run", "--config", make_config(tmp_path),
                 "--out", str(other)]) == 0
    assert (other / "run.csv").exists()
    assert not (tmp_path / "out").exists()


def test_run_missing_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_numerical_failure_exits_3(tmp_path, capsys):
    cfg = make_config(tmp_path, "\n[numerics]\nsolver_tol = 1e-30\n")
    assert main(["run", "--config", cfg]) == 3
    assert "numerical failure" in capsys.readouterr().err
    # the aborted state is dumped for post-mortem inspection
    assert (tmp_path / "out" / "abort_state.vtk").exists()


def test_verify_cbf(tmp_path, capsys):
    assert main(["verify", "cbf", "--h", "0.1", "--dt", "0.05",
                 "--steps", "3", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "wrote" in out
    lines = (tmp_path / "cbf_errors.csv").read_text().strip().splitlines()
    assert lines[0] == "h,dt,error,runtime"
    assert len(lines) == 4


def test_verify_meshupdate(tmp_path):
    assert main(["verify", "meshupdate", "--h", "0.2",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "meshupdate_errors.csv").read_text().strip().splitlines()
    assert lines[0] == "h,dt,error,runtime"
    assert len(lines) == 2


def test_sweep_temperature(tmp_path, capsys):
    cfg = make_config(tmp_path)
    assert main(["sweep", "--config", cfg, "--key", "source.T_w",
                 "--values", "0.9, 1.1", "--out", str(tmp_path / "sw")]) == 0
    out = capsys.readouterr().out
    assert "point 0" in out and "point 1" in out
    for k in (0, 1):
        assert (tmp_path / "sw" / f"point_{k}" / "run.csv").exists()
    # hotter source melts faster: compare the two mean velocities
    vels = [float(line.rsplit(" ", 2)[-2]) for line in out.strip().splitlines()]
    assert vels[1] > vels[0]


def test_sweep_unsupported_key(tmp_path, capsys):
    cfg = make_config(tmp_path)
    assert main(["sweep", "--config", cfg, "--key", "melting.h_m",
                 "--values", "1", "--out", str(tmp_path / "sw")]) == 2
    assert "unsupported sweep key" in capsys.readouterr().err


def test_sweep_power_key_needs_power_mode(tmp_path, capsys):
    cfg = make_config(tmp_path)
    assert main(["sweep", "--config", cfg, "--key", "source.q_h",
                 "--values", "100", "--out", str(tmp_path / "sw")]) == 2
    assert "mode = power" in capsys.readouterr().err


def test_sweep_rejects_bad_values(tmp_path):
    cfg = make_config(tmp_path)
    assert main(["sweep", "--config", cfg, "--key", "source.T_w",
                 "--values", "1,apple", "--out", str(tmp_path / "sw")]) == 2
    assert main(["sweep", "--config", cfg, "--key", "source.T_w",
                 "--values", " , ", "--out", str(tmp_path / "sw")]) == 2


def test_bogus_log_level_is_a_usage_error(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CCMSIM_LOG", "chatty")
    assert main(["run", "--config", make_config(tmp_path)]) == 2
    assert "CCMSIM_LOG" in capsys.readouterr().err


def test_debug_log_level_accepted(tmp_path, monkeypatch):
    monkeypatch.setenv("CCMSIM_LOG", "DEBUG")
    assert main(["run", "--config", make_config(tmp_path)]) == 0
