"""CLI contract: commands, config parsing, exit codes, determinism."""

import math

import numpy as np
import pytest

from diraclab.cli import main
from diraclab.config import ConfigError, RunConfig, parse_config_text


def test_config_parsing():
    values = parse_config_text(
        """
        # comment
        grid.n = 64
        grid.box_length = 4pi

        sweep.masses = 0.5, 0.25, 0.125
        output.svg = true
        """
    )
    cfg = RunConfig(values)
    assert cfg.get_int("grid.n") == 64
    assert cfg.get_float("grid.box_length") == pytest.approx(4 * math.pi)
    assert cfg.get_float_list("sweep.masses") == [0.5, 0.25, 0.125]
    assert cfg.get_bool("output.svg") is True


def test_config_errors():
    with pytest.raises(ConfigError, match=":2"):
        parse_config_text("a.b = 1\nnot a key value line\n")
    with pytest.raises(ConfigError, match="section.key"):
        parse_config_text("nodots = 3\n")
    cfg = RunConfig({"x.y": "abc"})
    with pytest.raises(ConfigError, match="x.y"):
        cfg.get_float("x.y")
    with pytest.raises(ConfigError, match="missing required config key 'absent.key'"):
        cfg.get_str("absent.key")


def test_verify_algebra_passes(tmp_path, capsys):
    code = main(["verify-algebra", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS algebra.anticommutation.d2" in out
    assert "PASS nonlinearity.fierz" in out
    assert (tmp_path / "verify-algebra.csv").exists()


def test_malformed_config_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("grid.dim = 2\nthis line is broken\n")
    code = main(["verify-algebra", "--config", str(bad), "--out", str(tmp_path)])
    assert code == 2
    assert "expected 'section.key = value'" in capsys.readouterr().err


def test_missing_grid_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text("grid.dim = 2\ngrid.box_length = 2pi\nproblem.horizon = 0.1\n")
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 2
    assert "grid.n" in capsys.readouterr().err


def test_simulate_small_run(tmp_path, capsys):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(
        "grid.dim = 2\n"
        "grid.n = 32\n"
        "grid.box_length = 2pi\n"
        "problem.horizon = 0.2\n"
        "problem.dt = 0.01\n"
        "problem.nonlinearity = soler\n"
        "simulate.propagator = mass:1\n"
        "output.snapshot = true\n"
    )
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS simulate.charge-drift" in out
    assert (tmp_path / "trajectory.csv").exists()
    assert (tmp_path / "final-state.csv").exists()


def test_limit_massless_linear_small(tmp_path, capsys):
    cfg = tmp_path / "lm.cfg"
    cfg.write_text(
        "grid.dim = 2\n"
        "grid.n = 64\n"
        "grid.box_length = 8pi\n"
        "problem.nonlinearity = none\n"
        "problem.horizon = 1.0\n"
        "sweep.masses = 0.5, 0.25, 0.125, 0.0625\n"
        "sweep.cutoff = 4\n"
        "output.svg = true\n"
    )
    code = main(["limit-massless", "--config", str(cfg), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS massless.linear-rate" in out
    assert (tmp_path / "limit-massless.csv").exists()
    assert (tmp_path / "limit-massless.svg").exists()


def test_limit_nonrel_linear_small(tmp_path, capsys):
    cfg = tmp_path / "ln.cfg"
    cfg.write_text(
        "grid.dim = 2\n"
        "grid.n = 64\n"
        "grid.box_length = 8pi\n"
        "problem.nonlinearity = none\n"
        "problem.horizon = 1.0\n"
        "sweep.speeds = 2, 4, 8\n"
        "sweep.cutoff = 4\n"
    )
    code = main(["limit-nonrel", "--config", str(cfg), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS nonrel.linear-rate" in out
    text = (tmp_path / "limit-nonrel.csv").read_text()
    assert "fit,slope:transfer_residual," in text


def test_determinism_byte_identical(tmp_path):
    cfg = tmp_path / "est.cfg"
    cfg.write_text(
        "grid.dim = 2\n"
        "estimates.n = 32\n"
        "estimates.box_length = 2pi\n"
        "estimates.draws = 4\n"
        "estimates.time_samples = 33\n"
        "estimates.lams = 1, 2, 4\n"
        "run.seed = 7\n"
    )
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    for out in (out1, out2):
        code = main(["verify-estimates", "--config", str(cfg), "--out", str(out)])
        assert code in (0, 1)  # determinism matters here, not the bands at toy scale
    for name in ("strichartz.csv", "bilinear-l2.csv", "whitney.csv", "bilinear-null-gain.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_solver_abort_exit_3(tmp_path, capsys):
    cfg = tmp_path / "boom.cfg"
    cfg.write_text(
        "grid.dim = 2\n"
        "grid.n = 32\n"
        "grid.box_length = 2pi\n"
        "problem.horizon = 1.0\n"
        "problem.dt = 0.1\n"
        "problem.amplitude = 500\n"
        "problem.nonlinearity = soler\n"
    )
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 3
    assert "solver abort" in capsys.readouterr().err
