"""Sweep driver, config parsing, CSV emission, presets, and CLI."""

import io
import math
import subprocess
import sys

import numpy as np
import pytest

from trijc.cli import main
from trijc.lab import (
    ConfigError,
    SweepError,
    SweepSpec,
    classical_spec,
    emit_csv,
    emit_plot_script,
    fig2_spec,
    fig3_spec,
    parse_config,
    qcorr_spec,
    run_sweep,
)
from trijc.states import INV_SQRT2, JCConfig


def tiny_spec(**kw):
    defaults = dict(
        base=JCConfig(alpha=0.0, gamma=0.0),
        gt_steps=3,
        gt_end=1.5,
        outputs=("neg_bc", "b_coherence"),
    )
    defaults.update(kw)
    return SweepSpec(**defaults)


class TestSweepSpec:
    def test_validation_steps(self):
        with pytest.raises(ConfigError, match="gt_steps"):
            SweepSpec(gt_steps=1)

    def test_validation_grid_order(self):
        with pytest.raises(ConfigError, match="gt_start"):
            SweepSpec(gt_start=2.0, gt_end=1.0)

    def test_validation_varied_name(self):
        with pytest.raises(ConfigError, match="cannot vary"):
            SweepSpec(varied=(("fock_dim", (3.0, 4.0)),))

    def test_validation_varied_lengths(self):
        with pytest.raises(ConfigError, match="equal lengths"):
            SweepSpec(varied=(("alpha", (0.1, 0.2)), ("gamma", (0.5,))))

    def test_validation_outputs(self):
        with pytest.raises(ConfigError, match="unknown output"):
            SweepSpec(outputs=("nope",))

    def test_settings_zip_semantics(self):
        spec = SweepSpec(varied=(("alpha", (0.9, 0.8)), ("gamma", (0.7, 0.6))))
        settings = spec.settings()
        assert [(s.alpha, s.gamma) for s in settings] == [(0.9, 0.7), (0.8, 0.6)]


class TestRunSweep:
    def test_row_order_and_initial_zeros(self):
        spec = tiny_spec(outputs=("gme_abc", "neg_bc", "neg_ac"))
        result = run_sweep(spec)
        assert result.columns[:6] == (
            "setting_id",
            "alpha",
            "gamma",
            "beta",
            "kappa",
            "gt",
        )
        first = dict(zip(result.columns, result.rows[0]))
        assert first["gt"] == 0.0
        assert first["gme_abc"] == 0.0
        assert first["neg_bc"] == 0.0
        assert first["neg_ac"] == 0.0
        gts = result.column("gt")
        assert np.all(np.diff(gts) > 0)

    def test_values_independent_of_row_order(self):
        # evaluating a later grid point directly matches the sweep row
        spec = tiny_spec()
        result = run_sweep(spec)
        from trijc.lab import _evaluate_row

        direct = _evaluate_row(spec.base, float(result.column("gt")[2]), spec.outputs)
        np.testing.assert_allclose(result.rows[2][6:], direct, atol=0)

    def test_multi_setting_rows(self):
        spec = tiny_spec(varied=(("alpha", (0.0, 0.5)),), outputs=("neg_ab",))
        result = run_sweep(spec)
        ids = result.column("setting_id")
        assert list(ids) == [0, 0, 0, 1, 1, 1]
        assert result.setting_rows(1).column("alpha")[0] == 0.5


class TestEmitCsv:
    def test_single_row_two_lines(self):
        spec = tiny_spec(gt_steps=2)
        result = run_sweep(spec)
        buf = io.StringIO()
        emit_csv(
            type(result)(result.spec, result.columns, result.rows[:1]), buf
        )
        lines = buf.getvalue().splitlines()
        assert len(lines) == 2

    def test_round_trip_12_digits(self):
        result = run_sweep(tiny_spec())
        buf = io.StringIO()
        emit_csv(result, buf)
        lines = buf.getvalue().strip().splitlines()
        header = lines[0].split(",")
        assert header == list(result.columns)
        for line, row in zip(lines[1:], result.rows):
            parsed = [float(v) for v in line.split(",")]
            for got, want in zip(parsed, row):
                assert got == pytest.approx(want, rel=1e-11, abs=1e-300)

    def test_byte_identical_reruns(self):
        spec = tiny_spec()
        out1, out2 = io.StringIO(), io.StringIO()
        n1 = emit_csv(run_sweep(spec), out1)
        n2 = emit_csv(run_sweep(spec), out2)
        assert out1.getvalue() == out2.getvalue()
        assert n1 == n2 == len(out1.getvalue().encode())

    def test_empty_table_rejected(self):
        result = run_sweep(tiny_spec(gt_steps=2))
        empty = type(result)(result.spec, result.columns, ())
        with pytest.raises(ValueError, match="empty"):
            emit_csv(empty, io.StringIO())

    def test_file_destination(self, tmp_path):
        path = tmp_path / "out.csv"
        count = emit_csv(run_sweep(tiny_spec(gt_steps=2)), str(path))
        assert path.stat().st_size == count


class TestParseConfig:
    def test_empty_document_defaults(self):
        spec = parse_config("")
        assert spec.base == JCConfig()
        assert spec.gt_steps == 200
        assert spec.gt_end == pytest.approx(2 * math.pi)
        assert spec.outputs == ("gme_abc",)

    def test_full_document(self):
        text = """
        # sweep configuration
        alpha = 0.9   # inline comment
        gamma = 0.8
        beta = 0.5
        kappa = 0.25
        fock_dim = 4
        gt_start = 0.5
        gt_end = 3.0
        gt_steps = 7
        vary = alpha: 0.9, 0.8
        vary = gamma: 0.7, 0.6
        outputs = neg_bc, crit14
        """
        spec = parse_config(text)
        assert spec.base.beta == 0.5
        assert spec.base.fock_dim == 4
        assert spec.gt_steps == 7
        assert spec.varied == (("alpha", (0.9, 0.8)), ("gamma", (0.7, 0.6)))
        assert spec.outputs == ("neg_bc", "crit14")

    def test_grid_arithmetic(self):
        spec = parse_config("gt_steps = 200\ngt_end = 6.283185\n")
        grid = spec.gt_grid()
        assert len(grid) == 200
        assert grid[0] == 0.0
        assert grid[-1] == pytest.approx(6.283185)

    def test_unknown_key_with_line_number(self):
        with pytest.raises(ConfigError, match="line 2: unknown key 'frobnicate'"):
            parse_config("alpha = 0.5\nfrobnicate = 1\n")

    def test_malformed_value_with_line_number(self):
        with pytest.raises(ConfigError, match="line 1: cannot parse"):
            parse_config("alpha = banana\n")

    def test_range_violation_names_key(self):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config("alpha = 2.0\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("alpha = 0.5\nalpha = 0.6\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="expected key = value"):
            parse_config("alpha 0.5\n")


class TestPresets:
    def test_fig2_curves(self):
        spec = fig2_spec()
        assert [s.alpha for s in spec.settings()] == [0.95, 0.92, 0.90]
        assert [s.gamma for s in spec.settings()] == [0.95, 0.92, 0.90]
        assert spec.outputs == ("gme_abc",)
        assert spec.gt_steps == 200

    def test_fig2_override_collapses_vary(self):
        spec = fig2_spec(alpha=0.8, gt_steps=10)
        assert len(spec.settings()) == 1
        assert spec.settings()[0].alpha == 0.8
        assert spec.gt_steps == 10

    def test_fig3_outputs(self):
        assert fig3_spec().outputs == ("neg_bc", "neg_ac", "neg_ab")

    def test_classical_base(self):
        spec = classical_spec()
        assert spec.base.alpha == 0.0
        assert spec.base.gamma == 0.0
        assert "elements" in spec.outputs
        assert "b_coherence" in spec.outputs

    def test_qcorr_base(self):
        spec = qcorr_spec()
        assert spec.base.alpha == 0.3
        assert spec.base.gamma == 0.3
        assert "gme_abc" in spec.outputs


class TestCli:
    def test_classical_to_file(self, tmp_path):
        out = tmp_path / "c.csv"
        code = main(["classical", "--gt-steps", "3", "--gt-end", "1.0", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("setting_id,alpha,gamma")

    def test_sweep_from_config(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("gt_steps = 2\ngt_end = 0.5\noutputs = neg_bc\nalpha = 0\ngamma = 0\n")
        out = tmp_path / "s.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        assert out.exists()

    def test_validation_error_exit_code(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("alpha = 2.0\n")
        assert main(["sweep", "--config", str(cfg), "--out", "-"]) == 1

    def test_missing_config_file_exit_code(self):
        assert main(["sweep", "--config", "/nonexistent.cfg"]) == 1

    def test_numerical_error_exit_code(self, monkeypatch, tmp_path):
        from trijc import cli
        from trijc.sdp import SdpConvergenceError, SdpSolution

        def boom(spec):
            raise SweepError("setting 0 gt=0: solver died") from SdpConvergenceError(
                "no convergence",
                SdpSolution({}, 0.0, 1.0, {}, 0, "stalled"),
            )

        monkeypatch.setattr(cli, "run_sweep", boom)
        assert cli.main(["classical", "--gt-steps", "3", "--out", "-"]) == 2

    def test_plot_script_requires_file_out(self):
        assert main(["classical", "--plot-script", "p.py", "--out", "-"]) == 1

    def test_plot_script_written(self, tmp_path):
        out = tmp_path / "c.csv"
        script = tmp_path / "plot.py"
        code = main(
            [
                "classical",
                "--gt-steps",
                "2",
                "--gt-end",
                "0.5",
                "--out",
                str(out),
                "--plot-script",
                str(script),
            ]
        )
        assert code == 0
        text = script.read_text()
        assert str(out) in text
        assert "matplotlib" in text

    def test_console_entry_point(self, tmp_path):
        out = tmp_path / "e.csv"
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "trijc.cli",
                "classical",
                "--gt-steps",
                "2",
                "--gt-end",
                "0.4",
                "--out",
                str(out),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert out.exists()


class TestSweepErrors:
    def test_failing_row_identified(self, monkeypatch):
        import trijc.lab as lab

        calls = {"n": 0}
        real = lab._evaluate_row

        def flaky(cfg, gt, outputs):
            calls["n"] += 1
            if calls["n"] == 3:
                raise RuntimeError("synthetic failure")
            return real(cfg, gt, outputs)

        monkeypatch.setattr(lab, "_evaluate_row", flaky)
        with pytest.raises(SweepError, match=r"setting 0 .*gt=1\.5"):
            run_sweep(tiny_spec(gt_steps=3, gt_end=1.5, outputs=("neg_bc",)))
