import os
from fractions import Fraction

import numpy as np
import pytest

from mimo_dense.harness.cli import main
from mimo_dense.harness.config import ExperimentConfig, as_fraction, load_config
from mimo_dense.harness.csvio import format_cell, read_rows, write_csv


class TestConfig:
    def test_defaults_per_experiment(self):
        fig2 = ExperimentConfig("fig2")
        assert fig2.delta_t_list == (Fraction(1, 4),)
        assert fig2.output_path == "fig2.csv"
        qpsk = ExperimentConfig("qpsk_sweep")
        assert qpsk.delta_t_list == (
            Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16),
        )
        assert ExperimentConfig("fig3").gamma_tilde_db_grid[0] == -10.0

    def test_path_count_default(self):
        cfg = ExperimentConfig("fig2", l_t=8, l_r=4)
        assert cfg.paths_for(8, 4) == 32

    def test_s_l_rules(self):
        assert ExperimentConfig("fig2").s_l_for(16) == 4
        assert ExperimentConfig("fig2", s_l_rule=3).s_l_for(16) == 3

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ExperimentConfig("nonsense")
        with pytest.raises(ValueError):
            ExperimentConfig("fig2", trials=0)
        with pytest.raises(ValueError):
            ExperimentConfig("fig2", gamma_tilde_db_grid=())
        with pytest.raises(ValueError):
            ExperimentConfig("fig2", l_t=8, l_r=4, p_paths=3)

    def test_as_fraction_forms(self):
        assert as_fraction("1/4") == Fraction(1, 4)
        assert as_fraction(0.25) == Fraction(1, 4)
        assert as_fraction([1, 8]) == Fraction(1, 8)

    def test_hash_ignores_output_and_threads(self):
        a = ExperimentConfig("fig2", output_path="x.csv", threads=1)
        b = ExperimentConfig("fig2", output_path="y.csv", threads=7)
        assert a.content_hash() == b.content_hash()
        c = ExperimentConfig("fig2", trials=7)
        assert c.content_hash() != a.content_hash()

    def test_toml_round_trip(self, tmp_path):
        toml = tmp_path / "run.toml"
        toml.write_text(
            'l_t = 4\nl_r = 2\ndelta_t_list = ["1/2", "1/4"]\n'
            "trials = 5\nmaster_seed = 99\ngamma_tilde_db_grid = [0.0, 10.0]\n"
        )
        cfg = load_config("fig3", toml_path=str(toml), trials=6)
        assert cfg.l_t == 4
        assert cfg.trials == 6  # override wins
        assert cfg.delta_t_list == (Fraction(1, 2), Fraction(1, 4))

    def test_toml_rejects_unknown_keys(self, tmp_path):
        toml = tmp_path / "run.toml"
        toml.write_text("bogus = 1\n")
        with pytest.raises(ValueError):
            load_config("fig2", toml_path=str(toml))


class TestCsvIo:
    def test_float_formatting(self):
        assert format_cell(1.0) == "1"
        assert format_cell(np.pi) == "3.14159265359"
        assert len(format_cell(1 / 3).replace("0.", "")) == 12
        assert format_cell(None) == ""
        assert format_cell(True) == "true"

    def test_write_and_read(self, tmp_path):
        path = tmp_path / "out.csv"
        write_csv(str(path), ["a", "b"], [(1, 2.5), (3, 1e-13)], "deadbeef", "9.9")
        raw = path.read_bytes()
        assert raw.startswith(b"# config_hash=deadbeef tool_version=9.9\r\n")
        header, rows = read_rows(str(path))
        assert header == ["a", "b"]
        assert rows[1]["b"] == "1e-13"

    def test_atomic_replace(self, tmp_path):
        path = tmp_path / "out.csv"
        write_csv(str(path), ["a"], [(1,)], "h", "v")
        write_csv(str(path), ["a"], [(2,)], "h", "v")
        _, rows = read_rows(str(path))
        assert rows[0]["a"] == "2"
        assert [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")] == []


def run_cli(args):
    return main([str(a) for a in args])


class TestCliRuns:
    def test_beam_pattern(self, tmp_path):
        out = tmp_path / "beam.csv"
        code = run_cli(["beam-pattern", "--out", out])
        assert code == 0
        header, rows = read_rows(str(out))
        assert header == ["delta_t", "k", "phi_rad", "magnitude"]
        assert (tmp_path / "beam.png").exists()
        mags = np.array([float(r["magnitude"]) for r in rows])
        assert np.all(mags <= 1 + 1e-12)

    def test_fig2_columns_and_gap(self, tmp_path):
        out = tmp_path / "fig2.csv"
        code = run_cli([
            "fig2", "--out", out, "--trials", 2, "--seed", 5, "--no-figure",
        ])
        assert code == 0
        header, rows = read_rows(str(out))
        assert "capacity_normalized" in header and "capacity_trunc_normalized" in header
        gaps = [float(r["gap_normalized"]) for r in rows]
        assert all(g >= 0 for g in gaps)

    def test_fig3_two_curves_per_point(self, tmp_path):
        out = tmp_path / "fig3.csv"
        assert run_cli(["fig3", "--out", out, "--trials", 2, "--seed", 5, "--no-figure"]) == 0
        _, rows = read_rows(str(out))
        means = [r for r in rows if r["row_kind"] == "mean" and r["gamma_tilde_db"] == "0"]
        assert {r["delta_t"] for r in means} == {"1/2", "1/4"}

    def test_qpsk_ratio_bounded(self, tmp_path):
        out = tmp_path / "q.csv"
        assert run_cli(["qpsk-sweep", "--out", out, "--trials", 2, "--seed", 3, "--no-figure"]) == 0
        _, rows = read_rows(str(out))
        trials = [r for r in rows if r["row_kind"] == "trial"]
        assert all(float(r["ratio"]) <= 1 + 1e-9 for r in trials)

    def test_qpsk_identity_precoder_statistic(self, tmp_path):
        out = tmp_path / "qi.csv"
        toml = tmp_path / "cfg.toml"
        toml.write_text('precoder = "identity"\ndelta_t_list = ["1/4"]\n'
                        "gamma_tilde_db_grid = [0.0]\n")
        assert run_cli([
            "qpsk-sweep", "--config", toml, "--out", out, "--trials", 2,
            "--seed", 3, "--no-figure",
        ]) == 0
        _, rows = read_rows(str(out))
        trials = [r for r in rows if r["row_kind"] == "trial"]
        assert all(float(r["assumption3_stat"]) == 2.0 for r in trials)

    def test_lemma_check_passes(self, tmp_path):
        out = tmp_path / "lemma.csv"
        toml = tmp_path / "cfg.toml"
        toml.write_text("lengths = [16, 32]\n")
        assert run_cli(["lemma-check", "--config", toml, "--out", out]) == 0
        _, rows = read_rows(str(out))
        assert all(r["passed"] == "true" for r in rows)
        i2_half = [
            r for r in rows if r["quantity"] == "sidelobe_overlap" and r["delta"] == "1/2"
        ]
        assert i2_half and all(float(r["grid_max"]) == 0.0 for r in i2_half)

    def test_theorem_sweep(self, tmp_path):
        out = tmp_path / "thm.csv"
        toml = tmp_path / "cfg.toml"
        toml.write_text("sizes = [[4, 2], [8, 4]]\ngamma_tilde_db_grid = [30.0]\n")
        assert run_cli([
            "theorem-sweep", "--config", toml, "--out", out, "--trials", 3,
            "--seed", 1, "--no-figure",
        ]) == 0
        _, rows = read_rows(str(out))
        means = {r["l_t"]: r for r in rows if r["row_kind"] == "mean"}
        assert set(means) == {"4", "8"}
        assert all(float(r["condition24_residual"]) > 0 for r in means.values())

    def test_invalid_config_exit_code(self, tmp_path):
        assert run_cli(["fig2", "--trials", 0, "--out", tmp_path / "x.csv"]) == 2

    def test_figure_rendering(self, tmp_path):
        out = tmp_path / "fig3.csv"
        toml = tmp_path / "cfg.toml"
        toml.write_text("gamma_tilde_db_grid = [0.0, 10.0]\n")
        assert run_cli(["fig3", "--config", toml, "--out", out, "--trials", 2, "--seed", 5]) == 0
        png = tmp_path / "fig3.png"
        assert png.exists() and png.stat().st_size > 1000


class TestDeterminism:
    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run_cli([
                "fig3", "--out", out, "--trials", 3, "--seed", 11, "--no-figure",
            ]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_invariance(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli([
            "qpsk-sweep", "--out", a, "--trials", 4, "--seed", 2, "--threads", 1,
            "--no-figure",
        ]) == 0
        assert run_cli([
            "qpsk-sweep", "--out", b, "--trials", 4, "--seed", 2, "--threads", 3,
            "--no-figure",
        ]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_env_var_thread_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MIMO_DENSE_THREADS", "2")
        a = tmp_path / "a.csv"
        assert run_cli(["fig3", "--out", a, "--trials", 2, "--seed", 1, "--no-figure"]) == 0
        b = tmp_path / "b.csv"
        monkeypatch.delenv("MIMO_DENSE_THREADS")
        assert run_cli(["fig3", "--out", b, "--trials", 2, "--seed", 1, "--no-figure"]) == 0
        assert a.read_bytes() == b.read_bytes()
