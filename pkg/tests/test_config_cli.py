import json

import numpy as np
import pytest

from fk_thermo.cli import main, run_verify
from fk_thermo.config import ConfigError, parse_config

MINIMAL = """
[grid]
n = 256

[potential]
harmonics = [[1, 1, 0]]
"""


class TestParseConfig:
    def test_defaults_applied(self):
        cfg = parse_config(MINIMAL)
        assert cfg.n == 256
        assert cfg.dt == 1e-3
        assert cfg.seed == 42
        assert cfg.bins == 64
        assert cfg.potential_harmonics == ((1, 1.0, 0.0),)
        assert cfg.method == "pde"

    def test_empty_config_is_all_defaults(self):
        cfg = parse_config("")
        assert cfg.n == 512
        assert cfg.potential_harmonics == ()
        assert cfg.potential_constant == 0.0

    def test_comments_and_blank_lines(self):
        text = "# leading comment\n\n[grid]\nn = 128  # trailing comment\n"
        assert parse_config(text).n == 128

    def test_odd_n_rejected(self):
        with pytest.raises(ConfigError, match="even"):
            parse_config("[grid]\nn = 255\n")

    def test_duplicate_key_cites_second_line(self):
        text = "[grid]\nn = 128\nn = 256\n"
        with pytest.raises(ConfigError, match="line 3.*duplicate"):
            parse_config(text)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config("[nope]\nfoo = 1\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("[grid]\nm = 12\n")

    def test_entry_before_section_rejected(self):
        with pytest.raises(ConfigError, match="before any"):
            parse_config("n = 12\n")

    def test_malformed_line_cites_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("[grid]\nnonsense\n")

    def test_alias_validation(self):
        with pytest.raises(ConfigError, match="alias"):
            parse_config("[grid]\nn = 8\n[potential]\nharmonics = [[4, 1, 0]]\n")

    def test_overrides_win(self):
        cfg = parse_config(MINIMAL, overrides=["--grid.n=512", "--run.seed=7"])
        assert cfg.n == 512
        assert cfg.seed == 7

    def test_bad_override(self):
        with pytest.raises(ConfigError, match="override"):
            parse_config(MINIMAL, overrides=["--grid.n"])
        with pytest.raises(ConfigError, match="override"):
            parse_config(MINIMAL, overrides=["--nope.n=3"])

    def test_bad_types(self):
        with pytest.raises(ConfigError, match="integer"):
            parse_config("[grid]\nn = 12.5\n")
        with pytest.raises(ConfigError, match="number"):
            parse_config("[run]\ndt = fast\n")

    def test_init_and_drift_grammar(self):
        with pytest.raises(ConfigError, match="init"):
            parse_config("[run]\ninit = everywhere\n")
        with pytest.raises(ConfigError, match="drift"):
            parse_config("[run]\ndrift = strange\n")
        cfg = parse_config("[run]\ninit = point:0.125\ndrift = g-spec\n")
        assert cfg.init == "point:0.125"

    def test_bins_must_divide_n(self):
        with pytest.raises(ConfigError, match="bins"):
            parse_config("[grid]\nn = 256\n[run]\nbins = 100\n")


def write_cfg(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


class TestCliCommands:
    def test_eigen_outputs(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL)
        out = tmp_path / "out"
        code = main(["eigen", "--config", cfg, f"--run.out={out}"])
        assert code == 0
        report = json.loads((out / "eigen.json").read_text())
        assert list(report.keys()) == ["lambda", "gamma", "spectral_gap", "n",
                                       "critical_points_F"]
        assert report["n"] == 256
        assert report["gamma"] == pytest.approx(1.0, abs=1e-12)
        header = (out / "eigen.csv").read_text().splitlines()[0]
        assert header == "x,V,F,density_muV,drift"
        meta = json.loads((out / "meta.json").read_text())
        assert meta["command"] == "eigen"
        assert meta["config"]["grid"]["n"] == 256

    def test_outputs_byte_identical_across_runs(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL + "\n[run]\npaths = 500\n")
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["propagate", "--config", cfg, f"--run.out={out}",
                         "--run.method=mc"]) == 0
            outs.append((out / "propagate.json").read_bytes())
        assert outs[0] == outs[1]

    def test_propagate_pde_outputs(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL)
        out = tmp_path / "out"
        assert main(["propagate", "--config", cfg, f"--run.out={out}"]) == 0
        report = json.loads((out / "propagate.json").read_text())
        assert report["method"] == "pde"
        assert (out / "propagate.csv").exists()
        # default test function is the constant 1, so values hover around
        # exp(lambda t) which is > 1 for this potential
        assert report["value"] > 1.0

    def test_propagate_uses_g_section_as_initial_function(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL + "\n[g]\nconstant = 2.0\n")
        out = tmp_path / "out"
        assert main(["propagate", "--config", cfg, f"--run.out={out}"]) == 0
        report = json.loads((out / "propagate.json").read_text())
        assert report["value"] > 2.0

    def test_simulate_outputs(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL + "\n[run]\npaths = 2000\nT = 0.5\n")
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, f"--run.out={out}"]) == 0
        report = json.loads((out / "simulate.json").read_text())
        assert set(report) == {"tv_distance", "n_paths", "T", "dt"}
        assert report["tv_distance"] < 0.2
        lines = (out / "histogram.csv").read_text().splitlines()
        assert lines[0] == "bin_left,count,empirical_density,target_density"
        assert len(lines) == 65

    def test_simulate_save_paths(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL +
                        "\n[run]\npaths = 5\nT = 0.01\nsave_paths = 1\n")
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, f"--run.out={out}"]) == 0
        lines = (out / "paths.csv").read_text().splitlines()
        assert lines[0] == "path_id,step,x"
        assert len(lines) == 1 + 5 * 11  # 10 steps + initial position

    def test_entropy_command(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL + "\n[g]\nuse = doob\n")
        out = tmp_path / "out"
        assert main(["entropy", "--config", cfg, f"--run.out={out}"]) == 0
        report = json.loads((out / "entropy.json").read_text())
        assert list(report) == ["entropy", "mean_potential", "pressure", "gap",
                                "lambda"]
        # at n=256 the two-discretization offset is ~1.3e-6
        assert report["pressure"] == pytest.approx(report["lambda"], abs=5e-6)
        assert report["gap"] == pytest.approx(report["lambda"] - report["pressure"],
                                              abs=1e-12)

    def test_maximize_command(self, tmp_path):
        cfg = write_cfg(tmp_path,
                        "[grid]\nn = 64\n[run]\nK = 2\nlr = 0.1\niters = 5\n")
        out = tmp_path / "out"
        assert main(["maximize", "--config", cfg, f"--run.out={out}"]) == 0
        report = json.loads((out / "maximize.json").read_text())
        assert abs(report["pressure"]) < 1e-6
        lines = (out / "trace.csv").read_text().splitlines()
        assert lines[0] == "iter,value,grad_norm"

    def test_config_error_exit_code(self, tmp_path):
        cfg = write_cfg(tmp_path, "[grid]\nn = 255\n")
        assert main(["eigen", "--config", cfg]) == 2

    def test_missing_config_file_exit_code(self):
        assert main(["eigen", "--config", "/nonexistent/run.cfg"]) == 2


class TestVerify:
    def test_battery_passes(self, tmp_path):
        cfg = parse_config(MINIMAL + "\n[run]\npaths = 2000\n")
        code, checks = run_verify(cfg)
        assert code == 0
        assert {c["name"] for c in checks} == {
            "eigen_shift_lambda", "eigen_shift_vector", "selfadjoint_residual",
            "stochastic_unit", "gibbs_stationarity", "entropy_sign",
            "pressure_decomposition", "martingale_mean",
        }
        assert all(c["pass"] for c in checks)

    def test_fault_injection_fails_decomposition(self, tmp_path):
        cfg = parse_config(MINIMAL + "\n[run]\npaths = 2000\n")
        code, checks = run_verify(cfg, perturb_eigenvalue=1e-3)
        assert code == 1
        by_name = {c["name"]: c for c in checks}
        assert not by_name["pressure_decomposition"]["pass"]

    def test_cli_exit_codes(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL + "\n[run]\npaths = 1000\n")
        out = tmp_path / "out"
        assert main(["verify", "--config", cfg, f"--run.out={out}"]) == 0
        payload = json.loads((out / "verify.json").read_text())
        assert payload["exit_code"] == 0
        assert all(set(c) == {"name", "value", "tolerance", "pass"}
                   for c in payload["checks"])
        out2 = tmp_path / "out2"
        assert main(["verify", "--config", cfg, f"--run.out={out2}",
                     "--perturb-eigenvalue", "1e-3"]) == 1
