import json

import numpy as np
import pytest

from sndsim import cli
from sndsim.errors import ConfigError


@pytest.fixture()
def paper_config_path():
    return cli.bundled_config_path()


def write_config(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


class TestLoadConfig:
    def test_bundled_paper_config(self, paper_config_path):
        cfg = cli.load_config(paper_config_path)
        assert cfg.detector.n_elements == 12
        assert cfg.detector.r_parallel == pytest.approx(45.2)
        assert cfg.detector.i_bias == pytest.approx(13.0e-6)
        assert cfg.detector.i_critical == pytest.approx(13.4e-6)
        assert cfg.detector.r_load == pytest.approx(50.0)
        assert cfg.laser.wavelength == pytest.approx(1.31e-6)
        assert cfg.readout.gain_db == pytest.approx(51.0)
        assert cfg.efficiencies.n_elements == 12
        assert cfg.sweep_powers.max() == pytest.approx(64e-9)

    def test_invalid_bias_names_invariant(self, tmp_path):
        path = write_config(
            tmp_path, {"detector": {"i_bias_a": 14e-6, "i_critical_a": 13.4e-6}}
        )
        with pytest.raises(ConfigError) as err:
            cli.load_config(path)
        assert any("i_bias must be < i_critical" in v for v in err.value.violations)

    def test_all_violations_listed(self, tmp_path):
        path = write_config(
            tmp_path,
            {
                "detector": {"i_bias_a": 14e-6, "i_critical_a": 13.4e-6},
                "laser": {"rep_rate_hz": -1.0},
                "sweep": {"shots_per_power": 0},
            },
        )
        with pytest.raises(ConfigError) as err:
            cli.load_config(path)
        assert len(err.value.violations) >= 3

    def test_defaults_applied_to_empty_config(self, tmp_path):
        cfg = cli.load_config(write_config(tmp_path, {}))
        assert cfg.detector.n_elements == 12
        assert cfg.heights_profile.center == 1.0
        assert cfg.readout.sample_rate == 80e9
        assert cfg.shots_per_power == 20_000

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n "detector": {,}\n}')
        with pytest.raises(ConfigError) as err:
            cli.load_config(path)
        assert "line 2" in err.value.violations[0]

    def test_unknown_key_reported(self, tmp_path):
        path = write_config(tmp_path, {"detector": {"resistance_ohm": 5.0}})
        with pytest.raises(ConfigError) as err:
            cli.load_config(path)
        assert any("unknown key" in v for v in err.value.violations)

    def test_explicit_efficiencies(self, tmp_path):
        path = write_config(
            tmp_path,
            {
                "detector": {"n_elements": 2},
                "beam": {"n_elements": 2},
                "efficiencies": {"routing": [0.4, 0.4], "detection": [0.9, 0.1]},
            },
        )
        cfg = cli.load_config(path)
        assert np.allclose(cfg.efficiencies.per_element, [0.36, 0.04])

    def test_config_hash_stable(self, paper_config_path):
        a = cli.load_config(paper_config_path).config_hash()
        b = cli.load_config(paper_config_path).config_hash()
        assert a == b and len(a) == 64


class TestCommands:
    def test_stats_vacuum_table(self, tmp_path):
        out = tmp_path / "out"
        rc = cli.main(["stats", "--n", "12", "--eta", "0.5", "--mu", "0", "--out", str(out)])
        assert rc == 0
        lines = (out / "click_distribution.csv").read_text().splitlines()
        assert lines[0] == "n,probability"
        assert lines[1] == "0,1.0"
        assert all(line.endswith(",0.0") for line in lines[2:])

    def test_noise_curve_shape(self, tmp_path):
        out = tmp_path / "out"
        rc = cli.main(["noise", "--out", str(out)])
        assert rc == 0
        rows = (out / "excess_noise.csv").read_text().splitlines()[1:]
        fwhm = {int(r.split(",")[0]): float(r.split(",")[1]) for r in rows}
        assert fwhm[0] == 0.0 and fwhm[12] == 0.0
        assert max(fwhm, key=fwhm.get) == 6

    def test_iv_artifacts(self, tmp_path):
        out = tmp_path / "out"
        rc = cli.main(["iv", "--out", str(out), "--steps", "11", "--plot"])
        assert rc == 0
        assert (out / "iv.csv").exists()
        assert (out / "iv.svg").exists()
        assert json.loads((out / "manifest.json").read_text())["command"] == "iv"

    def test_sweep_deterministic_bytes(self, tmp_path):
        base = [
            "sweep", "--seed", "7", "--shots", "400",
            "--power-min", "0", "--power-max", "8e-9", "--power-steps", "3",
        ]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli.main(base + ["--out", str(out_a)]) == 0
        assert cli.main(base + ["--out", str(out_b)]) == 0
        assert (out_a / "sweep.csv").read_bytes() == (out_b / "sweep.csv").read_bytes()

    def test_analyze_consumes_sweep_output(self, tmp_path):
        sweep_out = tmp_path / "sweep"
        rc = cli.main(
            [
                "sweep", "--seed", "3", "--shots", "2000", "--out", str(sweep_out),
                "--power-min", "2e-9", "--power-max", "30e-9", "--power-steps", "4",
            ]
        )
        assert rc == 0
        an_out = tmp_path / "analysis"
        rc = cli.main(
            ["analyze", "--sweep", str(sweep_out / "sweep.csv"), "--out", str(an_out)]
        )
        assert rc == 0
        for name in ("peaks.csv", "probabilities.csv", "eta.csv", "vn.csv",
                     "linearity.csv", "dqe.csv", "report.txt"):
            assert (an_out / name).exists()
        probs = (an_out / "probabilities.csv").read_text().splitlines()[1:]
        assert probs and all(len(line.split(",")) == 3 for line in probs)

    def test_count_rate_artifacts(self, tmp_path):
        sweep_out = tmp_path / "sweep"
        cli.main(
            [
                "sweep", "--seed", "3", "--shots", "4000", "--out", str(sweep_out),
                "--power-min", "1e-9", "--power-max", "20e-9", "--power-steps", "4",
            ]
        )
        cr_out = tmp_path / "cr"
        rc = cli.main(
            ["count-rate", "--sweep", str(sweep_out / "sweep.csv"), "--out", str(cr_out)]
        )
        assert rc == 0
        assert (cr_out / "countrate.csv").exists()
        assert (cr_out / "slopes.csv").exists()

    def test_transient_trace(self, tmp_path):
        out = tmp_path / "out"
        rc = cli.main(
            ["transient", "--n", "12", "--out", str(out), "--t-end", "20e-9", "--stride", "50"]
        )
        assert rc == 0
        header = (out / "transient_n12.csv").read_text().splitlines()[0]
        assert header.startswith("time_s,i_wire_0")

    def test_manifest_records_seed_and_hash(self, tmp_path):
        out = tmp_path / "out"
        cli.main(
            [
                "sweep", "--seed", "9", "--shots", "200", "--out", str(out),
                "--power-min", "0", "--power-max", "4e-9", "--power-steps", "2",
            ]
        )
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 9
        assert len(manifest["config_hash"]) == 64
        assert manifest["command"] == "sweep"

    def test_invalid_config_exit_code(self, tmp_path):
        path = write_config(tmp_path, {"detector": {"i_bias_a": 2e-5}})
        rc = cli.main(["noise", "--config", str(path), "--out", str(tmp_path / "o")])
        assert rc == 1

    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 2
