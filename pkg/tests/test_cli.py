"""Tests for config validation, figure presets, sweeps, and emission."""

import csv
import io
import json

import pytest

from risfso import cli
from risfso.errors import ConfigError, DomainError


def write_config(tmp_path, text):
    path = tmp_path / "sweep.cfg"
    path.write_text(text)
    return str(path)


FAST_CONFIG = """
# minimal fast sweep
link.gamma_bar_db = 0:20:10
link.n_elements = 4
sweep.metrics = outage,ber
sweep.include_mc = false
"""


class TestValidateConfig:
    def test_empty_config_uses_defaults(self, tmp_path):
        spec = cli.validate_config(write_config(tmp_path, "\n"))
        assert spec.gamma_bar_db == tuple(float(v) for v in range(0, 42, 2))
        assert spec.metrics == ("outage", "ber", "capacity")
        assert spec.mc_samples == 100000 and spec.seed == 2024
        v = spec.variants[0]
        assert v.turbulence.alpha == 15.0 and v.turbulence.beta == 10.0
        assert v.pointing.sigma_theta == pytest.approx(1e-3)
        assert v.pointing.beam_width == pytest.approx(1.2)
        assert v.n_list == (128,)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        spec = cli.validate_config(
            write_config(tmp_path, "# comment\n\nlink.psi = 0.5  # inline\n")
        )
        assert spec.psi == 0.5

    def test_unit_violation_reports_line(self, tmp_path):
        path = write_config(tmp_path, "link.psi = 1.0\npointing.sigma_theta_mrad = -1\n")
        with pytest.raises(ConfigError) as exc:
            cli.validate_config(path)
        items = exc.value.items
        assert any("line 2" in it and "sigma_theta_mrad" in it and "unit violation" in it
                   for it in items)

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path, "pointing.sigma_theta_rad = 1\n")
        with pytest.raises(ConfigError) as exc:
            cli.validate_config(path)
        assert any("unknown key" in it for it in exc.value.items)

    def test_multiple_errors_all_reported(self, tmp_path):
        path = write_config(
            tmp_path,
            "pointing.beam_width_cm = 0\nlink.gamma_bar_db = 10:0:2\nsweep.metrics = nope\n",
        )
        with pytest.raises(ConfigError) as exc:
            cli.validate_config(path)
        assert len(exc.value.items) >= 3

    def test_grid_must_increase(self, tmp_path):
        path = write_config(tmp_path, "link.gamma_bar_db = 0,10,10\n")
        with pytest.raises(ConfigError) as exc:
            cli.validate_config(path)
        assert any("strictly increasing" in it for it in exc.value.items)

    def test_mc_sample_floor_only_when_mc_enabled(self, tmp_path):
        bad = write_config(tmp_path, "mc.samples = 10\n")
        with pytest.raises(ConfigError):
            cli.validate_config(bad)
        ok = write_config(tmp_path, "mc.samples = 10\nsweep.include_mc = false\n")
        assert cli.validate_config(ok).mc_samples == 10

    def test_exponent_override(self, tmp_path):
        path = write_config(tmp_path, "pointing.exponent_c = 0.5\n")
        spec = cli.validate_config(path)
        assert spec.variants[0].pointing.c == pytest.approx(0.5, rel=1e-12)


class TestFigurePresets:
    def test_capacity_preset_element_counts(self):
        spec = cli.figure_preset("fig2")
        assert spec.metrics == ("capacity",)
        assert spec.variants[0].n_list == (1, 16, 64, 128, 256)
        direct = spec.variants[1]
        assert direct.label == "direct"
        assert direct.pointing.distance_l1 == 0.0
        assert direct.pointing.sigma_beta == 0.0

    def test_outage_geometry_preset(self):
        spec = cli.figure_preset("fig3")
        labels = [v.label for v in spec.variants]
        assert labels == ["wz120_a10", "wz80_a10", "wz120_a20"]
        assert all(v.n_list == (128,) for v in spec.variants)

    def test_asymptotic_preset_parameters(self):
        spec = cli.figure_preset("fig4")
        v = spec.variants[0]
        assert v.turbulence.alpha == 6.5 and v.turbulence.beta == 6.0
        assert v.pointing.c == pytest.approx(0.5, rel=1e-12)
        assert v.n_list == (1, 2, 4)
        assert spec.include_asymptotic
        assert spec.gamma_bar_db[-1] == 80.0

    def test_ber_preset_variants(self):
        spec = cli.figure_preset("fig5")
        assert spec.metrics == ("ber",)
        labels = [v.label for v in spec.variants]
        assert labels == ["a15_b10_s1", "a15_b10_s2", "a6.5_b6_s1"]
        assert all(v.pointing.distance_l1 == 350.0 for v in spec.variants)

    def test_unknown_preset(self):
        with pytest.raises(DomainError):
            cli.figure_preset("fig9")


@pytest.fixture(scope="module")
def table(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "sweep.cfg"
    path.write_text(FAST_CONFIG)
    return cli.run_sweep(cli.validate_config(str(path)))


class TestRunSweepAndEmit:

    def test_row_grid(self, table):
        # 3 SNR points x 1 N x 2 metrics.
        assert len(table.rows) == 6
        assert {r.metric for r in table.rows} == {"outage", "ber"}

    def test_csv_header_contract(self, table):
        payload = cli.emit(table, "csv")
        header = payload.splitlines()[0]
        assert header == ",".join(cli.CSV_COLUMNS)
        parsed = list(csv.reader(io.StringIO(payload)))
        assert all(len(row) == len(cli.CSV_COLUMNS) for row in parsed)

    def test_csv_roundtrips_floats_exactly(self, table):
        payload = cli.emit(table, "csv")
        rows = list(csv.DictReader(io.StringIO(payload)))
        for parsed, row in zip(rows, table.rows):
            assert float(parsed["analytic"]) == row.analytic
            assert parsed["mc_mean"] == ""  # MC disabled

    def test_json_roundtrip(self, table):
        payload = cli.emit(table, "json")
        doc = json.loads(payload)
        assert doc["config"]["metrics"] == ["outage", "ber"]
        assert len(doc["rows"]) == len(table.rows)
        assert doc["rows"][0]["clamp_events"] == 0

    def test_unknown_format_rejected(self, table):
        with pytest.raises(DomainError):
            cli.emit(table, "xml")

    def test_variant_label_in_metric_column(self):
        spec = cli.figure_preset("fig5", mc_samples=1000)
        spec = cli.SweepSpec(
            gamma_bar_db=(0.0,),
            metrics=spec.metrics,
            variants=spec.variants,
            include_mc=False,
        )
        table = cli.run_sweep(spec)
        assert {r.metric for r in table.rows} == {
            "ber@a15_b10_s1", "ber@a15_b10_s2", "ber@a6.5_b6_s1"
        }


class TestMainEntry:
    def test_validate_ok_prints_resolved_spec(self, tmp_path, capsys):
        path = write_config(tmp_path, FAST_CONFIG)
        assert cli.main(["validate", "--config", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["metrics"] == ["outage", "ber"]

    def test_validate_bad_config_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, "pointing.beam_width_cm = -5\n")
        assert cli.main(["validate", "--config", path]) == 2
        err = capsys.readouterr().err
        assert err.startswith("error: ")
        assert "beam_width_cm" in err

    def test_sweep_stdout_csv(self, tmp_path, capsys):
        path = write_config(tmp_path, FAST_CONFIG)
        assert cli.main(["sweep", "--config", path]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == ",".join(cli.CSV_COLUMNS)

    def test_sweep_deterministic_across_runs(self, tmp_path, capsys):
        cfg = FAST_CONFIG.replace("include_mc = false", "include_mc = true")
        cfg += "mc.samples = 2000\n"
        path = write_config(tmp_path, cfg)
        outputs = []
        for _ in range(2):
            assert cli.main(["sweep", "--config", path, "--seed", "99"]) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]

    def test_sweep_workers_invisible_in_output(self, tmp_path, capsys):
        cfg = FAST_CONFIG.replace("include_mc = false", "include_mc = true")
        cfg += "mc.samples = 2000\n"
        path = write_config(tmp_path, cfg)
        outputs = []
        for w in ("1", "8"):
            assert cli.main(["sweep", "--config", path, "--workers", w]) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]

    def test_sweep_writes_file(self, tmp_path, capsys):
        path = write_config(tmp_path, FAST_CONFIG)
        out_path = tmp_path / "rows.csv"
        assert cli.main(["sweep", "--config", path, "--out", str(out_path)]) == 0
        assert out_path.read_text().splitlines()[0] == ",".join(cli.CSV_COLUMNS)
        assert "wrote" in capsys.readouterr().out

    def test_figure_preset_runs(self, capsys):
        assert cli.main(
            ["figure", "fig4", "--mc-samples", "1000", "--format", "json"]
        ) == 0
        doc = json.loads(capsys.readouterr().out)
        # Asymptote column filled for the outage sweep.
        filled = [r for r in doc["rows"] if r["asymptotic"] is not None]
        assert filled and all(r["metric"] == "outage" for r in filled)
