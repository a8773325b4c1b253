"""Tests for the shellgsm command line."""
import json

import pytest
from click.testing import CliRunner

from shell_gsm import __version__
from shell_gsm.cli import EXIT_CONFIG, EXIT_NUMERIC, main
from shell_gsm.gsm import AntennaGSM, save_gsm


@pytest.fixture
def runner():
    return CliRunner()


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_init_writes_template(runner, tmp_path):
    target = tmp_path / "shell.toml"
    result = runner.invoke(main, ["init", str(target)])
    assert result.exit_code == 0
    assert "[[geometry.layers]]" in target.read_text()

    again = runner.invoke(main, ["init", str(target)])
    assert again.exit_code == 1
    forced = runner.invoke(main, ["init", str(target), "--force"])
    assert forced.exit_code == 0


def test_sparams(runner, scenario_file, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(main, ["sparams", "--config", str(scenario_file), "--out", str(out)])
    assert result.exit_code == 0, result.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_file"] == str(scenario_file)
    assert "sparams.csv" in manifest["outputs"]


def test_subcommand_overrides_task_kind(runner, scenario_file, tmp_path):
    result = runner.invoke(main, ["sso", "-c", str(scenario_file), "-o", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "sso.csv").exists()
    assert not (tmp_path / "sparams.csv").exists()


def test_config_error_exit_code(runner, scenario_text, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text(scenario_text.replace("ra_mm = 180.0", "ra_mm = 180.0\nshape = 'cube'"))
    result = runner.invoke(main, ["sparams", "-c", str(bad), "-o", str(tmp_path)])
    assert result.exit_code == EXIT_CONFIG
    assert "unknown key" in result.output


def test_missing_config_file(runner, tmp_path):
    result = runner.invoke(main, ["rcs", "-c", str(tmp_path / "nope.toml")])
    assert result.exit_code == EXIT_CONFIG


def test_numeric_error_exit_code(runner, scenario_text, tmp_path):
    path = tmp_path / "shell.toml"
    path.write_text(scenario_text.replace('gsm_file = "transparent"', 'gsm_file = "antenna.json"'))
    # interchange file at other frequencies than the scenario's
    save_gsm([AntennaGSM.random(4, 9e9)], tmp_path / "antenna.json")
    result = runner.invoke(main, ["sparams", "-c", str(path), "-o", str(tmp_path / "out")])
    assert result.exit_code == EXIT_NUMERIC


def test_requires_config(runner):
    result = runner.invoke(main, ["pattern"])
    assert result.exit_code == 2
    assert "--config" in result.output
