"""Tests for the command-line interface and its exit codes."""

import pytest

from petsr.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, PetSrCLI, exit_code_for
from petsr.core.errors import ConfigurationError, GeometryError, MetricError, NumericalFailure


@pytest.fixture
def cli():
    return PetSrCLI()


class TestExitCodes:
    @pytest.mark.parametrize(
        "exc, code",
        [
            (ConfigurationError("bad"), EXIT_CONFIG),
            (GeometryError("shape"), EXIT_CONFIG),
            (FileNotFoundError("gone"), EXIT_IO),
            (PermissionError("denied"), EXIT_IO),
            (NumericalFailure("nan"), EXIT_NUMERICAL),
            (MetricError("empty"), EXIT_NUMERICAL),
            (RuntimeError("boom"), 1),
        ],
    )
    def test_mapping(self, exc, code):
        assert exit_code_for(exc) == code


class TestCli:
    def test_no_command(self, cli):
        assert cli.run([]) == EXIT_CONFIG

    def test_unknown_setting_is_usage_error(self, cli, tiny_run_config_file):
        with pytest.raises(SystemExit) as info:
            cli.run(["degrade", "--config", str(tiny_run_config_file), "--setting", "ultra"])
        assert info.value.code == 2

    def test_missing_config_file(self, cli, tmp_path):
        assert cli.run(["phantom", "--config", str(tmp_path / "absent.cfg")]) == EXIT_IO

    def test_unknown_config_key(self, cli, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("output_dir = out\nflavour = vanilla\n", encoding="utf-8")
        assert cli.run(["phantom", "--config", str(path)]) == EXIT_CONFIG

    def test_eval_without_data(self, cli, tiny_run_config_file):
        assert cli.run(["eval", "--config", str(tiny_run_config_file)]) == EXIT_IO

    def test_phantom_prints_manifest(self, cli, tiny_run_config_file, capsys):
        code = cli.run(["phantom", "--config", str(tiny_run_config_file)])
        assert code == EXIT_OK
        manifest = tiny_run_config_file.parent / "out" / "dataset" / "manifest.csv"
        assert manifest.is_file()
        assert capsys.readouterr().out.strip() == str(manifest)
        assert len(manifest.read_text(encoding="utf-8").splitlines()) == 4

    def test_seed_override(self, cli, tiny_run_config_file):
        assert cli.run(["phantom", "--config", str(tiny_run_config_file), "--seed", "6"]) == EXIT_OK
        lines = (tiny_run_config_file.parent / "out" / "dataset" / "manifest.csv").read_text(encoding="utf-8")
        seeds = [int(line.rsplit(",", 1)[1]) for line in lines.splitlines()]
        assert seeds == [6, 7, 8, 9]
