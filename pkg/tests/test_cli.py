import json

import pytest
from click.testing import CliRunner

from spectrafit.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def edge_file(runner, tmp_path_factory):
    path = tmp_path_factory.mktemp("graphs") / "er.edges"
    result = runner.invoke(main, ["generate", "--family", "er", "--n", "50",
                                  "--seed", "4", "-o", "p=0.2",
                                  "--output", str(path)])
    assert result.exit_code == 0
    return str(path)


class TestGenerate:
    def test_stdout_edge_list(self, runner):
        result = runner.invoke(main, ["generate", "--family", "ba",
                                      "--n", "20", "-o", "p_s=1.0"])
        assert result.exit_code == 0
        assert result.output.startswith("n=20")

    def test_bad_option_format(self, runner):
        result = runner.invoke(main, ["generate", "--family", "er",
                                      "--n", "10", "-o", "p:0.1"])
        assert result.exit_code == 2

    def test_domain_error_exit_code(self, runner):
        result = runner.invoke(main, ["generate", "--family", "dr",
                                      "--n", "5", "-o", "d=3"])
        assert result.exit_code == 1


class TestSpectrum:
    def test_eigenvalues(self, runner, edge_file):
        result = runner.invoke(main, ["spectrum", edge_file])
        assert result.exit_code == 0
        assert len(result.output.strip().splitlines()) == 50

    def test_density_csv(self, runner, edge_file):
        result = runner.invoke(main, ["spectrum", edge_file,
                                      "--kind", "density",
                                      "--grid", "-2,2,128"])
        assert result.exit_code == 0
        assert result.output.splitlines()[0] == "x,value"

    def test_missing_file(self, runner):
        result = runner.invoke(main, ["spectrum", "/no/such/file"])
        assert result.exit_code == 1

    def test_one_based(self, runner, tmp_path):
        path = tmp_path / "one.edges"
        path.write_text("1 2\n2 3\n")
        result = runner.invoke(main, ["spectrum", str(path), "--one-based"])
        assert result.exit_code == 0
        assert len(result.output.strip().splitlines()) == 3

    def test_bad_grid_spec(self, runner, edge_file):
        result = runner.invoke(main, ["spectrum", edge_file,
                                      "--kind", "density", "--grid", "1"])
        assert result.exit_code == 2


class TestLaw:
    def test_point_evaluation(self, runner):
        result = runner.invoke(main, ["law", "--law", "semicircle",
                                      "--at", "0"])
        assert result.exit_code == 0
        assert "0.318309886" in result.output

    def test_missing_parameter(self, runner):
        result = runner.invoke(main, ["law", "--law", "kesten-mckay"])
        assert result.exit_code == 1


class TestBmDensity:
    def test_curve_csv(self, runner):
        result = runner.invoke(main, [
            "bm-density", "--block-sizes", "20,20", "--p0", "0.1",
            "--p-within", "0.5,0.5", "--grid", "-2.5,2.5,64"])
        assert result.exit_code == 0
        # stderr notes are merged into output by the test runner
        lines = [l for l in result.output.splitlines()
                 if not l.startswith("#")]
        assert lines[0] == "x,value"


class TestFit:
    def test_json_report(self, runner, edge_file):
        result = runner.invoke(main, ["fit", edge_file, "--family", "er"])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["family"] == "er"
        assert 0.0 < report["theta"][0] < 1.0

    def test_custom_bounds(self, runner, edge_file):
        result = runner.invoke(main, ["fit", edge_file, "--family", "er",
                                      "--bounds", "0.1,0.3", "--step", "0.1",
                                      "--mode", "grid"])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert 0.1 <= report["theta"][0] <= 0.3


class TestSelect:
    def test_ranking_json(self, runner, edge_file):
        result = runner.invoke(main, [
            "select", edge_file, "--candidates", "er,grg",
            "--mc-samples", "4", "--grid-points", "256", "--seed", "2"])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["winner"] in ("er", "grg")
        assert len(report["fits"]) == 2


class TestExperiment:
    def test_confusion_csv(self, runner, tmp_path):
        config = tmp_path / "exp.cfg"
        config.write_text(
            "[experiment]\nkind = confusion\nn = 30\nreps = 1\nseed = 2\n"
            "divergences = l1-cdf\nmc_samples = 2\ngrid_points = 128\n"
            "[model]\nfamily = er\np = 0.3\n"
            "[model]\nfamily = ba\np_s = 1.0\n")
        out = tmp_path / "res.csv"
        result = runner.invoke(main, ["experiment", str(config),
                                      "--csv-out", str(out)])
        assert result.exit_code == 0
        assert out.read_text().startswith("divergence,n,truth,winner,count")
