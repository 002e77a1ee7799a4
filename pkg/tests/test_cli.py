import argparse
import json
import logging
import math
import runpy
import sys
import warnings
from unittest import mock

import pytest

from xygibbs import __version__, cli
from xygibbs.exceptions import DomainError

parse_args = cli._parse_args


@pytest.fixture(autouse=True)
def setup_logger():
    with mock.patch("xygibbs.cli.setup_logger") as patched:
        yield patched


@pytest.fixture
def write_config(tmp_path):
    def write(config, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(config), encoding="utf-8")
        return str(path)
    return write


def run(capsys, config_path, *flags):
    status = cli.main(["--config", config_path, *flags])
    return status, json.loads(capsys.readouterr().out)


def test_parse_args():
    args = parse_args(argparse.ArgumentParser(), ["--command", "pressure", "--beta", "1,2", "--seed", "3"])
    assert args.command == "pressure"
    assert args.beta == "1,2"
    assert args.seed == 3
    assert args.config is None
    assert not args.verbose


def test_parse_args_rejects_unknown_command():
    with pytest.raises(SystemExit):
        parse_args(argparse.ArgumentParser(), ["--command", "download"])


def test_version(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--version"])
    assert capsys.readouterr().out == f"xygibbs {__version__}\n"


def test_logger_levels(setup_logger, write_config, capsys):
    path = write_config({"family": "zero"})
    run(capsys, path, "--command", "pressure", "--beta", "1")
    setup_logger.assert_called_with(logging.INFO, log_filename=None)
    run(capsys, path, "--command", "pressure", "--beta", "1", "-v", "--logfile", "run.log")
    setup_logger.assert_called_with(logging.DEBUG, log_filename="run.log")


@mock.patch("xygibbs.cli.execute")
def test_main_returns_execute_status(execute, write_config):
    execute.return_value = 3
    assert cli.main(["--config", write_config({"family": "zero"}), "--command", "maximize"]) == 3
    execute.assert_called_once()


def test_pressure_zero(write_config, capsys):
    status, report = run(capsys, write_config({"family": "zero"}), "--command", "pressure", "--beta", "7")
    assert status == 0
    assert report["schema"] == cli.SCHEMA
    assert report["command"] == "pressure"
    assert report["outputs"]["value"] == pytest.approx(0.0, abs=1e-14)
    assert report["outputs"]["pressure_over_beta"] == pytest.approx(0.0, abs=1e-14)
    assert report["config"]["beta"] == [7.0]
    assert report["config"]["settings"]["quad_tol"] == 1e-10
    assert report["config"]["family"]["family"] == "zero"
    assert "error" not in report
    assert report["wall_time_s"] >= 0
    assert report["environment"]["xygibbs"] == __version__


def test_pressure_at_zero_beta_has_null_pressure(write_config, capsys):
    _, report = run(capsys, write_config({"family": "example1"}), "--command", "pressure", "--beta", "0")
    assert report["outputs"]["pressure_over_beta"] is None


def test_pressure_rows_for_several_betas(write_config, capsys):
    _, report = run(capsys, write_config({"family": "example1"}), "--command", "pressure", "--beta", "1,2,3")
    assert [row["beta"] for row in report["outputs"]["rows"]] == [1.0, 2.0, 3.0]
    assert len(report["error_estimates"]["log_lambda"]) == 3


def test_config_file_run_fields(write_config, capsys):
    path = write_config({"family": "zero", "command": "pressure", "beta": 1})
    _, report = run(capsys, path)
    assert report["config"]["beta"] == [1.0]
    _, report = run(capsys, path, "--beta", "2")
    assert report["config"]["beta"] == [2.0]


def test_tol_flag(write_config, capsys):
    _, report = run(capsys, write_config({"family": "zero"}), "--command", "pressure", "--beta", "1", "--tol", "1e-8")
    assert report["config"]["settings"]["quad_tol"] == 1e-8


def test_select_example1(write_config, capsys):
    status, report = run(capsys, write_config({"family": "example1"}), "--command", "select")
    assert status == 0
    assert report["outputs"]["locations"] == pytest.approx([0.0], abs=1e-7)
    assert report["outputs"]["weights"] == [1.0]


def test_maximize_double_well(write_config, capsys):
    path = write_config({"family": "single", "coeffs": [-0.0625, 0, 0.5, 0, -1]})
    _, report = run(capsys, path, "--command", "maximize")
    assert report["outputs"]["locations"] == pytest.approx([-0.5, 0.5], abs=1e-7)
    assert len(report["error_estimates"]["second_derivative"]) == 2


def test_ldp_with_csv(write_config, capsys, tmp_path):
    csv_path = tmp_path / "ldp.csv"
    status, report = run(
        capsys, write_config({"family": "example1"}),
        "--command", "ldp", "--cylinder", "[[0.2, 0.3]]", "--beta", "100,1000,10000", "--csv", str(csv_path),
    )
    assert status == 0
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "beta,log_mass_over_beta,neg_inf_I,residual"
    assert len(lines) == 4
    assert float(lines[-1].split(",")[-1]) <= 0.02
    assert report["outputs"]["final_residual"] == float(lines[-1].split(",")[-1])
    assert report["outputs"]["rate"]["inf_I"] == pytest.approx(0.04 / 0.96, abs=1e-12)


def test_cylinder_command(write_config, capsys):
    _, report = run(
        capsys, write_config({"family": "zero"}), "--command", "cylinder", "--cylinder", "[[0, 0.5], [0, 0.5]]",
        "--beta", "3")
    assert report["outputs"]["log_mass"] == pytest.approx(math.log(0.25), abs=1e-12)
    assert report["config"]["cylinder"] == [[0.0, 0.5], [0.0, 0.5]]


def test_sweep_command(write_config, capsys):
    _, report = run(
        capsys, write_config({"family": "example1"}), "--command", "sweep", "--cylinder", "[[-0.1, 0.1]]",
        "--beta", "10,100")
    assert report["outputs"]["m_f"] == pytest.approx(0.0, abs=1e-15)
    assert len(report["outputs"]["rows"]) == 2


def test_entropy_command_flags_assumptions(write_config, capsys):
    _, report = run(capsys, write_config({"family": "polylog", "gamma": 3}), "--command", "entropy", "--beta", "1")
    assert report["outputs"]["assumptions"]
    assert report["outputs"]["variational_residual"] <= 1e-8


def test_density_command(write_config, capsys):
    _, report = run(
        capsys, write_config({"family": "example1"}), "--command", "density", "--beta", "1",
        "--points=-0.25,0,0.25", "--index", "2")
    rows = report["outputs"]["rows"]
    assert [row["a"] for row in rows] == [-0.25, 0.0, 0.25]
    assert report["error_estimates"]["marginal_relation_residual"]["1.0"] <= 1e-10


def test_eigencheck_command(write_config, capsys):
    _, report = run(
        capsys, write_config({"family": "example1"}), "--command", "eigencheck", "--beta", "1",
        "--at", '{"prefix": [0.3], "tail": 0.1}')
    assert report["outputs"]["eigen_residual"] <= 1e-8
    assert report["outputs"]["hypothesis"]["ok"] is True
    assert report["config"]["at"] == {"prefix": [0.3], "tail_value": 0.1}


def test_subaction_command(write_config, capsys):
    _, report = run(
        capsys, write_config({"family": "example1"}), "--command", "subaction", "--at", "[[0.5], 0]", "--beta", "2")
    assert report["outputs"]["u"] == pytest.approx(-1 / 12, abs=1e-15)
    assert report["outputs"]["log_h"] == pytest.approx([-1 / 6], abs=1e-14)


def test_laplace_command(write_config, capsys):
    _, report = run(capsys, write_config({"family": "example1"}), "--command", "laplace", "--beta", "10000")
    assert report["outputs"]["relative_error"] == pytest.approx(-3 / 4e4, rel=0.05)


def test_sample_is_reproducible(write_config, capsys, tmp_path):
    path = write_config({"family": "example1"})
    texts = []
    for name in ("first.csv", "second.csv"):
        csv_path = tmp_path / name
        run(capsys, path, "--command", "sample", "--beta", "2", "--seed", "9", "--count", "50", "--csv", str(csv_path))
        texts.append(csv_path.read_bytes())
    assert texts[0] == texts[1]
    assert len(texts[0].splitlines()) == 51


def test_sample_plain_marginal(write_config, capsys):
    _, report = run(
        capsys, write_config({"family": "example1"}), "--command", "sample", "--beta", "1", "--seed", "1",
        "--count", "10", "--index", "1")
    assert report["outputs"]["kind"] == "plain"
    assert len(report["outputs"]["draws"]) == 10


def test_sample_at_large_beta(write_config, capsys):
    status, report = run(
        capsys, write_config({"family": "example1"}), "--command", "sample", "--beta", "10000", "--seed", "4",
        "--count", "200")
    assert status == 0
    assert len(report["outputs"]["draws"]) == 200
    assert max(abs(d) for d in report["outputs"]["draws"]) <= 0.1


def test_pressure_half_integer_polylog(write_config, capsys):
    status, report = run(
        capsys, write_config({"family": "polylog", "gamma": 2.5}), "--command", "pressure", "--beta", "1")
    assert status == 0
    assert math.isfinite(report["outputs"]["value"])


@mock.patch("xygibbs.cli.log_partition", side_effect=ValueError("dydx must contain only finite values"))
def test_unexpected_failure_is_reported(log_partition, write_config, capsys):
    status, report = run(capsys, write_config({"family": "zero"}), "--command", "pressure", "--beta", "1")
    assert status == 3
    assert report["error"] == {"code": "numerical_error", "message": "ValueError: dydx must contain only finite values"}
    assert report["outputs"] == {}
    assert report["command"] == "pressure"


def test_out_flag_writes_report(write_config, capsys, tmp_path):
    out = tmp_path / "reports" / "pressure.json"
    status = cli.main(["--config", write_config({"family": "zero"}), "--command", "pressure", "--beta", "1",
                       "--out", str(out)])
    assert status == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text(encoding="utf-8"))["command"] == "pressure"


@pytest.mark.parametrize("config, flags, status, code", [
    ({"family": "potts"}, ["--command", "pressure", "--beta", "1"], 2, "config_error"),
    ({"family": "zero"}, ["--beta", "1"], 2, "config_error"),
    ({"family": "zero"}, ["--command", "pressure"], 2, "config_error"),
    ({"family": "zero"}, ["--command", "pressure", "--beta", "-1"], 2, "config_error"),
    ({"family": "zero"}, ["--command", "cylinder", "--beta", "1"], 2, "config_error"),
    ({"family": "zero"}, ["--command", "sample", "--beta", "1", "--count", "0"], 2, "config_error"),
    ({"family": "example1"}, ["--command", "subaction", "--at", "0.9"], 3, "domain_error"),
    ({"family": "example1"}, ["--command", "cylinder", "--cylinder", "[[0.3, 0.2]]", "--beta", "1"],
     3, "domain_error"),
    ({"family": "polylog", "gamma": 3}, ["--command", "select"], 4, "endpoint_peak"),
    ({"family": "zero"}, ["--command", "maximize"], 4, "unsupported_multiplicity"),
])
def test_error_reports(write_config, capsys, config, flags, status, code):
    returned, report = run(capsys, write_config(config), *flags)
    assert returned == status
    assert report["error"]["code"] == code
    assert report["error"]["message"]
    assert report["outputs"] == {}


def test_missing_config_file(capsys, tmp_path):
    status, report = run(capsys, str(tmp_path / "missing.json"), "--command", "pressure", "--beta", "1")
    assert status == 2
    assert report["config"] is None


def test_no_config_flag(capsys):
    assert cli.main(["--command", "pressure", "--beta", "1"]) == 2
    assert json.loads(capsys.readouterr().out)["error"]["code"] == "config_error"


def test_build_report_replaces_non_finite():
    report = cli.build_report(None, {"value": math.inf, "rows": [{"x": math.nan}]}, {}, 0.5)
    assert report["outputs"] == {"value": None, "rows": [{"x": None}]}
    assert report["command"] is None


def test_build_report_error():
    error = DomainError(2.0, 0.0, 1.0)
    report = cli.build_report(None, {}, {}, 0.1, error=error)
    assert report["error"] == {"code": "domain_error", "message": "2.0 is outside the domain [0.0, 1.0]"}


def test_module_entry_point():
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        with mock.patch("xygibbs.cli.main", return_value=0) as main, pytest.raises(SystemExit) as exit_info:
            runpy.run_module("xygibbs", run_name="__main__")
    assert exit_info.value.code == 0
    main.assert_called_once_with()
    assert "xygibbs.__main__" not in sys.modules
