import argparse
import json

import pytest

from cli_app import main
from src.exceptions import EXIT_FAILED_CERTIFICATE, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_USAGE, UsageError
from src.services.coefficient_service import ShiftParameters
from src.services.kernel_service import TranslateNetwork, canonical_witness, evaluate
from src.utils import RunConfig, format_number, parse_run_config, to_csv


def test_coefficient_table_csv(capsys):
    assert main(["coeffs", "--n", "10", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,a_k"
    assert len(lines) == 12
    assert "2,-0.25" in lines
    assert lines[1] == "0,0.75"


def test_coefficient_table_json(capsys):
    assert main(["coeffs", "--n", "3", "--format", "json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["max_index"] == 3
    assert payload["values"][2] == -0.25


@pytest.mark.slow
def test_certify_json(capsys):
    assert main(["certify", "--lambda", "0.8", "--format", "json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"] is True
    assert payload["lambda"] == 0.8
    assert payload["ratio_lower"] >= payload["threshold"]
    assert set(payload["sup_norm"]) >= {"value", "lower", "upper"}


def test_certify_with_fixed_order(capsys):
    code = main(["certify", "--lambda", "1.1", "--n", "16", "--gap", "1e-7"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["n"] == 16
    assert payload["gap"] == 1e-7
    assert code == (EXIT_OK if payload["passed"] else EXIT_FAILED_CERTIFICATE)


@pytest.mark.slow
def test_sweep_csv(capsys):
    code = main(["sweep", "--lambda-min", "0.5", "--lambda-max", "1.0", "--steps", "3"])
    lines = capsys.readouterr().out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "lambda,n,ratio_lower,threshold,product,passed"
    assert len(lines) == 4
    assert all(line.endswith(",true") for line in lines[1:])


def test_sweep_with_fixed_order(capsys):
    code = main(["sweep", "--lambda-min", "0.9", "--lambda-max", "1.1", "--steps", "3", "--n", "16"])
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    failed = any(line.endswith(",false") for line in lines[1:])
    assert code == (EXIT_FAILED_CERTIFICATE if failed else EXIT_OK)


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["certify"],
        ["certify", "--lambda", "0.5", "--steps", "3"],
        ["certify", "--lambda", "-0.5"],
        ["certify", "--lambda", "abc"],
        ["coeffs", "--n", "10", "--lambda", "0.5"],
        ["coeffs", "--n", "0"],
        ["frame", "--lambda", "0.5", "--format", "csv"],
        ["sweep", "--lambda-min", "0.5", "--lambda-max", "1.0"],
        ["sweep", "--lambda-min", "1.0", "--lambda-max", "0.5", "--steps", "3"],
        ["selfcheck", "--with-oscillation"],
        ["unknown"],
        ["coeffs", "--n", "3", "--format", "xml"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "error:" in err


def test_infeasible_lambda(capsys):
    assert main(["certify", "--lambda", "0.1"]) == EXIT_INFEASIBLE
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "0.1" in captured.err


def test_frame_json(capsys):
    assert main(["frame", "--lambda", "0.8"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["lambda"] == 0.8
    assert 0.0 < payload["mu"] <= payload["big_m"]
    assert payload["explicit_bound_confirmed"] is True


def test_selfcheck_text(capsys):
    assert main(["selfcheck"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["name", "printed", "recomputed", "agree"]
    assert "parseval" in out


def test_selfcheck_csv(capsys):
    assert main(["selfcheck", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name,printed,recomputed,agree"
    assert any(line.startswith("parseval,") and line.endswith(",true") for line in lines)


def test_output_file(tmp_path, capsys):
    target = tmp_path / "coeffs.csv"
    assert main(["coeffs", "--n", "4", "--out", str(target)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert target.read_text(encoding="utf-8").splitlines()[3] == "2,-0.25"


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "missing" / "coeffs.csv"
    assert main(["coeffs", "--n", "4", "--out", str(target)]) == EXIT_IO
    assert "error:" in capsys.readouterr().err


def test_format_number():
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(-0.25) == "-0.25"
    assert format_number(True) == "true"
    assert format_number(None) == ""
    assert format_number(7) == "7"


def test_csv_is_plain():
    assert to_csv(("a", "b"), [(1234567.0, False)]) == "a,b\n1234567,false\n"


def test_run_config_keeps_only_given_flags():
    namespace = argparse.Namespace(
        command="certify", lam=0.5, lambda_min=None, lambda_max=None, steps=None, n_override=None,
        gap=None, output_format=None, output_path=None, with_oscillation=None,
    )
    config = parse_run_config(namespace)
    assert config.lam == 0.5
    assert config.gap == 1e-6
    assert config.resolved_format == "json"
    assert "gap" not in config.model_fields_set


def test_run_config_requires_complete_range():
    namespace = argparse.Namespace(command="sweep", lambda_min=0.5, lambda_max=None, steps=3)
    with pytest.raises(UsageError):
        parse_run_config(namespace)


def test_run_config_defaults_by_command():
    assert RunConfig(command="sweep", lambda_range=(0.5, 1.0, 3)).resolved_format == "csv"
    assert RunConfig(command="selfcheck").resolved_format == "text"
    assert RunConfig.model_validate({"command": "frame", "lambda": 0.3}).lam == 0.3


@pytest.mark.slow
def test_oscillation_artifact_carries_witness_network(capsys):
    code = main(["oscillation", "--lambda", "1.1", "--n", "16", "--gap", "1e-7"])
    payload = json.loads(capsys.readouterr().out)
    assert code in (EXIT_OK, EXIT_FAILED_CERTIFICATE)
    assert payload["lemma1"]["passed"] is True
    net = TranslateNetwork.from_payload(payload["network"])
    expected = canonical_witness(ShiftParameters(lam=1.1, n=16))
    assert net.lam == 1.1
    assert net.as_mapping() == expected.as_mapping()
    assert abs(float(evaluate(net, 0.0))) <= 1e-12
