"""Command line entry points: solve and bench subcommands."""

import json

import pytest

from vifd.bench import CSV_HEADER
from vifd.cli import main


def test_solve_table_output(capsys):
    code = main(["solve", "--problem", "hs-quasimonotone", "--x0", "0.5,0.5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "iter(nT)" in out
    assert "(1, 1)" in out


def test_solve_csv_output(capsys):
    code = main(
        ["solve", "--problem", "hs-quasimonotone", "--x0", "0.5,0.5", "--output", "csv"]
    )
    lines = capsys.readouterr().out.splitlines()
    assert code == 0
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("0.5;0.5,0,2,")


def test_solve_json_output_echoes_config(capsys):
    code = main(
        [
            "solve", "--problem", "fractional-simplex",
            "--x0", "0,0,5,0,0", "--theta", "0.25", "--tol", "1e-4", "--seed", "0",
            "--output", "json",
        ]
    )
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["config"]["problem"] == "fractional-simplex"
    assert payload["config"]["params"]["theta"] == 0.25
    assert payload["config"]["params"]["tol_residual"] == 1e-4
    assert payload["rows"][0]["stop_reason"].endswith("Step2b") or payload["rows"][0][
        "stop_reason"
    ].endswith("Step2a")


def test_solve_iteration_cap_maps_to_exit_two(capsys):
    code = main(
        ["solve", "--problem", "rho-squared", "--x0", "0.5", "--max-iter", "2"]
    )
    capsys.readouterr()
    assert code == 2


def test_bad_parameter_maps_to_exit_one(capsys):
    code = main(["solve", "--problem", "rho-squared", "--x0", "0.5", "--delta", "1.5"])
    captured = capsys.readouterr()
    assert code == 1
    assert captured.err.startswith("error:")


def test_dimension_mismatch_maps_to_exit_one(capsys):
    code = main(["solve", "--problem", "hs-quasimonotone", "--x0", "0.5,0.5,0.5"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_problem_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["solve", "--problem", "nope", "--x0", "0.5"])


def test_unparsable_vector_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["solve", "--problem", "rho-squared", "--x0", "a,b"])


def test_bench_requires_exactly_one_source():
    with pytest.raises(SystemExit):
        main(["bench"])
    with pytest.raises(SystemExit):
        main(["bench", "--preset", "table1", "--config", "x.json"])


def test_bench_preset_csv(capsys):
    code = main(["bench", "--preset", "table1", "--output", "csv"])
    lines = capsys.readouterr().out.splitlines()
    assert code == 0
    assert lines[0] == CSV_HEADER
    assert len(lines) == 7


def test_bench_config_file(tmp_path, capsys):
    path = tmp_path / "exp.json"
    path.write_text(
        json.dumps(
            {
                "problem": "rho-squared",
                "starts": [[0.5]],
                "max_outer_iterations": 2,
                "output": "csv",
            }
        )
    )
    code = main(["bench", "--config", str(path)])
    lines = capsys.readouterr().out.splitlines()
    assert code == 2
    assert lines[0] == CSV_HEADER
    assert lines[1].endswith("MaxIterations")


def test_bench_missing_config_file_maps_to_exit_one(tmp_path, capsys):
    code = main(["bench", "--config", str(tmp_path / "absent.json")])
    assert code == 1
    assert "error:" in capsys.readouterr().err
