import json

import pytest

from measure_lab import __version__
from measure_lab.interfaces.cli import main
from measure_lab.interfaces.cli.main import EXIT_CONFIG, EXIT_FAILED, EXIT_OK


def power_config(**overrides):
    data = {
        "nonlinearity": {"family": "power", "p": 3},
        "measure": {"atoms": [{"x": 0.5, "y": 0.5, "mass": 1.0}]},
        "grids": [7, 15],
    }
    data.update(overrides)
    return data


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_solve_succeeds(write_config, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["solve", "--config", str(write_config(power_config())), "--out", str(out)])
    assert code == EXIT_OK
    assert "solve finished on 2 grid(s)" in capsys.readouterr().out
    assert (out / "report.json").is_file()
    assert (out / "solution_15.csv").is_file()


def test_out_dir_from_environment(write_config, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("MPLAB_OUT_DIR", str(tmp_path / "from_env"))
    config = str(write_config(power_config()))
    assert main(["solve", "--config", config]) == EXIT_OK
    assert (tmp_path / "from_env" / "report.json").is_file()
    assert main(["solve", "--config", config, "--out", str(tmp_path / "explicit")]) == EXIT_OK
    assert (tmp_path / "explicit" / "report.json").is_file()


def test_profile_override_changes_provenance(write_config, tmp_path):
    config = str(write_config(power_config(grids=[7])))
    main(["solve", "--config", config, "--out", str(tmp_path / "a")])
    override = ["--mollifier-profile", "cosine"]
    main(["solve", "--config", config, "--out", str(tmp_path / "b"), *override])
    hashes = [
        json.loads((tmp_path / name / "report.json").read_text())["provenance"]["config_hash"]
        for name in ("a", "b")
    ]
    assert hashes[0] != hashes[1]


@pytest.mark.parametrize(
    "data",
    [
        power_config(nonlinearity={"family": "expression", "expr": "-u^^2"}),
        power_config(nonlinearity={"family": "expression", "expr": "u"}),
        power_config(grids=[15, 7]),
        {"nonlinearity": {"family": "zero"}, "measure_file": "absent.json", "grids": [7]},
    ],
    ids=["malformed-expression", "increasing-f", "decreasing-grids", "missing-measure-file"],
)
def test_configuration_errors_exit_2(write_config, tmp_path, capsys, data):
    code = main(["solve", "--config", str(write_config(data)), "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_unreadable_config_files_exit_2(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert main(["solve", "--config", str(broken)]) == EXIT_CONFIG


def test_admissible_with_two_grids_exits_2(write_config, tmp_path):
    config = str(write_config(power_config()))
    assert main(["admissible", "--config", config, "--out", str(tmp_path)]) == EXIT_CONFIG


def test_bad_jobs_exits_2(write_config, tmp_path):
    config = str(write_config(power_config()))
    assert main(["solve", "--config", config, "--jobs", "0", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_unconverged_ladder_exits_1(write_config, tmp_path, capsys):
    config = str(write_config(power_config(truncation_levels=[1.0])))
    assert main(["reduce", "--config", config, "--out", str(tmp_path)]) == EXIT_FAILED
    assert "non-converged grids [7, 15]" in capsys.readouterr().err
    assert json.loads((tmp_path / "report.json").read_text())["success"] is False


def test_config_is_required_except_for_verify():
    with pytest.raises(SystemExit) as excinfo:
        main(["reduce"])
    assert excinfo.value.code == 2


def test_reduce_dumps_mollifier_kernels(write_config, tmp_path):
    config = str(write_config(power_config(grids=[15], scheme="mollification")))
    out = tmp_path / "out"
    assert main(["reduce", "--config", config, "--out", str(out), "--dump-kernels"]) == EXIT_OK
    assert (out / "kernels" / "kernel_15_8.csv").is_file()
    assert (out / "kernels" / "kernel_15_16.json").is_file()
    files = json.loads((out / "report.json").read_text())["files"]
    assert "kernels/kernel_15_16.csv" in files


def test_reduce_smooth_density_with_both_schemes(write_config, tmp_path):
    density = {"kind": "expression", "expr": "10*sin(pi*x)*sin(pi*y)"}
    data = power_config(measure={"density": density}, grids=[15, 31], scheme="both")
    out = tmp_path / "out"
    assert main(["reduce", "--config", str(write_config(data)), "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["success"] is True
    assert {g["scheme"] for g in report["grids"]} == {"truncation", "mollification"}
