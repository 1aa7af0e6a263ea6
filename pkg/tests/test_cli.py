import json

import pytest

from daqkit.cli import main


def test_qft_check_json(tmp_path):
    assert main(["qft-check", "--qubits", "3", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "qft.json").read_text())
    assert doc["max_error_vs_dft"] <= 1e-10 and doc["da_qft_error"] <= 1e-7


def test_daqc_check_stdout(capsys):
    main(["daqc-check"])
    out = capsys.readouterr().out
    doc = json.loads(out.split("\n", 1)[1])
    assert doc["max_unitary_error"] <= 1e-8


def test_diff_check_csv(tmp_path, capsys):
    main(["diff-check", "--out", str(tmp_path)])
    rows = (tmp_path / "diff.csv").read_text().strip().splitlines()
    assert rows[0].split(",") == ["x", "gpsr", "adjoint", "fd"] and len(rows) == 11
    assert json.loads(capsys.readouterr().err)["max_pairwise_deviation"] <= 1e-6


def test_dqc_ode_short(tmp_path, capsys):
    main(["dqc-ode", "--epochs", "3", "--qubits", "2", "--depth", "1", "--out", str(tmp_path)])
    assert len((tmp_path / "loss.csv").read_text().strip().splitlines()) == 4
    assert len((tmp_path / "solution.csv").read_text().strip().splitlines()) == 101
    assert "mse" in json.loads(capsys.readouterr().err)


def test_dqc_laplace_short(tmp_path):
    main(["dqc-laplace", "--epochs", "2", "--points", "5", "--grid", "4", "--depth", "1", "--out", str(tmp_path)])
    header = (tmp_path / "loss.csv").read_text().splitlines()[0]
    assert header == "iter,loss,left,right,top,bottom,interior"
    assert len((tmp_path / "solution.csv").read_text().strip().splitlines()) == 17


def test_qubo_short(tmp_path):
    main(["qubo", "--iters", "3", "--shots", "50", "--out", str(tmp_path), "--format", "json"])
    doc = json.loads((tmp_path / "counts.json").read_text())
    assert doc["solutions"] == ["00111", "01011"]
    assert sum(doc["optimized"]["counts"].values()) == 50
    assert len(json.loads((tmp_path / "loss.json").read_text())) == 4


@pytest.mark.parametrize("what", ["qft", "da-qft", "hea", "fm", "dqc"])
def test_dump(what, capsys):
    main(["dump", what, "--qubits", "2"])
    assert capsys.readouterr().out.strip()


def test_bad_subcommand():
    with pytest.raises(SystemExit):
        main(["nope"])
