import json

import numpy as np
import pytest

from sbmcircuit import cli
from sbmcircuit.models import fmo_hamiltonian


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_map_identity_exact(tmp_path, capsys):
    src = write_json(tmp_path / "eye.json", np.eye(3).tolist())
    code, out = run(capsys, "map", src, "--operator-out", str(tmp_path / "op.json"))
    rep = json.loads(out)
    assert code == 0
    assert rep["top_block_residual"] == 0.0 and rep["off_block_residual"] == 0.0
    op = json.loads((tmp_path / "op.json").read_text())
    assert op["modes"] == 1 and op["cutoff"] == 6 and len(op["matrix"]) == 36


def test_map_fmo(tmp_path, capsys):
    src = write_json(tmp_path / "fmo.json", {"matrix": fmo_hamiltonian().tolist()})
    code, out = run(capsys, "map", src)
    rep = json.loads(out)
    assert code == 0
    assert rep["top_block_residual"] <= 1e-12 and rep["off_block_residual"] <= 1e-12


def test_map_complex_pairs(tmp_path, capsys):
    m = [[[1, 0], [0, 2]], [[0, -2], [3, 0]]]
    code, out = run(capsys, "map", write_json(tmp_path / "c.json", m))
    assert code == 0 and json.loads(out)["k"] == 2


def test_map_non_hermitian_exit_2(tmp_path, capsys):
    code, out = run(capsys, "map", write_json(tmp_path / "bad.json", [[1, 2], [3, 4]]))
    assert code == 2
    assert "1.000e+00" in json.loads(out)["error"]


def test_map_missing_file_exit_2(tmp_path, capsys):
    assert cli.main(["map", str(tmp_path / "nope.json")]) == 2


def test_sbm_tol_changes_reporting_only(tmp_path, capsys, monkeypatch):
    src = write_json(tmp_path / "fmo.json", fmo_hamiltonian().tolist())
    monkeypatch.setenv("SBM_TOL", "1e-20")
    code, out = run(capsys, "map", src)
    assert code == 0 and json.loads(out)["tolerance"] == 1e-20
    code, out = run(capsys, "bench", "tls", "--steps", "20")
    assert code == 0 and json.loads(out)["thresholds"]["max_leakage"] == 1e-10
    monkeypatch.setenv("SBM_TOL", "-1")
    assert cli.main(["map", src]) == 2


def test_transpile_cz(capsys):
    code, out = run(capsys, "transpile", "--model", "cz")
    rep = json.loads(out)
    assert code == 0 and rep["num_cz"] == 1 and rep["fidelity"] == 1.0


def test_transpile_fmo_and_random(tmp_path, capsys):
    code, out = run(capsys, "transpile", "--model", "fmo", "--tau", "5",
                    "--circuit-out", str(tmp_path / "c.json"))
    assert code == 0 and json.loads(out)["fidelity"] >= 1 - 1e-9
    circ = json.loads((tmp_path / "c.json").read_text())
    assert {g["type"] for g in circ["snail"]["gates"]} <= {"snail", "crosskerr"}
    code, out = run(capsys, "transpile", "--model", "random", "--seed", "7")
    assert code == 0 and json.loads(out)["fidelity"] >= 1 - 1e-9


def test_transpile_unitary_file(tmp_path, capsys):
    src = write_json(tmp_path / "x.json", [[0, 1], [1, 0]])
    code, out = run(capsys, "transpile", "--unitary", src)
    assert code == 0 and json.loads(out)["num_cz"] == 0


def test_transpile_rejects_non_unitary(tmp_path, capsys):
    src = write_json(tmp_path / "u.json", [[2, 0], [0, 1]])
    assert cli.main(["transpile", "--unitary", src]) == 2


def test_simulate_csv(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert cli.main(["simulate", "--model", "fmo", "--steps", "5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "site1,site2,site3,site4".join(["t,", ",leakage"])
    assert len(lines) == 7


def test_bench_tls(tmp_path, capsys):
    code, out = run(capsys, "bench", "tls", "--epsilon", "50", "--delta", "20", "--out", str(tmp_path))
    rep = json.loads(out)
    assert code == 0 and rep["ok"]
    assert rep["max_deviation_snail_vs_rabi"] < 1e-8
    assert (tmp_path / "tls_direct.csv").exists() and (tmp_path / "tls_snail.csv").exists()
    assert json.loads((tmp_path / "summary.json").read_text()) == rep


def test_bench_fmo(capsys):
    code, out = run(capsys, "bench", "fmo", "--tau", "5", "--steps", "200")
    assert code == 0 and json.loads(out)["max_deviation_snail_vs_direct"] < 1e-8


def test_bench_spinboson(tmp_path, capsys):
    code, out = run(capsys, "bench", "spinboson", "--modes", "4", "--cutoff", "6", "--out", str(tmp_path))
    rep = json.loads(out)
    assert code == 0, rep["failed"]
    assert rep["end_to_end_deviation"] < 1e-8
    assert (tmp_path / "spinboson_superoperator.csv").read_text().startswith("t,p00,p01,p10,p11,rescale\n")


def test_bench_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "LEAKAGE_TOL", -1.0)
    code, out = run(capsys, "bench", "tls", "--steps", "5")
    assert code == 1 and json.loads(out)["failed"] == ["max_leakage"]


def test_selftest_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["selftest", "--seed", "11", "--out", str(a)]) == 0
    assert cli.main(["selftest", "--seed", "11", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_parse_matrix_forms():
    assert np.array_equal(cli.parse_matrix({"real": [[1, 0], [0, 1]], "imag": [[0, 1], [-1, 0]]}),
                          [[1, 1j], [-1j, 1]])
    with pytest.raises(cli.ValidationError):
        cli.parse_matrix([1, 2, 3])
