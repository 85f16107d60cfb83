import json

import pytest

from spinwn.cli import EXIT_CLOSURE, EXIT_INPUT, EXIT_OK, EXIT_SINGULAR, main
from spinwn.vqe import DATA_DIR


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_closure_small(capsys, tmp_path):
    code, out, _ = run(capsys, "closure", "--family", "ppqr", "--structure", "--out", str(tmp_path / "b.json"))
    assert code == EXIT_OK
    s = json.loads(out)
    assert s["family"] == "ppqr" and s["dim"] == 5 and sum(s["blocks"]) == 5
    saved = json.loads((tmp_path / "b.json").read_text())
    assert saved["meta"].startswith("spinwn ")
    assert saved["structure_constants"]


def test_closure_cap(capsys):
    code, _, err = run(capsys, "closure", "--family", "int0", "--cap", "10")
    assert code == EXIT_CLOSURE and "cap" in err


def test_closure_unknown_family(capsys):
    code, _, _ = run(capsys, "closure", "--family", "gd")
    assert code == EXIT_INPUT


def test_decompose_closed_form(capsys, tmp_path):
    out_csv = tmp_path / "cf.csv"
    code, out, _ = run(capsys, "decompose", "--family", "ppqr", "--method", "closed-form",
                       "--range=-10:10:41", "--out", str(out_csv))
    assert code == EXIT_OK
    diag = json.loads(out)
    assert diag["max_residual"] < 1e-9 and diag["min_abs_detM"] is None
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("# spinwn ") and len(lines) == 43


def test_decompose_ode(capsys, tmp_path):
    code, out, _ = run(capsys, "decompose", "--family", "ppqr", "--range", "0:2:41", "--out", str(tmp_path / "o.csv"))
    assert code == EXIT_OK
    assert json.loads(out)["max_residual"] < 1e-9


def test_decompose_bad_ordering(capsys):
    code, _, err = run(capsys, "decompose", "--family", "ppqr", "--ordering", "1,2,3")
    assert code == EXIT_INPUT and "permutation" in err


def test_decompose_bad_range(capsys):
    code, _, _ = run(capsys, "decompose", "--family", "ppqr", "--range", "3:1:5")
    assert code == EXIT_INPUT


def test_circuit_feb_row(capsys, tmp_path):
    code, out, _ = run(capsys, "circuit", "--family", "feb-row1", "--theta", "0.4", "--verify",
                       "--qasm", str(tmp_path / "c.qasm"))
    assert code == EXIT_OK
    s = json.loads(out)
    assert s["cnot"] == 21 and s["ry"] == 8 and s["residual"] < 1e-10
    assert (tmp_path / "c.qasm").read_text().startswith("OPENQASM")


def test_circuit_feb_row_bad_indices(capsys):
    code, _, _ = run(capsys, "circuit", "--family", "feb-row1", "--indices", "1,3,4,7")
    assert code == EXIT_INPUT


def test_circuit_ppqr_verified(capsys, tmp_path):
    code, out, _ = run(capsys, "circuit", "--family", "ppqr", "--theta", "0.7", "--verify",
                       "--out", str(tmp_path / "c.json"))
    assert code == EXIT_OK
    assert json.loads(out)["residual"] < 1e-10
    payload = json.loads((tmp_path / "c.json").read_text())
    assert payload["counts"]["ry"] <= 64


def test_circuit_zero_theta_is_empty(capsys):
    code, out, _ = run(capsys, "circuit", "--family", "ppqr", "--theta", "0")
    assert code == EXIT_OK and json.loads(out)["gates"] == 0


def test_count_feb_row(capsys):
    code, out, _ = run(capsys, "count", "--family", "feb-row9")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["row"] == 9 and rep["fixed_cnot"] == 43 and rep["ry"] == 32


def test_count_skip(capsys):
    code, out, _ = run(capsys, "count", "--family", "int0", "--skip", "23,27")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["ry"] == 864 and rep["staircases"] == 40


def test_trotter_small(capsys, tmp_path):
    code, out, _ = run(capsys, "trotter", "--range", "0:0.5:3", "--restarts", "2", "--out", str(tmp_path / "t.csv"))
    assert code == EXIT_OK
    assert json.loads(out)["max_residual"] <= 1e-10


def test_scan_rejects_asymmetric_range(capsys):
    code, _, _ = run(capsys, "scan", "--range", "0:10:11")
    assert code == EXIT_INPUT


def test_adapt_fixture(capsys, tmp_path):
    code, out, _ = run(capsys, "adapt", "--fcidump", str(DATA_DIR / "hubbard_dimer_mo.fcidump"),
                       "--pool", "pdint0", "--out", str(tmp_path / "a.csv"), "--ansatz", str(tmp_path / "a.json"))
    assert code == EXIT_OK
    s = json.loads(out)
    assert abs(s["error"]) < 1e-8
    assert json.loads((tmp_path / "a.json").read_text())["operators"]


@pytest.mark.parametrize("content", [None, " &FCI NORB=1,NELEC=2, &END\n abc 1 1 0 0\n"])
def test_adapt_bad_fcidump(capsys, tmp_path, content):
    path = tmp_path / "bad.fcidump"
    if content is not None:
        path.write_text(content)
    code, _, err = run(capsys, "adapt", "--fcidump", str(path))
    assert code == EXIT_INPUT and "FCIDUMP" in err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "spinwn" in capsys.readouterr().out


def test_decompose_singular_ordering(capsys, tmp_path):
    code, out, err = run(capsys, "decompose", "--family", "ppqr", "--ordering", "1,3,2,5,4",
                         "--range", "0:3:61", "--out", str(tmp_path / "s.csv"))
    assert code == EXIT_SINGULAR
    assert "singularity" in err
    assert 1.4 < json.loads(out)["singular_theta"] < 1.6
