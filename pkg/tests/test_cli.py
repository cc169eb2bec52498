import json

import pytest

from sichain import models
from sichain.cli import main, parse_N, parse_t


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_helpers():
    assert parse_N("4..64") == [4, 8, 16, 32, 64]
    assert parse_N("5,3,3") == [3, 5]
    assert parse_t("1:1e4:10") == {"lo": 1.0, "hi": 1e4, "per_decade": 10}


def test_analyze_robot(capsys):
    code, out, _ = _run(capsys, "analyze", "--model", "robot")
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["n_phi"] == 2
    assert doc["result"]["tm"] == "Certified"
    assert doc["result"]["predicted_rate"] == "t^{-1/2} sharp"
    assert doc["config"]["model"]["name"] == "robot" and "version" in doc["config"]


def test_simulate_then_fit(tmp_path, capsys):
    curve = tmp_path / "robot.csv"
    code, _, _ = _run(
        capsys, "simulate", "--model", "robot", "--kind", "circulant", "--N", "4..512",
        "--p", "2", "--t", "1e2:1e4:20", "--out", str(curve),
    )
    assert code == 0
    lines = curve.read_text().splitlines()
    assert lines[0].startswith("# sichain") and lines[2] == "t,lower,upper,N,p,kind"
    code, out, _ = _run(capsys, "fit", str(curve), "--with-log")
    fit = json.loads(out)["result"]
    assert code == 0 and 0.45 <= fit["alpha"] <= 0.55


def test_outputs_are_reproducible(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["simulate", "--model", "platoon_pair", "--params", "2,1,1", "--kind", "onesided",
                     "--p", "1", "--N", "2,4", "--t", "1:10:3", "--seed", "7", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_spectrum_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spectrum", "--model", "robot", "--N", "4", "--resolution", "80", "--out", str(out)]) == 0
    rows = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert rows[0] == "re,im,tag"
    tags = {r.rsplit(",", 1)[1] for r in rows[1:]}
    assert {"A0", "omega", "circulant:N=4"} <= tags


def test_cesaro_output(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, _, err = _run(capsys, "cesaro", "--model", "robot", "--x0", "1;-1", "--p", "1", "--n-max", "100", "--out", str(out))
    assert code == 0 and "O(1/n)" in err
    body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert body[0] == "n,norm" and body[4] == "4,0.5"


def test_custom_file_with_bad_coupling(tmp_path, capsys):
    path = tmp_path / "bad.json"
    doc = models.to_json(models.robot())
    doc.update(m=2, A0=[[[-1, 0], [0, 0]], [[0, 0], [-2, 0]]], A1=[[[1, 0], [0, 0]], [[0, 0], [1, 0]]])
    path.write_text(json.dumps(doc))
    code, _, err = _run(capsys, "analyze", "--file", str(path))
    assert code == 2 and "NoCharacteristicFunction" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze"],
        ["analyze", "--model", "nope"],
        ["simulate", "--model", "robot", "--p", "3"],
        ["simulate", "--model", "robot", "--N", "1..4"],
        ["simulate", "--model", "robot", "--t", "10:1:5"],
        ["analyze", "--model", "robot", "--tol", "bogus=1"],
        ["verify", "--only", "99"],
        ["no-such-command"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_verify_subset(capsys):
    code, out, _ = _run(capsys, "verify", "--only", "1,3")
    assert code == 0 and out.count("PASS") == 2
