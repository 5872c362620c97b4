import json
import subprocess
import sys

import numpy as np
import pytest

from extreme_povm import io
from extreme_povm.cli import main
from extreme_povm.constructions import pvm
from extreme_povm.extremality import check_extreme_c
from extreme_povm.operator_core import validate_povm
from extreme_povm.packing import formation_from_dict, formation_problems


@pytest.fixture
def pvm_file(tmp_path):
    path = tmp_path / "pvm.json"
    io.write_povm(pvm([1, 1]), path)
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_pack_examples(capsys):
    code, out, _ = run(capsys, "pack", "--vector", "3,2,2,2", "--dim", "5", "--symmetric")
    assert code == 0
    doc = json.loads(out)
    assert not formation_problems(formation_from_dict(doc["formation"]), symmetric=True)
    code, out, _ = run(capsys, "pack", "--vector", "3,2,2,2,2", "--dim", "5")
    assert code == 1 and json.loads(out)["solvable"] is False


def test_pack_render_and_oracle(capsys):
    code, out, _ = run(capsys, "pack", "--vector", "3,2,2", "--dim", "5", "--symmetric", "--render", "svg", "--oracle")
    assert code == 0 and out.startswith("<svg")
    code, out, _ = run(capsys, "--text", "pack", "--vector", "3,2,2", "--dim", "5", "--render", "text")
    assert code == 0 and len(out.strip().splitlines()) == 5


def test_check_extreme_exit_codes(capsys, pvm_file, tmp_path):
    code, out, _ = run(capsys, "check-extreme", str(pvm_file))
    doc = json.loads(out)
    assert code == 0 and doc["verdicts"][0]["extreme"] is True
    half = tmp_path / "half.json"
    io.write_povm(validate_povm([np.eye(2) / 2, np.eye(2) / 2]), half)
    wit = tmp_path / "wit.json"
    code, out, _ = run(capsys, "check-extreme", str(half), "--criterion", "both", "--witness-out", str(wit))
    assert code == 1 and "witness" in json.loads(out)
    pair = io.read_json(wit)
    a, b = io.povm_from_dict(pair["a"]), io.povm_from_dict(pair["b"])
    assert np.allclose((a.effects[0] + b.effects[0]) / 2, np.eye(2) / 2)


def test_dilate(capsys, pvm_file):
    code, out, _ = run(capsys, "dilate", str(pvm_file))
    doc = json.loads(out)
    assert code == 0 and doc["dilation_dim"] == 2 and doc["block_sizes"] == [1, 1]
    assert np.allclose(np.abs(io.matrix_from_json(doc["isometry"])), np.eye(2))


def test_construct_chain(capsys, tmp_path):
    a = tmp_path / "a.json"
    assert run(capsys, "construct", "rank1-chain", "--dim", "2", "--outcomes", "3", "--seed", "4", "--out", str(a))[0] == 0
    b = tmp_path / "b.json"
    assert run(capsys, "construct", "delete", "--in", str(a), "--index", "3", "--out", str(b))[0] == 0
    assert io.read_povm(b).ranks == (1, 1)
    c = tmp_path / "c.json"
    assert run(capsys, "construct", "multiply", "--in", str(a), "--factor", "2", "--out", str(c))[0] == 0
    assert io.read_povm(c).ranks == (2, 2, 2)
    d = tmp_path / "d.json"
    assert run(capsys, "construct", "refine", "--in", str(c), "--partition", "1,1;2;2", "--out", str(d))[0] == 0
    assert io.read_povm(d).ranks == (1, 1, 2, 2)
    e = tmp_path / "e.json"
    assert run(capsys, "construct", "lift", "--in", str(c), "--p", "1", "--index", "2", "--out", str(e))[0] == 0
    assert check_extreme_c(io.read_povm(e)).is_extreme


def test_seed_determines_output(capsys):
    outs = [run(capsys, "construct", "rank1-chain", "--dim", "3", "--outcomes", "6", "--seed", "9")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_usage_errors(capsys, pvm_file):
    code, _, err = run(capsys, "pack", "--dim", "5")
    assert code == 3 and "usage:" in err
    code, _, err = run(capsys, "frobnicate")
    assert code == 3
    code, _, err = run(capsys, "construct", "delete", "--in", str(pvm_file), "--index", "9")
    assert code == 3 and "usage:" in err
    code, _, err = run(capsys, "pack", "--vector", "3,2", "--dim", "5", "--bogus")
    assert code == 3


def test_data_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "effects": [io.matrix_to_json(np.eye(2) * 0.75)] * 2}))
    code, _, err = run(capsys, "check-extreme", str(bad))
    assert code == 4 and "NotNormalized" in err
    code, _, _ = run(capsys, "check-extreme", str(tmp_path / "missing.json"))
    assert code == 4
    code, _, _ = run(capsys, "search", "--vector", "2,2", "--dim", "3", "--budget", "5")
    assert code == 4


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--dim", "3")
    assert code == 0 and set(json.loads(out)["candidates"]) == {"()_3", "(2)_3", "(3)_3"}
    code, out, _ = run(capsys, "--text", "enumerate", "--dim", "5", "--derive")
    assert code == 0 and "(3,2_4)_5" in out and "OPEN" in out


def test_synthesize_and_search(capsys, tmp_path):
    out_file, form = tmp_path / "s.json", tmp_path / "f.json"
    code, _, _ = run(capsys, "synthesize", "--vector", "3,2,2,2", "--dim", "5", "--out", str(out_file),
                     "--emit-formation", str(form))
    assert code == 0 and check_extreme_c(io.read_povm(out_file)).is_extreme
    assert not formation_problems(formation_from_dict(io.read_json(form)), symmetric=True)
    code, _, _ = run(capsys, "synthesize", "--vector", "3,3,2,2,2", "--dim", "6")
    assert code == 1
    wit = tmp_path / "w.json"
    code, out, _ = run(capsys, "search", "--vector", "3,2,2,2,2", "--dim", "5", "--budget", "1000",
                       "--seed", "7", "--out", str(wit))
    assert code == 0 and json.loads(out)["found"] is True
    again = tmp_path / "again.json"
    code, _, _ = run(capsys, "check-extreme", str(wit), "--tolerance-profile", "strict", "--out", str(again))
    assert code == 0 and io.read_json(again)["verdicts"][0]["extreme"] is True


def test_console_script_entry_point(pvm_file):
    proc = subprocess.run(
        [sys.executable, "-m", "extreme_povm.cli", "check-extreme", str(pvm_file)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["verdicts"][0]["reliable"] is True
