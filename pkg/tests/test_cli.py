import json
import subprocess
import sys

import pytest

from koszulcech.cli import main


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(p)


def test_compute_round_trip(tmp_path):
    cfg = write(tmp_path, "job.json", {"ring": "Z/12", "sequence": ["2"], "truncation": {"n_max": 6},
                                       "tasks": [{"compute": "localCohomology"},
                                                 {"compute": "derivedCompletion"},
                                                 {"compute": "koszulTable"},
                                                 {"compute": "proregular"},
                                                 {"compute": "cechOracle"},
                                                 {"check": "weak5"}]})
    out = tmp_path / "out"
    assert main(["compute", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    local = report["tasks"][0]["result"]["degrees"]
    assert local["0"]["value"]["text"] == "Z/4"
    assert local["1"]["value"]["text"] == "0"
    completion = report["tasks"][1]["result"]
    assert completion["degrees"]["0"]["value"]["text"] == "Z/4"
    assert completion["identification"] == "derived completion"
    assert report["tasks"][3]["result"]["perIndex"]["1"]["witnesses"] == {str(n): n + 2 for n in range(1, 7)}
    assert report["tasks"][4]["result"]["cech"]["0"]["text"] == "Z/4"
    assert report["tasks"][5]["result"]["verdict"] == "Pass"
    md = (out / "report.md").read_text()
    assert "| 0 | Z/4 |" in md


def test_compute_is_reproducible(tmp_path):
    cfg = write(tmp_path, "job.json", {"ring": "Z/12", "sequence": ["2", "3"],
                                       "tasks": [{"compute": "localCohomology"}]})
    main(["compute", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["compute", "--config", cfg, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


@pytest.mark.parametrize("content", ["{not json", json.dumps({"ring": "Z/12"}),
                                     json.dumps({"ring": "Z/12", "sequence": ["2"], "tasks": []}),
                                     json.dumps({"ring": "Z/12", "sequence": ["2"],
                                                 "tasks": [{"compute": "everything"}]}),
                                     json.dumps({"ring": "Z/1", "sequence": ["2"],
                                                 "tasks": [{"compute": "localCohomology"}]})])
def test_invalid_config_exits_2(tmp_path, content, capsys):
    cfg = write(tmp_path, "bad.json", content)
    assert main(["compute", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert main(["oracle", "--config", str(tmp_path / "absent.json")]) == 2


def test_oracle_over_z_exits_3(tmp_path):
    cfg = write(tmp_path, "job.json", {"ring": "Z", "sequence": ["2"], "tasks": [{"compute": "cechOracle"}]})
    assert main(["compute", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert main(["oracle", "--config", write(tmp_path, "o.json", {"ring": "Z", "sequence": ["2"]})]) == 3


def test_oracle_table(tmp_path, capsys):
    cfg = write(tmp_path, "o.json", {"ring": "Z/12", "sequence": ["2", "3"]})
    assert main(["oracle", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "| degree | 0 | 1 | 2 |" in out
    assert "| H^i | 0 | 0 | 0 |" in out


@pytest.mark.parametrize("p,m", [(2, 3), (3, 2)])
def test_oracle_nilpotent(tmp_path, capsys, p, m):
    cfg = write(tmp_path, "o.json", {"ring": f"Z/{p ** m}", "sequence": [str(p)]})
    assert main(["oracle", "--config", cfg]) == 0
    assert f"| H^i | Z/{p ** m} | 0 |" in capsys.readouterr().out


def test_oracle_too_long_sequence(tmp_path):
    cfg = write(tmp_path, "o.json", {"ring": "Z/12", "sequence": ["2", "3", "2", "3"]})
    assert main(["oracle", "--config", cfg]) == 3


def _suite(tmp_path, instances, checks):
    return write(tmp_path, "suite.json", {"name": "t", "instances": instances, "checks": checks})


def test_verify_exit_codes(tmp_path):
    ok = _suite(tmp_path, [{"ring": "Z/12", "sequence": ["2"]}], ["weak5"])
    assert main(["verify", "--suite", ok, "--out", str(tmp_path / "r.json")]) == 0
    bad = _suite(tmp_path, [{"ring": "Z/12", "sequence": ["2"], "options": {"mutant": True}}], ["weak5"])
    assert main(["verify", "--suite", bad, "--out", str(tmp_path / "r.json")]) == 1
    unsupported = _suite(tmp_path, [{"ring": "Z", "sequence": ["2"]}], ["coh3_oracle"])
    assert main(["verify", "--suite", unsupported, "--out", str(tmp_path / "r.json")]) == 4
    unknown = _suite(tmp_path, [{"ring": "Z/12", "sequence": ["2"]}], ["nope"])
    assert main(["verify", "--suite", unknown, "--out", str(tmp_path / "r.json")]) == 2


def test_verify_parallel_output_identical(tmp_path):
    suite = _suite(tmp_path, [{"ring": "Z/12", "sequence": ["2"]}, {"ring": "Z/12", "sequence": ["2", "3"]}],
                   ["weak5", "coh2", "coh3_oracle"])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--suite", suite, "--jobs", "1", "--seed", "7", "--out", str(a)]) == 0
    assert main(["verify", "--suite", suite, "--jobs", "3", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert report["seed"] == 7 and report["summary"]["Pass"] == 6


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, "o.json", {"ring": "Z/12", "sequence": ["2"]})
    res = subprocess.run([sys.executable, "-m", "koszulcech", "oracle", "--config", cfg],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "| H^i | Z/4 | 0 |" in res.stdout
