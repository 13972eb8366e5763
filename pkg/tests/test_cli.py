import csv
import json

import pytest

from surgekit import protocols
from surgekit.cli import main
from surgekit.errors import InternalError
from surgekit.resources import TABLE1


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def test_table1(tmp_path):
    assert main(["estimate", "--table1", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "table1.csv")
    assert [int(r["N_phys"]) for r in rows] == [w[0] for _, w in TABLE1]
    assert [int(r["N_cache"]) for r in rows] == [w[2] for _, w in TABLE1]
    man = json.loads((tmp_path / "table1.manifest.json").read_text())
    assert man["subcommand"] == "estimate" and man["outputs"] == ["table1.csv"]


def test_table1_stdout(capsys):
    assert main(["estimate", "--table1"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("L,h,w,d_x,d_z,d_m,N_phys")
    assert "46472" in out


def test_estimate_config(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"L": 8, "h": 2, "w": 6, "mu": 3.5e5, "p": 1e-3,
                                           "delta": 0.01})
    assert main(["estimate", "--config", cfg, "--out", str(tmp_path)]) == 0
    est = json.loads((tmp_path / "estimate.json").read_text())
    assert (est["d_x"], est["d_z"], est["d_m"]) == (7, 13, 12)
    assert est["N_phys"] == 46472


@pytest.mark.parametrize("argv_fn, code", [
    (lambda d: ["estimate", "--config", str(d / "missing.json")], 1),
    (lambda d: ["bogus"], 1),
    (lambda d: ["estimate"], 1),
    (lambda d: ["estimate", "--config", write_json(d / "a.json", {"L": 8, "h": 2})], 1),
    (lambda d: ["estimate", "--config", write_json(d / "b.json", {"L": 8, "h": 2, "w": 6, "mu": 1e40,
                                                                  "p": 1e-3, "delta": 0.01})], 2),
    (lambda d: ["simulate", "--config", write_json(d / "s.json", {"d_x": 4})], 1),
    (lambda d: ["simulate", "--config", write_json(d / "u.json", {"colour": 1})], 1),
    (lambda d: ["tels", "--p", "0.05"], 2),
])
def test_exit_codes(tmp_path, argv_fn, code):
    assert main(argv_fn(tmp_path)) == code


def test_internal_error_exit(monkeypatch):
    def boom(*a, **k):
        raise InternalError("oracle mismatch")
    monkeypatch.setattr(protocols, "verify_pbc_equivalence", boom)
    assert main(["verify", "pbc"]) == 3


def test_failed_report_exit(monkeypatch):
    class Bad:
        passed = False

        def to_json(self):
            return {"passed": False}
    monkeypatch.setattr(protocols, "verify_pbc_equivalence", lambda *a, **k: Bad())
    assert main(["verify", "pbc"]) == 3


def test_tels_sweep(tmp_path):
    assert main(["tels", "--k", "11", "--families", "unencoded,hamming", "--out", str(tmp_path)]) == 0
    rows = {r["family"]: r for r in read_csv(tmp_path / "tels.csv")}
    assert rows["unencoded"]["dm"] == "18"
    assert rows["hamming"]["n"] == "16" and rows["hamming"]["dm"] == "5"
    assert abs(float(rows["hamming"]["ratio"]) - 0.46) <= 0.03


def test_tels_custom_code(tmp_path, capsys):
    code = write_json(tmp_path / "g.json", {"G": [[1, 0, 1], [0, 1, 1]], "family": "mine"})
    assert main(["tels", "--code", code]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert rows[0]["family"] == "mine" and rows[0]["d"] == "2"


SIM_CFG = {"runs": [{"d_x": 3, "d_z": 3, "l": 1, "r": 3, "dm": d, "p": 4e-3, "eta": 1.0}
                    for d in (1, 3, 5)]}


def test_simulate_deterministic(tmp_path):
    cfg = write_json(tmp_path / "sim.json", SIM_CFG)
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["simulate", "--config", cfg, "--trials", "3000", "--seed", "7",
                     "--threads", "1", "--out", str(out)]) == 0
    assert (a / "simulate.csv").read_bytes() == (b / "simulate.csv").read_bytes()
    rows = read_csv(a / "simulate.csv")
    assert len(rows) == 3 * 16
    for dm in ("1", "3", "5"):
        sub = [r for r in rows if r["dm"] == dm]
        assert sum(int(r["count"]) for r in sub) == 3000
    man = json.loads((a / "simulate.manifest.json").read_text())
    assert man["seed"] == 7 and len(man["config_hash"]) == 64

    # the fit consumes the simulate CSV directly
    assert main(["fit", "--csv", str(a / "simulate.csv"), "--class", "0100",
                 "--out", str(tmp_path / "fit")]) == 0
    fit = json.loads((tmp_path / "fit" / "fit.json").read_text())
    assert fit["A"] > 0 and fit["B"] > 0 and fit["points"] >= 1


def test_fit_rejects_sparse(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("d_x,d_z,l,r,dm,p,eta,trials,class,count,rate,ci_low,ci_high\n"
                    "3,3,1,3,1,0.001,1,100,0100,5,0.05,0,0\n", encoding="utf-8")
    assert main(["fit", "--csv", str(path)]) == 1


def test_verify_all(capsys):
    assert main(["verify", "all", "--trials", "100", "--seed", "3"]) == 0
    reports = json.loads(capsys.readouterr().out)
    assert len(reports) == 5
    assert all(r["pass"] for r in reports)
