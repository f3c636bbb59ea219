from __future__ import annotations

import csv
import json

import pytest

from henon_brody.cli import RunConfig, main, parse_config
from henon_brody.errors import UsageError


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))[1:]


def test_parse_config_defaults():
    cfg, verbose = parse_config(["periodic", "--map", "p=z^2-6; a=0.5"])
    assert isinstance(cfg, RunConfig) and not verbose
    assert cfg.hmap.d == 2 and cfg.period == 1


def test_config_file(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"period": 2, "seed": 4}))
    cfg, _ = parse_config(["periodic", "--config", str(good), "--seed", "9"])
    assert cfg.period == 2 and cfg.seed == 9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"perod": 2}))
    with pytest.raises(UsageError) as info:
        parse_config(["periodic", "--config", str(bad)])
    assert info.value.context["fields"] == ["perod"]


def test_periodic_two_fixed_points(tmp_path, capsys):
    code, out, _ = _run(capsys, "periodic", "--period", "1", "--out", str(tmp_path))
    assert code == 0
    rows = _rows(tmp_path / "periodic_N1.csv")
    assert len(rows) == 2
    assert sorted(round(float(r[3]), 6) for r in rows) == [-1.811738, 3.311738]
    assert "sha256=" in out


def test_classify_outputs(tmp_path, capsys):
    code, out, _ = _run(capsys, "classify", "--grid", "16", "--half-width", "3", "--half-height", "3",
                        "--out", str(tmp_path))
    assert code == 0
    pgm = (tmp_path / "classify.pgm").read_bytes()
    assert pgm.startswith(b"P5\n16 16\n255\n") and len(pgm) == len(b"P5\n16 16\n255\n") + 256
    assert len(_rows(tmp_path / "classify.csv")) == 256
    assert out.count("wrote ") == 2


def test_usage_errors(tmp_path, capsys):
    code, _, err = _run(capsys, "reparam", "--n-max", "0", "--out", str(tmp_path))
    assert code == 1
    record = json.loads(err.strip().splitlines()[-1])
    assert record["code"] == "usage-error"
    code, _, err = _run(capsys, "periodic", "--map", "p=z^2-6; a=0")
    assert code == 1 and "non-zero" in err
    code, _, err = _run(capsys, "frobnicate")
    assert code == 1
    code, _, err = _run(capsys, "periodic", "--no-such-flag")
    assert code == 1


def test_reparam_dissipativity_gate(tmp_path, capsys):
    code, _, err = _run(capsys, "reparam", "--map", "p=z^2-6; a=1.5", "--out", str(tmp_path))
    assert code == 1
    assert "warning" in err and "--force" in err


def test_reparam_domain_error_exit_2(tmp_path, capsys):
    # binary64 mode with a tiny g+ bit budget fails at n = 1
    code, _, err = _run(capsys, "reparam", "--n-max", "3", "--mode", "binary64",
                        "--green-bits-budget", "64", "--out", str(tmp_path))
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["code"] == "pipeline-failed"


def test_reparam_run(tmp_path, capsys):
    code, out, _ = _run(capsys, "reparam", "--n-max", "3", "--mode", "binary64", "--profiles",
                        "--out", str(tmp_path))
    assert code == 0
    rows = _rows(tmp_path / "reparam.csv")
    assert [r[0] for r in rows] == ["1", "2", "3"]
    assert all(abs(float(r[5]) - 1) <= 1e-9 for r in rows)
    assert (tmp_path / "reparam_profile_n03.csv").exists()
    assert "last good n = 3" in out


def test_manifold_and_gallery(tmp_path, capsys):
    code, _, _ = _run(capsys, "manifold", "--rays", "2", "--samples", "8", "--ray-max", "1e6",
                      "--out", str(tmp_path))
    assert code == 0
    rows = _rows(tmp_path / "manifold.csv")
    assert len(rows) == 2 * 8 + 5 * 8
    assert all(float(r[-1]) >= 0 for r in rows)
    code, out, _ = _run(capsys, "gallery", "--radii", "1,20,50", "--angles", "90", "--out", str(tmp_path))
    assert code == 0
    verdicts = dict(_rows(tmp_path / "gallery_verdicts.csv"))
    assert verdicts["poly-graph p=z^2"] == "Brody"
    assert verdicts["graph-exp-power(n=3)"] == "non-Brody"


def test_deterministic_output(tmp_path, capsys):
    for k in (1, 2):
        assert main(["green", "--grid", "8", "--half-width", "2", "--out", str(tmp_path / f"r{k}")]) == 0
    capsys.readouterr()
    assert (tmp_path / "r1" / "green.csv").read_bytes() == (tmp_path / "r2" / "green.csv").read_bytes()
