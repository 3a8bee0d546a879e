import json

import pytest

from grimtrigger.cli import main

from conftest import DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_check_not_implementable(capsys):
    code, out = run(capsys, "check", DATA / "partial_reveal.json", DATA / "partial_reveal_alloc.json", "--json")
    assert code == 1
    doc = json.loads(out.out)
    assert doc["implementable"] is False
    assert doc["senders"][0]["deviation_gap"] >= 10 - 1e-9


@pytest.mark.parametrize("method", ["vertex", "primal-lp", "dual-lp", "grid"])
def test_check_methods(capsys, method):
    code, out = run(capsys, "check", DATA / "cyclic.json", DATA / "cyclic_alloc.json", "--method", method)
    assert code == 1 and "implementable: False" in out.out


def test_check_implementable(capsys):
    code, out = run(capsys, "check", DATA / "car.json", DATA / "car_alloc.json", "--parallel")
    assert code == 0


def test_optimize_car(capsys):
    code, out = run(capsys, "optimize", DATA / "car.json", "--json")
    assert code == 0
    assert json.loads(out.out)["value"] == pytest.approx(0.3, abs=1e-9)


def test_deviate(capsys):
    code, out = run(capsys, "deviate", DATA / "partial_reveal.json", DATA / "partial_reveal_alloc.json", "--sender", "0")
    assert code == 1 and "pool into" in out.out


def test_beliefs(capsys):
    code, out = run(capsys, "beliefs", DATA / "cyclic.json", "--sender", "0", "--json")
    assert code == 0
    assert len(json.loads(out.out)["beliefs"]) == 7
    code, out = run(capsys, "beliefs", DATA / "cyclic.json", "--sender", "0", "--pairwise", "--json")
    assert len(json.loads(out.out)["entries"]) == 6


def test_structure(capsys):
    code, out = run(capsys, "structure", DATA / "car.json", DATA / "car_alloc.json", "--json")
    assert code == 0
    assert json.loads(out.out)["senders"][0]["hlf_outcome"] == "N"
    code, _ = run(capsys, "structure", DATA / "car.json")
    assert code == 0


def test_app_audit_cross_check(capsys, tmp_path):
    code, out = run(capsys, "app", "audit", DATA / "audit.json", "--cross-check", "--json", "--out", tmp_path)
    assert code == 0
    doc = json.loads(out.out)
    assert doc["cross_check"]["agree"] and doc["outcome"] == "{0}"
    assert (tmp_path / "model.json").exists() and (tmp_path / "alloc.json").exists()
    code, _ = run(capsys, "check", tmp_path / "model.json", tmp_path / "alloc.json")
    assert code == 0


def test_app_grant_and_auction(capsys):
    code, out = run(capsys, "app", "grant", DATA / "grant.json", "--cross-check", "--json")
    assert code == 0 and json.loads(out.out)["cross_check"]["implementable"]
    code, out = run(capsys, "app", "auction", DATA / "auction.json", "--cross-check", "--json")
    doc = json.loads(out.out)
    assert code == 0 and doc["epir_binds"] and doc["cap_violations"] == []


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "missing.json", "missing.json"],
        ["check", DATA / "car.json", DATA / "partial_reveal_alloc.json"],
        ["deviate", DATA / "car.json", DATA / "car_alloc.json", "--sender", "4"],
        ["bogus"],
        ["app", "audit", DATA / "grant.json"],
    ],
)
def test_input_errors(capsys, argv):
    code, _ = run(capsys, *argv)
    assert code == 2


def test_numerical_failure(capsys, monkeypatch):
    from grimtrigger import cli
    from grimtrigger.lp import NumericalError

    def boom(*a, **k):
        raise NumericalError("stalled")

    monkeypatch.setattr(cli, "constrained_optimum", boom)
    code, out = run(capsys, "optimize", DATA / "car.json")
    assert code == 3 and "stalled" in out.err


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "grimtrigger", "check", str(DATA / "car.json"), str(DATA / "car_alloc.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
