import json

import pytest

from meanmedian.cli import EXIT_INCOMPLETE, EXIT_OK, EXIT_USAGE, main
from meanmedian.pwa import PiecewiseAffine


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_orbit_probe(capsys):
    code, out, _ = run(capsys, "orbit", "--set", "0,1/10000,1,1")
    assert code == EXIT_OK
    assert out.splitlines()[1].startswith("2597/5000,63,")


def test_orbit_cap_is_incomplete(capsys):
    code, _, err = run(capsys, "orbit", "--set", "0,1/10000,1,1", "--cap", "5")
    assert code == EXIT_INCOMPLETE and "cap" in err


@pytest.mark.parametrize("argv", [
    ["orbit", "--set", "0,0.5,1"],
    ["orbit"],
    ["census", "--tmax", "12"],
    ["normal-form", "--t", "6"],
    ["limit", "--bundle", "0,y,1"],
    ["variation", "--range", "3:400"],
    ["nosuch"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_normal_form_dump(capsys):
    code, out, _ = run(capsys, "normal-form", "--t", "55", "--dump-orbit")
    assert code == EXIT_OK
    assert "57,3025/4," in out


def test_census_json(capsys):
    code, out, _ = run(capsys, "census", "--tmax", "13", "--format", "json")
    d = json.loads(out)
    assert d["sets"]["9"] == ["7/12"]
    assert d["sets"]["11"] == ["9/16", "17/27"]
    assert d["sets"]["13"] == ["29/54", "67/116", "45/76", "19/31", "7/11"]


def test_bundle_run_round_trips(capsys):
    code, out, _ = run(capsys, "bundle-run", "--bundle", "0,x,1", "--interval", "1/2,2/3", "--n", "6",
                       "--format", "json")
    d = json.loads(out)
    fs = [PiecewiseAffine.from_dict(f) for f in d["functions"]]
    assert [f.to_dict() for f in fs] == d["functions"] and len(fs) == 6


def test_outputs_are_deterministic(tmp_path, capsys):
    paths = []
    for k in range(2):
        p = tmp_path / f"lim{k}.csv"
        assert main(["limit", "--bundle", "0x11", "--output", str(p)]) == EXIT_OK
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    manifest = json.loads((tmp_path / "lim0.csv.manifest.json").read_text())
    assert manifest["config"]["command"] == "limit" and "gmpy2" in manifest["libraries"]


def test_workers_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MEANMEDIAN_WORKERS", "3")
    p = tmp_path / "o.csv"
    main(["orbit", "--set", "0,1/3,1", "--output", str(p)])
    m = json.loads((tmp_path / "o.csv.manifest.json").read_text())
    assert m["config"]["parallelism"] == 3
    main(["orbit", "--set", "0,1/3,1", "--output", str(p), "--workers", "1"])
    m = json.loads((tmp_path / "o.csv.manifest.json").read_text())
    assert m["config"]["parallelism"] == 1
