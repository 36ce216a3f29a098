import io
import json
import math

import numpy as np
import pytest
from hypothesis import given

from smoothdiv import cli
from smoothdiv import divergences as dv
from smoothdiv import matcore as mc
from smoothdiv.errors import DomainError

from conftest import pure_pair, state_pairs

SMALL_VERIFY = ["--dims", "2", "--samples", "2", "--seed", "5", "--eps", "0.2,0.5",
                "--mu", "6", "--alpha", "0.5,2"]


def run(argv):
    buf = io.StringIO()
    code = cli.main(argv, out=buf)
    return code, buf.getvalue()


@pytest.fixture
def pure_files(tmp_path):
    psi, phi = pure_pair(0.9)
    r, s = tmp_path / "rho.json", tmp_path / "sigma.json"
    cli.write_state(r, psi)
    cli.write_state(s, phi)
    return str(r), str(s)


@given(state_pairs(dims=(1, 2, 3, 5)))
def test_state_round_trip_is_exact(pair):
    rho, _ = pair
    back = cli.state_from_dict(json.loads(json.dumps(cli.state_to_dict(rho))))
    assert np.array_equal(back, mc.as_state(rho))


def test_classical_state_file(tmp_path):
    path = tmp_path / "p.json"
    cli.write_state(path, np.diag([0.75, 0.25]))
    obj = json.loads(path.read_text())
    assert obj["kind"] == "classical" and obj["data"] == [0.75, 0.25]
    assert np.array_equal(cli.read_state(path), np.diag([0.75, 0.25]).astype(complex))


@pytest.mark.parametrize("obj, field", [
    ({"kind": "density", "dim": 1, "data": [[[1, 0]]]}, "format_version"),
    ({"format_version": "2", "kind": "density", "dim": 1, "data": [[[1, 0]]]}, "format_version"),
    ({"format_version": "1", "kind": "pure", "dim": 1, "data": [1]}, "kind"),
    ({"format_version": "1", "kind": "classical", "dim": 2, "data": [0.5]}, "data"),
    ({"format_version": "1", "kind": "classical", "dim": 2, "data": [0.5, "x"]}, "data"),
    ({"format_version": "1", "kind": "classical", "dim": 2, "data": [0.5, 0.6]}, "data"),
    ({"format_version": "1", "kind": "density", "dim": 0, "data": []}, "dim"),
])
def test_malformed_state_names_field(obj, field):
    with pytest.raises(cli.ParseError, match=field):
        cli.state_from_dict(obj)


def test_non_state_matrix_is_domain_error():
    obj = {"format_version": "1", "kind": "density", "dim": 2,
           "data": [[[1.2, 0], [0, 0]], [[0, 0], [-0.2, 0]]]}
    with pytest.raises(DomainError):
        cli.state_from_dict(obj)


def test_digest_is_stable():
    rho = mc.sample_state("hs_mixed", 2, 1)
    assert cli.digest(rho) == cli.digest(rho.copy())
    assert cli.digest(rho) != cli.digest(mc.sample_state("hs_mixed", 2, 2))


def test_compute_dh(pure_files):
    r, s = pure_files
    code, text = run(["compute", "dh", "--rho", r, "--sigma", s, "--eps", "0.1"])
    assert code == cli.EXIT_OK
    rep = json.loads(text)
    assert rep["value"] == pytest.approx(-math.log2(0.64), abs=1e-9)
    assert rep["parameters"] == {"eps": 0.1}
    assert set(rep["inputs"]) == {"rho", "sigma"}
    assert rep["residuals"]["dual_gap"] <= 1e-12


@pytest.mark.parametrize("name, extra, expected", [
    ("umegaki", [], None),
    ("dtilde", ["--eps", "0.2"], math.log2(1.6)),
    ("dtilde", ["--eps", "0.05"], "inf"),
    ("hockey", ["--lam", "1"], math.sqrt(0.1)),
    ("renyi", ["--alpha", "0.5", "--family", "sandwiched"], None),
    ("smooth", ["--eps", "0.3", "--metric", "purified"], None),
])
def test_compute_variants(pure_files, name, extra, expected):
    r, s = pure_files
    code, text = run(["compute", name, "--rho", r, "--sigma", s] + extra)
    assert code == cli.EXIT_OK
    value = json.loads(text)["value"]
    if expected == "inf":
        assert value == "inf"
    elif expected is not None:
        assert value == pytest.approx(expected, abs=1e-9)


def test_compute_matches_library(tmp_path):
    rho, sigma = mc.sample_state("hs_mixed", 3, 1), mc.sample_state("hs_mixed", 3, 2)
    r, s = tmp_path / "r.json", tmp_path / "s.json"
    cli.write_state(r, rho)
    cli.write_state(s, sigma)
    code, text = run(["compute", "dspec", "--rho", str(r), "--sigma", str(s), "--eps", "0.3"])
    assert code == 0
    assert json.loads(text)["value"] == dv.dspec(rho, sigma, 0.3)


def test_exit_codes(pure_files, tmp_path):
    r, s = pure_files
    assert run(["compute", "dh", "--rho", str(tmp_path / "missing.json"), "--sigma", s,
                "--eps", "0.1"])[0] == cli.EXIT_PARSE
    assert run(["compute", "dh", "--rho", r, "--sigma", s, "--eps", "abc"])[0] == cli.EXIT_PARSE
    assert run(["compute", "nonsense", "--rho", r, "--sigma", s])[0] == cli.EXIT_PARSE
    assert run(["compute", "dh", "--rho", r, "--sigma", s, "--eps", "1.5"])[0] == cli.EXIT_DOMAIN
    assert run(["compute", "renyi", "--rho", r, "--sigma", s, "--alpha", "1"])[0] == cli.EXIT_DOMAIN
    assert run(["compute", "dh", "--rho", r, "--sigma", s])[0] == cli.EXIT_PARSE
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["compute", "dmax", "--rho", str(bad), "--sigma", s])[0] == cli.EXIT_PARSE


def test_verify_report_and_config_rerun(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _ = run(["verify", "equivalence", "--out", str(out), "--witnesses"] + SMALL_VERIFY)
    assert code == cli.EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["passed"] and set(rep["suites"]) == {"equivalence"}
    run_cfg = rep["config"]["run"]
    assert run_cfg["seed"] == 5 and run_cfg["dims"] == [2]
    assert "equivalence: PASS" in capsys.readouterr().err
    witnesses = [r["witness"] for r in rep["suites"]["equivalence"]["relations"].values()]
    assert any("rho" in w for w in witnesses if w)
    again = tmp_path / "again.json"
    code, _ = run(["verify", "--config", str(out), "--out", str(again)])
    assert code == cli.EXIT_OK
    assert json.loads(again.read_text())["suites"] == rep["suites"]


def test_verify_user_pair(pure_files):
    r, s = pure_files
    code, text = run(["verify", "frenkel", "--rho", r, "--sigma", s])
    # pure pair with distinct supports: both sides infinite
    assert code == cli.EXIT_OK
    assert json.loads(text)["suites"]["frenkel"]["passed"]


def test_verify_argument_errors(pure_files):
    r, _ = pure_files
    assert run(["verify", "equivalence", "--rho", r])[0] == cli.EXIT_PARSE
    assert run(["verify", "equivalence", "--dims", "40"])[0] == cli.EXIT_PARSE
    assert run(["verify", "equivalence", "--alpha", "0.5"])[0] == cli.EXIT_PARSE
    assert run(["verify", "equivalence", "--eps", "0,0.5", "--dims", "2"])[0] == cli.EXIT_DOMAIN
    assert run(["verify", "bogus"])[0] == cli.EXIT_PARSE


def test_sweep_is_deterministic():
    argv = ["sweep", "dh", "--ensemble", "hs_mixed", "--dims", "2", "--samples", "3",
            "--seed", "9", "--eps", "0.1,0.4"]
    code, a = run(argv)
    assert code == 0
    assert a == run(argv)[1]
    lines = a.strip().splitlines()
    assert lines[0] == "seed,dim,eps,value,method,residual"
    assert len(lines) == 1 + 3 * 2


def test_sweep_unknown_ensemble():
    assert run(["sweep", "dh", "--ensemble", "wishart", "--eps", "0.1"])[0] == cli.EXIT_PARSE
