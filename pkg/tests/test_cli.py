import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from picard_cycles import big_pairing as bp
from picard_cycles.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_OK, config_hash, main, read_config
from picard_cycles.qexp import QExpansion


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


def test_series_first_coefficient(tmp_path):
    code, rep = run(tmp_path, "series", "--D", "7", "--terms", "1")
    assert code == EXIT_OK
    assert dict((n, Fraction(c)) for n, c in rep["result"]["series"]["coeffs"])[1] == 14
    assert rep["schema"] == "picard-cycles/report/1"


def test_series_spec_flag_spelling(tmp_path):
    code, rep = run(tmp_path, "series", "--D", "7", "--weight-k", "0", "--n0", "1", "--hsigma", "1",
                    "--const", "0", "--terms", "200")
    assert code == EXIT_OK
    f = QExpansion.from_json(rep["result"]["series"])
    assert f.trunc == 200 and f[1] == 14 and f[0] == 0


@pytest.mark.parametrize("argv", [
    ["series", "--D", "12", "--terms", "5"],
    ["series", "--D", "7", "--terms", "0"],
    ["hida", "--D", "7", "--p", "3", "--specialize", "3"],
    ["hida", "--congruence", "--k", "3", "--kprime", "4", "--m", "1"],
    ["hida"],
    ["bigpair", "--model", "trivial", "--R", "2", "--specialize", "k=1,r=5"],
    ["levels", "--r", "0"],
])
def test_config_errors_exit_2(tmp_path, argv):
    code, _ = run(tmp_path, *argv)
    assert code == EXIT_CONFIG


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# series run\nD = 7\nterms = 3\nweight-k = 1\n")
    assert read_config(str(cfg)) == {"D": "7", "terms": "3", "weight_k": "1"}
    code, rep = run(tmp_path, "series", "--config", str(cfg))
    assert code == EXIT_OK
    assert rep["config"]["terms"] == 3 and rep["result"]["series"]["weight"] == 5
    code, rep = run(tmp_path, "series", "--config", str(cfg), "--terms", "4", name="b.json")
    assert rep["config"]["terms"] == 4
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus = 1\n")
    assert run(tmp_path, "series", "--config", str(bad), name="c.json")[0] == EXIT_CONFIG
    assert run(tmp_path, "series", "--config", str(tmp_path / "missing.cfg"), name="d.json")[0] == EXIT_CONFIG


def test_outdir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("PICARD_CYCLES_OUTDIR", str(tmp_path / "reports"))
    assert main(["lattice", "--D", "7", "--terms", "6"]) == EXIT_OK
    rep = json.loads((tmp_path / "reports" / "lattice.json").read_text())
    assert rep["result"]["counts"] == [1, 2, 4, 0, 6, 0, 0]


def test_reports_are_deterministic(tmp_path):
    _, a = run(tmp_path, "levels", "--p", "3", "--r", "1", "--samples", "300", "--seed", "7", name="a.json")
    _, b = run(tmp_path, "levels", "--p", "3", "--r", "1", "--samples", "300", "--seed", "7", name="b.json")
    assert a == b
    assert a["config_hash"] == config_hash(a["config"])
    _, c = run(tmp_path, "levels", "--p", "3", "--r", "1", "--samples", "300", "--seed", "8", name="c.json")
    assert c["config_hash"] != a["config_hash"]


def test_levels_example(tmp_path):
    code, rep = run(tmp_path, "levels", "--p", "3", "--r", "2", "--verify", "all", "--samples", "10000",
                    "--seed", "7")
    assert code == EXIT_OK and rep["status"] == "pass"
    assert all(v["pass"] for v in rep["result"]["gamma"]["items"].values())


def test_levels_member(tmp_path):
    code, rep = run(tmp_path, "levels", "--p", "3", "--r", "1", "--verify", "none",
                    "--member", "[[1,0,9],[0,4,0],[0,0,1]]")
    assert code == EXIT_OK
    assert rep["result"]["membership"]["K"] and not rep["result"]["membership"]["K1"]


def test_levels_normality_reports_failure(tmp_path):
    code, rep = run(tmp_path, "levels", "--p", "3", "--r", "1", "--verify", "normality", "--samples", "200")
    assert code == EXIT_FAIL and rep["status"] == "fail"


@pytest.mark.parametrize("target", ["gamma-lemma", "lemma46", "inclusions", "projector", "hida-congruence"])
def test_verify_targets(tmp_path, target):
    code, rep = run(tmp_path, "verify", "--target", target, "--p", "3", "--r", "2", "--samples", "2000",
                    "--instances", "30", "--D", "2")
    assert code == EXIT_OK, rep
    assert rep["result"][target]["pass"]


def test_verify_lemma46_identity_only(tmp_path):
    code, rep = run(tmp_path, "verify", "--target", "lemma46", "--p", "3")
    assert code == EXIT_OK
    for run_ in rep["result"]["lemma46"]["runs"]:
        assert run_["solutions"] == [[1, 0, 1]]


def test_verify_pairing_diagram(tmp_path):
    code, rep = run(tmp_path, "verify", "--target", "pairing-diagram", "--instances", "100")
    assert code == EXIT_OK
    assert rep["result"]["pairing-diagram"]["passed"] == 100


def test_hida_examples(tmp_path):
    code, rep = run(tmp_path, "hida", "--family", "eisenstein", "--D", "7", "--p", "11", "--specialize", "3")
    assert code == EXIT_OK and rep["result"]["matches_eisenstein3_p_deprived"]
    code, rep = run(tmp_path, "hida", "--congruence", "--k", "3", "--kprime", "113", "--m", "1", name="b.json")
    assert code == EXIT_OK and rep["result"]["congruence"]["pass"]
    code, rep = run(tmp_path, "hida", "--check-congruence", "--k", "3", "--kprime", "113", "--m", "2",
                    name="c.json")
    assert code == EXIT_CONFIG


def test_hida_project(tmp_path):
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"schema": "picard-cycles/up-model/1", "p": 5, "M": 4,
                                 "matrix": [[2, 1], [0, 10]], "basis": ["a", "b"]}))
    code, rep = run(tmp_path, "hida", "--project", str(model))
    assert code == EXIT_OK
    pr = rep["result"]["projector"]
    assert pr["idempotent"] and pr["commutes"] and pr["rank_mod_p"] == 1
    model.write_text("{}")
    assert run(tmp_path, "hida", "--project", str(model), name="b.json")[0] == EXIT_CONFIG


def test_bigpair_files(tmp_path):
    T = bp.regular_tower(3, 8, 3, seed=1)
    rng = np.random.default_rng(1)
    top = T.level(3).rank
    xis = {n: bp.build_tower_from_top(T, rng.integers(0, T.modulus, top)) for n in range(1, 11)}
    zeta = bp.build_tower_from_top(T, rng.integers(0, T.modulus, top))
    (tmp_path / "ctx.json").write_text(json.dumps(T.to_json()))
    (tmp_path / "xis.json").write_text(json.dumps({"classes": {str(n): b.to_json() for n, b in xis.items()}}))
    (tmp_path / "zeta.json").write_text(json.dumps(zeta.to_json()))
    code, rep = run(tmp_path, "bigpair", "--context", str(tmp_path / "ctx.json"), "--xis", str(tmp_path / "xis.json"),
                    "--zeta", str(tmp_path / "zeta.json"), "--terms", "10", "--specialize", "k=1,r=2")
    assert code == EXIT_OK and rep["result"]["incoherent"] == []
    phi = bp.LambdaExpansion.from_json(rep["result"]["phi"])
    direct = bp.phi_expansion(T, xis, zeta, 10)
    assert all(phi.coeffs[r][n] == direct.coeffs[r][n] for r in (1, 2, 3) for n in range(11))
    nu = QExpansion.from_json(rep["result"]["specialization"])
    assert nu == bp.nu_specialize(direct, 1, 2)


def test_bigpair_bind(tmp_path):
    code, rep = run(tmp_path, "bigpair", "--bind-D", "7", "--p", "11", "--R", "2", "--terms", "20",
                    "--specialize", "k=0,r=1")
    assert code == EXIT_OK
    nu = QExpansion.from_json(rep["result"]["specialization"])
    assert nu[1] == 14


def test_lattice(tmp_path):
    code, rep = run(tmp_path, "lattice", "--D", "7")
    assert code == EXIT_OK and rep["result"]["rank_one_form"]["q"] == ["1/1", "1/1", "2/1"]


def test_json_roundtrip_canonical(tmp_path):
    _, rep = run(tmp_path, "series", "--D", "3", "--terms", "30")
    f = QExpansion.from_json(rep["result"]["series"])
    assert f.to_json() == rep["result"]["series"]


def test_series_check_inconclusive_with_tiny_truncation(tmp_path):
    code, rep = run(tmp_path, "series", "--D", "7", "--terms", "5", "--check", "--samples", "20")
    assert code == EXIT_INCONCLUSIVE and rep["status"] == "inconclusive"


@pytest.mark.xfail(strict=True, reason="the cusp series is only quasi-modular; defect is O(1), not < 1e-8")
def test_series_check_example(tmp_path):
    code, rep = run(tmp_path, "series", "--D", "7", "--terms", "400", "--check")
    assert code == EXIT_OK and rep["result"]["modularity"]["max_defect"] < 1e-8


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "picard_cycles.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "picard-cycles" in out.stdout
