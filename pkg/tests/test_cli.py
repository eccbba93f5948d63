import io
import json

import pytest

from dzkdv.cli import main
from dzkdv.exact import Rational
from dzkdv.loop import kdv_free_energies


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_kdv_genus_one():
    code, text = run("kdv", "--genus", "1")
    assert code == 0 and text.splitlines()[0] == "1/24 * log(v[1,1])"


def test_kdv_latex():
    code, text = run("kdv", "--genus", "2", "--format", "latex")
    assert code == 0
    assert text.strip() == (
        "\\frac{(v^{1,2})^{3}}{360(v^{1,1})^{4}} - \\frac{7v^{1,2}v^{1,3}}{1920(v^{1,1})^{3}}"
        " + \\frac{v^{1,4}}{1152(v^{1,1})^{2}}"
    )


@pytest.mark.parametrize("g", [1, 2, 3])
def test_kdv_json_round_trip(g):
    code, text = run("kdv", "--genus", str(g), "--format", "json")
    data = json.loads(text)
    assert code == 0 and data["genus"] == g
    table = {tuple(t["partition"]): Rational(t["coefficient"]) for t in data["terms"]}
    assert table == {tuple(k): c for k, c in kdv_free_energies(g)[g].coeffs.items()}


@pytest.mark.parametrize("g", ["0", "5"])
def test_kdv_out_of_range(g):
    assert run("kdv", "--genus", g)[0] == 2


def test_kdv_output_is_deterministic():
    assert run("kdv", "--genus", "3") == run("kdv", "--genus", "3")


def test_intersect():
    assert run("intersect", "--genus", "2", "--ks", "4") == (0, "1/1152\n")
    assert run("intersect", "--genus", "2", "--ks", "2,3")[1] == "29/5760\n"
    assert run("intersect", "--genus", "0", "--ks", "0,0")[0] == 2
    assert run("intersect", "--genus", "1", "--ks", "x")[0] == 2


def test_intersect_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("DZKDV_CACHE_DIR", str(tmp_path))
    assert run("intersect", "--genus", "3", "--ks", "7")[1] == "1/82944\n"
    lines = (tmp_path / "intersections.txt").read_text().splitlines()
    assert "3 7 1/82944" in lines


def test_trees_two_legs():
    code, text = run("trees", "--n", "2", "--chi", "4", "--format", "json")
    data = json.loads(text)
    assert code == 0 and len(data["trees"]) == 2
    coeffs = sorted(Rational(q["coefficient"]) for t in data["trees"] for q in t["assignments"])
    assert coeffs == [-6, 1]


def test_trees_bad_input():
    assert run("trees", "--n", "2", "--chi", "4", "--a", "1,1")[0] == 2


def test_correlator():
    code, text = run("correlator", "--model", "a2.frob", "--insertions", "1,0;1,0;1,0")
    assert code == 0 and text == "v[2,1]\n"
    assert run("correlator", "--model", "point", "--insertions", "1,0;1,0;1,0;1,0")[1] == "v[1,2]\n"
    assert run("correlator", "--insertions", "1,0;1")[0] == 2


def test_verify_missing_model():
    assert run("verify", "--model", "missing.frob")[0] == 2


def test_verify_bad_model_file(tmp_path):
    bad = tmp_path / "bad.frob"
    bad.write_text("N = 2\nF = v1^2*v2^2\n")
    code, _ = run("verify", "--model", str(bad))
    assert code == 2


def test_verify_genus1_a2():
    code, text = run("verify", "--genus1", "--model", "a2.frob")
    assert code == 0 and text.strip().endswith("10/10 identities hold")


def test_verify_reports_failure(tmp_path, monkeypatch):
    import dzkdv.cli as cli
    from dzkdv.identities import IdentityReport
    from dzkdv.diffpoly import v

    monkeypatch.setattr(cli, "check_genus1", lambda m, a, p: IdentityReport("genus1", {"p": p}, v(1, 1), v(1, 2)))
    code, text = run("verify", "--genus1", "--model", "point")
    assert code == 1 and "witness" in text


def test_verify_json():
    code, text = run("verify", "--aop", "--max-genus", "2", "--format", "json")
    data = json.loads(text)
    assert code == 0 and all(r["equal"] for r in data)
    assert {r["name"] for r in data} == {"aop_single", "a21"}


def test_bad_arguments():
    assert run("nope")[0] == 2
    assert run("kdv")[0] == 2
