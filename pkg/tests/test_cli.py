import json
from fractions import Fraction

import pytest
import tomli
from hypothesis import given, strategies as st

from stablered.cli import main
from stablered.errors import ParseError
from stablered.numfield import make_field
from stablered.parsing import parse_poly
from stablered.pipeline import JobSpec, run


def job(text, p=2, e=1, **kw):
    return JobSpec(p=p, e=e, text=text, **kw)


def test_parse_poly_examples():
    K = make_field(2, 1)
    f = parse_poly("1 + X^4 + X^5", K)
    assert [c.rational() for c in f.coeffs] == [1, 0, 0, 0, 1, 1]
    K15 = make_field(2, 15)
    g = parse_poly("1 + pi^9*X^2 + pi^18*X^3 + X^5", K15)
    assert g[2] ** 5 == K15(8) and g[3] ** 5 == K15(2) ** 6
    assert g[2].valuation() == Fraction(3, 5)
    with pytest.raises(ParseError) as info:
        parse_poly("1 + q*X", K)
    assert info.value.position == 4


def test_parse_poly_grammar():
    K = make_field(3, 2, [1, 0, 1])
    f = parse_poly(" 2/3 * pi^2*u*X^2 - u^2 + X ", K)
    assert f[2] == K(Fraction(2, 3)) * K.pi() ** 2 * K.u()
    assert f[0] == -(K.u() ** 2) and f[1] == K.one()


def test_run_hand_fixture():
    rep = run(job("1 + X^3"))
    assert rep.exit_code == 0
    d = rep.data
    assert d["genus"] == "1/1" and len(d["components"]) == 1
    assert d["components"][0]["radius_valuation"] == "2/3"
    assert d["monodromy_bound"]["degree_bound"] == 18
    assert d["reduction_type"] is None


def test_run_elli_c():
    rep = run(job("1 + X^4 + X^5"))
    assert rep.exit_code == 0
    assert rep.data["reduction_type"] == 3
    assert [c["genus"] for c in rep.data["components"]] == ["2/1"]


def test_run_rejects_square():
    rep = run(job("X^2"))
    assert rep.exit_code == 1
    assert rep.error["type"] == "MultiplicityDivisibleByP" and rep.error["stage"] == "validate"


def test_run_internal_failure_has_exit_2():
    rep = run(job("1 + X^3", max_extension=1))
    assert rep.exit_code == 2
    assert rep.error["type"] == "EscalationLimit" and rep.error["stage"] == "roots"


def test_run_reports_parse_errors_as_rejections():
    rep = run(job("1 + q*X"))
    assert rep.exit_code == 1 and rep.error["stage"] == "parse"


def test_every_number_is_an_exact_string():
    data = run(job("1 + X^3")).to_dict(timing=False)

    def walk(x, key=None):
        if isinstance(x, dict):
            for k, v in x.items():
                walk(v, k)
        elif isinstance(x, list):
            for v in x:
                walk(v, key)
        elif isinstance(x, float):
            raise AssertionError(f"float under {key}")
    walk(data)


def test_report_deterministic_and_round_trips(monkeypatch):
    a = run(job("1 + X^3", fixtures=True)).dumps(timing=False)
    monkeypatch.setenv("STABLERED_THREADS", "3")
    b = run(job("1 + X^3", fixtures=True)).dumps(timing=False)
    assert a == b
    assert json.dumps(json.loads(a), indent=2, sort_keys=True) + "\n" == a


def test_job_round_trip_json_and_toml():
    j = JobSpec(p=3, e=4, text="1 + pi^3*X^3 + X^4", precision_cap=Fraction(1024, 3),
                max_extension=64, report_path="out.json", dot_path="t.dot", outputs=("report", "dot"),
                fixtures=True)
    assert JobSpec.loads(j.dumps()).dumps() == j.dumps()
    assert JobSpec.loads(j.to_toml(), "toml") == j
    assert JobSpec.loads(j.to_toml(), "toml").to_toml() == j.to_toml()
    assert tomli.loads(j.to_toml())["field"] == {"p": 3, "e": 4, "residue_modulus": [0, 1]}


def test_coefficient_list_input_matches_text():
    K = make_field(2, 15)
    f = parse_poly("1 + pi^9*X^2 + X^3 + pi^6*X^4 + X^5", K)
    j = JobSpec(p=2, e=15, coeffs=f.to_json())
    assert j.polynomial() == f
    assert JobSpec.loads(j.dumps()) == j
    with pytest.raises(ParseError):
        JobSpec(p=2, e=15, coeffs=f.to_json(), text="1 + X^5").polynomial()


fractions = st.fractions(min_value=-50, max_value=50, max_denominator=30)


@given(st.lists(fractions, min_size=1, max_size=6), st.sampled_from([1, 2, 3]),
       st.booleans(), st.none() | st.integers(1, 999))
def test_job_round_trip_property(cs, e, fixtures, max_ext):
    coeffs = [[[f"{c.numerator}/{c.denominator}"] + ["0/1"] * (e - 1)] for c in cs]
    j = JobSpec(p=5, e=e, coeffs=coeffs, fixtures=fixtures, max_extension=max_ext)
    assert JobSpec.loads(j.dumps()) == j
    assert JobSpec.loads(j.to_toml(), "toml") == j


def test_cli_writes_report_and_dot(tmp_path, capsys):
    path = tmp_path / "job.toml"
    path.write_text('[field]\np = 2\n\n[polynomial]\ntext = "1 + X^3"\n')
    out, dot = tmp_path / "r.json", tmp_path / "t.dot"
    code = main(["--input", str(path), "--out", str(out), "--dot", str(dot), "--no-timing"])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["status"] == "ok" and data["exit_code"] == 0
    assert "g=1 d=2/3" in dot.read_text()


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"field": {"p": 2}, "polynomial": {"text": "X^2"}}))
    assert main(["--input", str(bad)]) == 1
    assert "MultiplicityDivisibleByP" in capsys.readouterr().err
    assert main(["--input", str(bad).replace("bad", "missing")]) == 1
    hard = tmp_path / "hard.json"
    hard.write_text(json.dumps({"field": {"p": 2}, "polynomial": {"text": "1 + X^3"}}))
    assert main(["--input", str(hard), "--max-extension", "1"]) == 2
