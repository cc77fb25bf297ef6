import csv
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpl import FdAlgebra
from fpl.cli.config import ConfigError, ExperimentConfig
from fpl.cli.main import main
from fpl.cli.parse import ParseError, format_ncpoly, parse_ncpoly
from fpl.freeprod import HaarUnitary, Letter, NcPoly, evaluate_moment, letter

C2 = FdAlgebra((1, 1))
GENS = {"u1": Letter(0, 1), "u2": Letter(1, 1), "x": Letter(2, C2.diag([1, -1]))}


# -- parser ---------------------------------------------------------------------------
def test_parse_examples():
    assert parse_ncpoly("u1*", GENS) == letter(0, -1)
    u, v = Letter(0, 1), Letter(1, 1)
    a = parse_ncpoly("(u v u v)", {"u": u, "v": v})
    assert a == NcPoly({(u, v, u, v): 1.0}) and a.degree == 4
    P = parse_ncpoly("2(u1+u1*)^2 - 4", GENS)
    assert len(P.simplify()) == 2
    assert evaluate_moment([HaarUnitary()], P) == 0


def test_parse_scalar_and_adjoint_star():
    assert parse_ncpoly("2*u1", GENS) == letter(0, 1) * 2
    assert parse_ncpoly("2*(u1 u2)", GENS) == letter(0, 1) * letter(1, 1) * 2
    assert parse_ncpoly("(u1 u2)*", GENS) == letter(1, -1) * letter(0, -1)
    assert parse_ncpoly("u1**", GENS) == letter(0, 1)
    assert parse_ncpoly("-u1 + 1.5e0j", GENS) == letter(0, 1) * -1 + NcPoly.constant(1.5j)
    assert parse_ncpoly("u1^0", GENS) == NcPoly.constant(1)


@pytest.mark.parametrize("text,pos", [("u1 + w", 5), ("u1 +", 4), ("(u1", 3), ("u1 $ u2", 3), ("u1^x", 3), ("u1)", 2)])
def test_parse_errors(text, pos):
    with pytest.raises(ParseError) as exc:
        parse_ncpoly(text, GENS)
    assert exc.value.pos == pos


names = st.sampled_from(["u1", "u1*", "u2", "u2*", "x"])
monos = st.lists(names, min_size=0, max_size=4)
coeffs = st.sampled_from([1.0, -1.0, 2.5, -0.5, 1j, 2 - 3j])


@settings(max_examples=100)
@given(st.lists(st.tuples(coeffs, monos), min_size=1, max_size=4))
def test_round_trip(terms):
    P = NcPoly()
    for c, m in terms:
        P = P + parse_ncpoly(" ".join(m) or "1", GENS) * c
    text = format_ncpoly(P, GENS)
    assert parse_ncpoly(text, GENS) == P


# -- configs ------------------------------------------------------------------------------
KESTEN = {
    "schema": "fpl/1", "kind": "freeprod-norm",
    "factors": [{"type": "haar", "name": "u1"}, {"type": "haar", "name": "u2"}],
    "polys": ["u1 + u1* + u2 + u2*"], "sweep": {"L": [2, 4, 6]}, "grading": "weighted", "seed": 0,
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_config_round_trip():
    cfg = ExperimentConfig.from_dict(KESTEN)
    d = cfg.to_dict()
    assert ExperimentConfig.from_dict(d).to_dict() == d
    assert d["tolerances"]["solver_tol"] == 1e-9


@pytest.mark.parametrize("patch", [
    {"schema": "fpl/0"}, {"kind": "nope"}, {"polys": ["u1 + w"]}, {"sweep": {"L": [4, 2]}},
    {"sweep": {"L": []}}, {"grading": "odd"}, {"extra": 1},
    {"factors": [{"type": "haar", "name": "u1"}, {"type": "haar", "name": "u1"}]},
    {"factors": [{"type": "fd", "blocks": [1, 1], "weights": ["1/2"]}]},
])
def test_config_errors(patch):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**KESTEN, **patch})


def test_fd_factor_weights():
    cfg = ExperimentConfig.from_dict({
        "schema": "fpl/1", "kind": "moments", "polys": ["x x"],
        "factors": [{"type": "fd", "blocks": [1, 1], "weights": ["1/3", "2/3"], "generators": {"x": {"diag": [1, -1]}}}],
    })
    factors, gens = cfg.build_factors()
    assert factors[0].trace.fractions() == [Fraction(1, 3), Fraction(2, 3)]
    assert set(gens) == {"x"}


# -- command line -------------------------------------------------------------------------
def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, KESTEN))]) == 0
    assert main(["validate", str(write(tmp_path, {**KESTEN, "polys": ["u3"]}, "bad.json"))]) == 2
    bad = tmp_path / "broken.json"
    bad.write_text("{")
    assert main(["validate", str(bad)]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_run_norm_series(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, KESTEN)), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "ok" and rep["schema"] == "fpl/1"
    item = rep["results"]["norms"][0]
    vals = [r["value"] for r in item["series"]]
    assert item["nondecreasing"] and vals == sorted(vals)
    assert rep["parameters"]["tolerances"]["solver_tol"] == 1e-9
    rows = list(csv.DictReader((out / "series_0.csv").open()))
    assert [int(r["L"]) for r in rows] == [2, 4, 6]
    assert [float(r["value"]) for r in rows] == vals
    assert set(json.loads((out / "timings.json").read_text())) == {"poly_0", "total"}


def test_run_reproducible(tmp_path):
    cfg = write(tmp_path, KESTEN)
    for d in ("a", "b"):
        assert main(["run", str(cfg), "--out", str(tmp_path / d), "--seed", "3"]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_run_budget_exceeded(tmp_path):
    cfg = write(tmp_path, {**KESTEN, "sweep": {"L": [12]}})
    assert main(["run", str(cfg), "--out", str(tmp_path), "--mem-budget", "100000"]) == 3
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["status"] == "budget-exceeded" and "error" in rep


def run_report(tmp_path, cfg):
    assert main(["run", str(write(tmp_path, cfg)), "--out", str(tmp_path)]) == 0
    return json.loads((tmp_path / "report.json").read_text())["results"]


def test_run_moments(tmp_path):
    res = run_report(tmp_path, {"schema": "fpl/1", "kind": "moments",
                                "factors": [{"type": "haar", "name": "u1"}], "polys": ["(u1 + u1*)^2"]})
    assert res["moments"][0]["value"] == [2.0, 0.0]


def test_run_diffuse(tmp_path):
    res = run_report(tmp_path, {"schema": "fpl/1", "kind": "diffuse", "params": {
        "measure": {"atoms": [[0, 1 / 3]], "pieces": [[[1, 2], 2 / 3]]}}})
    assert res["witness"] == [1.0, 2.0]


def test_run_znfn_and_freeness(tmp_path):
    res = run_report(tmp_path, {"schema": "fpl/1", "kind": "znfn", "params": {"n": 2, "K": 2, "L": 2}})
    z = res["znfn"]
    assert z["u_order_residual"] == 0 and z["commutation_residual"] == 0 and z["gram_rank"] == 4
    assert z["claim_max_moment"] <= 1e-10
    fd = {"type": "fd", "blocks": [1, 1], "generators": {"x": {"diag": [1, -1]}}}
    fd2 = {"type": "fd", "blocks": [1, 1], "generators": {"y": {"diag": [1, -1]}}}
    res = run_report(tmp_path, {"schema": "fpl/1", "kind": "freeness", "factors": [fd, fd2],
                                "params": {"families": [["x"], ["y"]], "D": 4}})
    assert res["freeness"]["max_moment"] <= 1e-10


def test_run_gns_and_crossed(tmp_path):
    fd = {"type": "fd", "blocks": [2, 1], "weights": ["1/2", "1/2"]}
    res = run_report(tmp_path, {"schema": "fpl/1", "kind": "gns", "factors": [fd]})
    assert res["factors"][0]["dim"] == 5
    assert max(res["factors"][0]["defects"].values()) <= 1e-9
    res = run_report(tmp_path, {"schema": "fpl/1", "kind": "crossed", "factors": [{"type": "haar", "name": "u"}],
                                "polys": ["v u v* u*", "u v"],
                                "params": {"n": 2, "L": 3, "action": {"haar_phases": {"0": -1}}}})
    c = res["crossed"]
    assert c["covariance_defect"] == 0
    assert c["moments"][0]["value"] == [-1.0, 0.0] and c["moments"][1]["value"] == [0.0, 0.0]
