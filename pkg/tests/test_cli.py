import json
import subprocess
import sys
from fractions import Fraction

import jsonschema
import numpy as np
import pytest

from pfaffpart.chains import chain_builtin
from pfaffpart.cli import SUBCOMMANDS, load_schema, main
from pfaffpart.pfaffian import ParametricCurve, PfaffianFunction
from pfaffpart.poly import MultiPoly


def run(tmp_path, sub, doc, *flags):
    src = tmp_path / f"{sub}.json"
    out = tmp_path / f"{sub}.out"
    src.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    code = main([sub, "--input", str(src), "--output", str(out), *flags])
    text = out.read_text() if out.exists() else ""
    return code, text


def report(text):
    rep = json.loads(text)
    jsonschema.validate(rep, load_schema("report"))
    return rep


def points(n, seed):
    rng = np.random.default_rng(seed)
    return [[str(Fraction(int(a), 2**16)), str(Fraction(int(b), 2**16))] for a, b in rng.integers(0, 2**16, (n, 2))]


def test_bounds_example(tmp_path):
    code, text = run(tmp_path, "bounds", {"bound": "khovanskii", "query": {"n": 2, "r": 0, "betas": [2, 3]}})
    assert code == 0
    assert report(text)["result"]["results"][0]["value"] == "6"


def test_malformed_json(tmp_path, capsys):
    code, _ = run(tmp_path, "bounds", "{not json")
    assert code == 2
    assert "JSON parse error" in capsys.readouterr().err


def test_schema_violation(tmp_path, capsys):
    code, _ = run(tmp_path, "partition", {"collections": [[["0", "1"]]]})
    assert code == 2
    assert "schema" in capsys.readouterr().err


def test_unknown_bound_field(tmp_path):
    code, _ = run(tmp_path, "bounds", {"bound": "khovanskii", "query": {"n": 1, "betas": [1], "junk": 3}})
    assert code == 2


def test_partition_1024(tmp_path):
    code, text = run(tmp_path, "partition", {"collections": [points(1024, 1)], "D": 10})
    assert code == 0
    res = report(text)["result"]
    assert len(res["cells"]) == 8
    assert res["table"][0]["max_load"] <= 256


def test_partition_svg(tmp_path):
    code, text = run(tmp_path, "partition", {"collections": [points(64, 2)], "D": 4}, "--format", "svg")
    assert code == 0
    assert text.startswith("<svg") and 'width="512"' in text


def test_svg_refused_elsewhere(tmp_path):
    code, _ = run(tmp_path, "bounds", {"bound": "khovanskii", "query": {"n": 1, "betas": [1]}}, "--format", "svg")
    assert code == 2


def test_roots_and_components(tmp_path):
    c = chain_builtin("exp", [1])
    t, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    code, text = run(tmp_path, "roots", {"function": PfaffianFunction(c, y - 2).to_json(), "domain": ["-2", "2"]})
    assert code == 0
    res = report(text)["result"]
    assert res["count"] == 1 and res["khovanskii_bound"] == "2"
    gamma = ParametricCurve.from_polys(c, [t, y], (-2, 2))
    code, text = run(tmp_path, "components", {"P": (t * t - 1).to_json(), "curve": gamma.to_json()})
    assert code == 0 and report(text)["result"]["count"] == 3


def test_roots_budget_exhaustion(tmp_path):
    c = chain_builtin("exp", [1])
    t, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    Q = (t - Fraction(1, 7)) * (t - Fraction(2, 7)) * (t - Fraction(3, 7)) * y
    code, text = run(tmp_path, "roots", {"function": PfaffianFunction(c, Q).to_json(), "domain": ["-1", "1"]},
                     "--budget", "2")
    assert code == 3
    assert report(text)["result"]["complete"] is False


def test_solve2d(tmp_path):
    c = chain_builtin("empty", n=2)
    x, y = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    doc = {"f1": PfaffianFunction(c, x * x + y * y - 1).to_json(), "f2": PfaffianFunction(c, y - x).to_json(),
           "box": [["-1", "1"], ["-1", "1"]]}
    code, text = run(tmp_path, "solve2d", doc)
    assert code == 0 and report(text)["result"]["count"] == 2


def test_pfaffian_partition(tmp_path):
    doc = {"collections": [[[str(Fraction(i, 3))] for i in range(-4, 4)]], "D": 4,
           "chain": chain_builtin("exp", [1]).to_json()}
    code, text = run(tmp_path, "pfaffian-partition", doc)
    assert code == 0
    assert report(text)["result"]["schedule"]["s"] == 2


def test_incidence_generator_and_experiment(tmp_path):
    code, text = run(tmp_path, "incidence", {"generator": "line_grid", "params": {"k": 2}})
    assert code == 0 and report(text)["result"]["count"] == 16
    exp = {"experiment": {"generator": "line_grid", "bound": "st_plane", "ladder": [2, 3, 4]}}
    code, text = run(tmp_path, "incidence", exp, "--format", "csv")
    assert code == 0
    header = text.splitlines()[0].split(",")
    assert header == ["generator", "n", "r", "s", "t", "size", "points", "curves", "measured", "bound_at_C1",
                      "ratio", "fitted_exponent"]


def test_joints_and_refusal(tmp_path):
    code, text = run(tmp_path, "joints", {"generator": "axis_grid", "params": {"k": 2}})
    assert code == 0 and report(text)["result"]["count"] == 8
    code, _ = run(tmp_path, "joints", {"experiment": {"generator": "axis_grid", "bound": "kst", "ladder": [2]}})
    assert code == 2


def test_deterministic_payload(tmp_path):
    doc = {"collections": [points(300, 3)], "D": 8}
    a = report(run(tmp_path, "partition", doc, "--seed", "7")[1])
    b = report(run(tmp_path, "partition", doc, "--seed", "7")[1])
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


def test_precision_flag(tmp_path):
    doc = {"bound": "khovanskii", "query": {"n": 1, "betas": [1]}}
    assert run(tmp_path, "bounds", doc, "--precision", "128")[0] == 0
    assert run(tmp_path, "bounds", doc, "--precision", "4")[0] == 2
    from pfaffpart.interval import set_precision
    set_precision(53)


def test_every_subcommand_has_schema():
    for sub in SUBCOMMANDS:
        jsonschema.Draft202012Validator.check_schema(load_schema(sub))


def test_console_entry_point(tmp_path):
    src = tmp_path / "b.json"
    src.write_text(json.dumps({"bound": "kst", "query": {"s": 2, "t": 2, "cardinalities": [100, 100]}}))
    proc = subprocess.run([sys.executable, "-m", "pfaffpart.cli", "bounds", "-i", str(src)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["results"][0]["value"] == "1100"


@pytest.mark.parametrize("seed", ["-1", str(2**64)])
def test_seed_range(tmp_path, seed):
    doc = {"bound": "khovanskii", "query": {"n": 1, "betas": [1]}}
    assert run(tmp_path, "bounds", doc, "--seed", seed)[0] == 2
