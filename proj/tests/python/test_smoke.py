import math

import pytest

import finsler_lab as fl


def test_builtins_listed():
    names = fl.builtin_names()
    assert "randers-radial" in names and "thm-berwald" in names


def test_randers_value():
    inst = fl.builtin("randers-radial")
    assert inst.dim == 2
    # alpha = |y|, beta = 0.1 x.y
    assert inst.F([1.0, 0.5], [0.3, -0.4]) == pytest.approx(0.5 + 0.1 * (0.3 - 0.2), rel=1e-14)


def test_spray_methods_agree():
    inst = fl.builtin("thm-randers")
    x, y = [0.8, 1.1, 0.9], [0.3, -0.7, 1.2]
    g = inst.spray(x, y, "general")
    d = inst.spray(x, y, "definitional")
    c = inst.spray(x, y, "conformal")
    assert max(abs(a - b) for a, b in zip(g, d)) < 1e-10
    assert max(abs(a - b) for a, b in zip(g, c)) < 1e-10


def test_berwald_closed_form_matches_oracle():
    inst = fl.builtin("randers-radial-3d")
    x, y = [0.8, 1.1, 0.9], [0.3, -0.7, 1.2]
    a = inst.berwald(x, y, "oracle")
    b = inst.berwald(x, y, "closed-form")
    flat = lambda t: [v for p in t for q in p for r in q for v in r]
    assert max(abs(u - v) for u, v in zip(flat(a), flat(b))) < 1e-9


def test_verify_report():
    rep = fl.verify("builtin:thm-randers", samples=10, seed=7)
    assert rep["all_pass"]
    assert [c["name"] for c in rep["checks"]] == fl.check_names()
    assert "timing" not in rep


def test_verify_detects_non_isotropic():
    rep = fl.verify("builtin:randers-radial", checks=["isotropic"], samples=10)
    assert not rep["all_pass"]


def test_family_and_regularity():
    spec = fl.family("thm-riemannian", {"t3": 1 / math.sqrt(2), "t1": 0, "sigma": 2})
    assert fl.regularity(spec, 0.6)["pass"]
    r = fl.regularity({"dim": 3,
                       "alpha": {"family": "euclidean", "params": {}},
                       "beta": {"family": "radial", "params": {"c": 0.1}},
                       "phi": {"family": "expr", "params": {"expr": {"op": "add", "args": [1, "s"]}}}}, 1.2)
    assert not r["pass"] and r["violation_count"] > 0


def test_sweep():
    v = fl.sweep("builtin:randers-radial", "phi", [0.25, 0.25], [0.1, -0.2])
    assert v == pytest.approx([1.1, 0.8])


def test_input_error():
    with pytest.raises(fl.InputError):
        fl.load('{"dim": 7}')
    with pytest.raises(fl.InputError):
        fl.load("{not json")
