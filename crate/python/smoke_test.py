"""Smoke test for the pydispersed extension.

Build first:  pip install --no-build-isolation -e crates/py
Run:          python3 python/smoke_test.py   (or pytest python/)
"""
import json
import math

import pydispersed as d


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def test_hash_seed():
    assert d.hash_seed(0, "alpha") == 0.07159092162010494
    assert d.hash_seed(42, "key-17") == 0.6999654114328461
    assert d.hash_seed(7, "") == 0.13785133084740098


def test_uniform_coefficients():
    p = 0.5
    a = d.coeff_max_l_uniform(2, p)
    assert close(a[0], 1 / (p * p * (2 - p)))
    assert close(a[1], -(1 - p) / (p * p * (2 - p)))


def test_max_l_unbiased():
    spec = d.SamplingSpec.oblivious([0.4, 0.7])
    for v in ([3.0, 1.0], [0.0, 2.0], [5.0, 5.0]):
        mean, var = d.moments(lambda o: d.est_max_l(o, [0.4, 0.7]), spec, v)
        assert close(mean, max(v), 1e-10)
        assert close(var, d.variance(v, [0.4, 0.7], "max_l"), 1e-9)


def test_weighted_l_unbiased():
    spec = d.SamplingSpec.pps([2.0, 3.0])
    v = [0.8, 0.3]
    mean, var = d.moments(lambda o: d.est_max_l_ws(o, [2.0, 3.0]), spec, v)
    assert close(mean, 0.8, 1e-8)
    assert var <= d.variance_ws(v, [2.0, 3.0], "ht") + 1e-9


def test_sample_and_estimate():
    o = d.sample([2.0, 0.0], d.SamplingSpec.oblivious([0.5, 0.5]), [0.1, 0.9])
    assert o.values == [2.0, None]
    assert close(d.est_ht(o, [0.5, 0.5]), 0.0)


def test_distinct_full_sampling_is_exact():
    a = {f"k{i}": 1.0 for i in range(10)}
    b = {f"k{i}": 1.0 for i in range(5, 15)}
    s1, s2 = d.sample_oblivious(a, 1.0, 1), d.sample_oblivious(b, 1.0, 2)
    r = d.distinct(s1, s2, "l")
    assert close(r["estimate"], 15.0)
    assert r["kind"] == "L"


def test_signed_solution():
    problem = {
        "domain": [[0, 0], [1, 0], [0, 1], [1, 1]],
        "function": "or",
        "scheme": {"scheme": {"kind": "weighted_pps", "tau_star": [1 / 0.3, 1 / 0.3]}, "seeds_visible": False},
        "order": {"kind": "total", "ranking": [0, 1, 2, 3]},
    }
    t = d.solve(json.dumps(problem))
    assert t["status"] == "negativity_violated"
    assert close(t["estimates"][t["classes"].index("(1,1)")], -40 / 9, 1e-9)


def test_errors_are_value_errors():
    try:
        d.SamplingSpec.oblivious([1.5])
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
    assert math.isfinite(d.required_p(1e6, 0.0, 0.1, "l"))


if __name__ == "__main__":
    for name, f in list(globals().items()):
        if name.startswith("test_"):
            f()
            print("ok", name)
