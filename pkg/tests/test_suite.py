import json

from bispectral.suite import run_suite


def test_three_particle_suite(d3):
    rep = run_suite(3, seed=1, numeric_points=4, get_operator=lambda n: d3)
    failed = [c.id for c in rep.checks if c.status != "pass"]
    assert not failed
    ids = [c["id"] for c in rep.to_json()["checks"]]
    assert ids == sorted(ids)
    assert "commute.d13_H" in ids and "commute.d23_H" in ids
    assert rep.notes["p_n"]["agree"] is False


def test_report_is_reproducible(d2):
    a = run_suite(2, seed=5, numeric_points=3, get_operator=lambda n: d2).to_json()
    b = run_suite(2, seed=5, numeric_points=3, get_operator=lambda n: d2).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["overall"] == "pass"
