import json
import math

import pytest

from dualjet.catalog import build_space
from dualjet.suites import (CHECKS, SUITES, Check, check_rng, checks_for, dumps, format_table,
                            report_document, run_check, run_suite)


def test_registry_names_are_unique_and_prefixed():
    names = [c.name for c in CHECKS]
    assert len(names) == len(set(names))
    for c in CHECKS:
        assert c.suite in SUITES and c.name.startswith(c.suite + ".")
        assert "eq" not in c.anchor.lower().split()


def test_unknown_suite():
    with pytest.raises(ValueError):
        checks_for("everything")


def test_exceptions_become_failed_rows():
    def boom(space, rng, count):
        raise RuntimeError("broken module")
    row = run_check(build_space("flat"), Check("x.boom", "metric", "anchor", 1.0, boom), seed=3)
    assert not row.passed and math.isnan(row.max_residual) and row.points == 0
    assert row.error == "RuntimeError: broken module"
    assert row.as_dict()["max_residual"] == "nan"


def test_relations():
    sp = build_space("flat")
    mk = lambda value, tol, rel: run_check(sp, Check("x", "metric", "a", tol, lambda s, r, c: (value, 1),
                                                   relation=rel), 0)
    assert mk(1.0, 2.0, "<=").passed and not mk(3.0, 2.0, "<=").passed
    assert mk(3.0, 2.0, ">").passed and not mk(1.0, 2.0, ">").passed
    assert mk(15.0, (12.0, 20.0), "within").passed and not mk(21.0, (12.0, 20.0), "within").passed
    assert not mk(math.inf, 2.0, "<=").passed


def test_check_streams_are_independent():
    # a check sees the same random stream whether it runs alone or inside the full suite
    sp = build_space("optics")
    alone = [r.as_dict() for r in run_suite(sp, "metric", seed=5)]
    full = [r.as_dict() for r in run_suite(sp, "all", seed=5) if r.check.startswith("metric.")]
    assert alone == full
    assert check_rng(5, "a").random() != check_rng(5, "b").random()


def test_rows_are_sorted_and_filtered():
    rows = run_suite(build_space("optics"), "metric", seed=1)
    names = [r.check for r in rows]
    assert names == sorted(names)
    assert "metric.non_reducible" in names and "metric.reducible" not in names
    assert "metric.electrodynamics_tensor" not in names


def test_zermelo_suite_space():
    sp = build_space("custom_expr", hamiltonian="(p1^2 + p2^2)*sqrt(y1_1^2 + y1_2^2)")
    rows = {r.check: r for r in run_suite(sp, "dynamics", seed=2)}
    row = rows["dynamics.zermelo_energies"]
    assert row.passed and row.points == 10
    assert "dynamics.zermelo_energies" not in [r.check for r in run_suite(build_space("flat"), "dynamics")]


def test_document_serialization():
    sp = build_space("flat")
    rows = run_suite(sp, "structures", seed=4)
    doc = report_document(sp, "structures", 4, rows)
    text = dumps(doc)
    assert text == dumps(json.loads(text))
    assert doc["passed"] and doc["schema"] == "dualjet-report/1"
    table = format_table(rows)
    assert table.count("\n") == len(rows) + 1
