import json

import pytest

from usvswarm import verify
from usvswarm.verify import Check, SuiteReport, report_json, run_suite


def test_report_conjunction():
    good = SuiteReport("a", [Check.at_most("x", 0.1, 1.0), Check.at_most("y", 0.0, 0.0)])
    bad = SuiteReport("b", [Check.at_most("x", 0.1, 1.0), Check.at_most("z", 2.0, 1.0)])
    assert good.passed and not bad.passed
    assert json.loads(report_json([good]))["passed"] is True
    doc = json.loads(report_json([good, bad]))
    assert doc["passed"] is False
    assert doc["suites"][1]["checks"][1] == {"name": "z", "measured": 2.0, "tolerance": 1.0,
                                             "passed": False, "verdict": "fail"}


def test_unknown_suite():
    with pytest.raises(KeyError, match="geometry"):
        run_suite("nope")


@pytest.mark.parametrize("name", ["geometry", "gradient", "regulation", "estimator", "conversion"])
def test_fast_suites_pass(name):
    [rep] = run_suite(name)
    assert rep.passed, rep.to_dict()


def test_regulation_suite_reports_kappa4_fit():
    [rep] = run_suite("regulation")
    check = next(c for c in rep.checks if "kappa4" in c.name and "fitted" in c.name)
    assert check.tolerance == 0.02 and check.passed


@pytest.mark.slow
def test_lyapunov_and_dynamics_suites_pass():
    for name in ("lyapunov", "dynamics"):
        [rep] = run_suite(name)
        assert rep.passed, rep.to_dict()
