import json
import math

import pytest

from excursions.diffusion import OrnsteinUhlenbeck, ReflectedBrownianMotion
from excursions.numerics import QuadOutcome
from excursions.verify import (
    FAILED,
    NONCONVERGED,
    PASSED,
    UNAVAILABLE,
    CheckReport,
    SuiteReport,
    check_b_independence,
    check_bernstein,
    check_krein,
    check_last_zero,
    check_length_convolution_grid,
    check_spectral,
    check_stationary,
    describe,
    run_all,
)

OU = OrnsteinUhlenbeck(1.0)
BM = ReflectedBrownianMotion()


def test_compare_rule():
    assert CheckReport.compare("x", {}, 1.0, 1.0 + 5e-7, 1e-6).status == PASSED
    assert CheckReport.compare("x", {}, 1.0, 1.0 + 5e-6, 1e-6).status == FAILED
    # relative once |rhs| > 1
    assert CheckReport.compare("x", {}, 100.0, 100.00005, 1e-6).status == PASSED
    bad = QuadOutcome(1.0, 1.0, False)
    assert CheckReport.compare("x", {}, bad, 1.0, 1e-6).status == NONCONVERGED


def test_unavailable_report_serialises():
    r = CheckReport.unavailable("y", {"a": 1}, "no stationary law")
    d = r.to_dict()
    assert d["status"] == UNAVAILABLE
    assert d["lhs"] is None and d["tolerance"] is None
    json.dumps(d)


def test_suite_exit_codes():
    s = SuiteReport()
    assert s.exit_code() == 0 and s.ok
    s.extend([CheckReport.compare("a", {}, 1.0, 1.0, 1e-9)])
    assert s.exit_code() == 0
    s.extend([CheckReport("b", {}, math.nan, math.nan, 1e-9, NONCONVERGED)])
    assert s.exit_code() == 3 and not s.ok
    s.extend([CheckReport.compare("c", {}, 1.0, 2.0, 1e-9)])
    assert s.exit_code() == 1


@pytest.mark.parametrize("model", [OU, OrnsteinUhlenbeck(2.0), BM], ids=describe)
def test_last_zero_and_bernstein(model):
    for t in (0.3, 1.0, 3.0):
        assert check_last_zero(model, t).passed
    for alpha in (0.5, 1.0, 2.0, 5.0):
        assert check_bernstein(model, alpha).passed


def test_length_convolution_grid_and_injected_failure():
    good = check_length_convolution_grid(OU)
    assert len(good) == 9 and all(r.passed for r in good)
    bad = check_length_convolution_grid(OU, nu_scale=1.01)
    assert sum(r.status == FAILED for r in bad) >= 8


@pytest.mark.parametrize("model", [OU, BM], ids=describe)
def test_b_independence_and_krein(model):
    assert all(r.passed for r in check_b_independence(model))
    assert all(r.passed for r in check_krein(model))


def test_spectral_and_stationary_availability():
    assert all(r.passed for r in check_spectral(OU))
    assert all(r.status == UNAVAILABLE for r in check_spectral(BM))
    assert all(r.passed for r in check_stationary(OU))
    assert all(r.status == UNAVAILABLE for r in check_stationary(BM))


def test_run_all_ou_and_bm():
    suite = run_all([OU, BM])
    assert suite.count(FAILED) == 0
    assert suite.count(NONCONVERGED) == 0
    assert suite.count(PASSED) > 100
    assert suite.count(UNAVAILABLE) == 3
    assert suite.exit_code() == 0
    ids = [r.check_id for r in suite.reports]
    assert len(ids) == len(set(ids))
    data = json.loads(suite.to_json())
    assert data["summary"]["passed"] == suite.count(PASSED)


def test_run_all_corrupted_tolerance_fails():
    suite = run_all([BM], corrupt_tolerance=True)
    assert suite.count(PASSED) == 0
    assert suite.exit_code() == 1


def test_run_all_empty():
    suite = run_all([])
    assert suite.reports == [] and suite.exit_code() == 0
