import numpy as np

from porousrad.validation import (
    Check,
    CriterionResult,
    ValidationReport,
    _sub_seed,
    criterion_quadrature,
)


def test_sub_seed_is_deterministic_and_keyed():
    assert _sub_seed(1, 2, 3) == _sub_seed(1, 2, 3)
    assert _sub_seed(1, 2, 3) != _sub_seed(1, 2, 4)
    assert _sub_seed(1, 2, 3) != _sub_seed(2, 2, 3)
    assert 0 <= _sub_seed(7, 0) < 2**64


def _toy_report(passed=True):
    checks = [Check("alpha gap", 0.001, 0.01, True),
              Check("beta gap", 0.5 if not passed else 0.002, 0.01, passed)]
    res = CriterionResult(index=3, title="toy criterion", checks=checks,
                          notes=["a note"], info=[("extra", 1.25)])
    return ValidationReport(seed=42, results=[res])


def test_report_text_rendering():
    rep = _toy_report(passed=True)
    txt = rep.text()
    assert "criterion 3: PASS  toy criterion [2/2 checks]" in txt
    assert "ok   alpha gap" in txt
    assert "info extra" in txt
    assert "note a note" in txt
    assert "overall: PASS" in txt
    assert rep.passed

    bad = _toy_report(passed=False)
    txt = bad.text()
    assert "criterion 3: FAIL" in txt
    assert "FAIL beta gap" in txt
    assert "overall: FAIL (criteria 3)" in txt
    assert not bad.passed


def test_report_csv_rendering():
    rep = _toy_report(passed=True)
    lines = rep.csv().strip().splitlines()
    assert lines[0] == "criterion,label,value,limit,passed"
    assert lines[1].startswith('3,"alpha gap",0.001,0.01,true')
    # info rows leave limit and passed empty
    info_rows = [l for l in lines if '"extra"' in l]
    assert info_rows == ['3,"extra",1.25,,']


def test_quadrature_criterion_runs_clean():
    res = criterion_quadrature(seed=999, n_pairs=4)
    assert res.passed
    assert len(res.checks) == 4
    for c in res.checks:
        assert c.value < c.limit


def test_check_values_are_plain_floats():
    res = criterion_quadrature(seed=5, n_pairs=2)
    for c in res.checks:
        assert isinstance(c.value, float) and not isinstance(c.value, np.floating)
