import pytest

from dunklhit import checks


@pytest.mark.parametrize("suite", checks.SUITES)
def test_suite_passes(suite):
    results = checks.run_suite(suite, seed=0)
    assert results
    failed = [r for r in results if not r.passed]
    assert not failed, failed[0]
    for r in results:
        assert r.residual <= r.threshold or suite == "mehler"


def test_unknown_suite():
    with pytest.raises(ValueError):
        checks.run_suite("nope")


def test_report_is_serializable():
    r = checks.CheckResult("x", 0.0, 1e-12, True)
    assert r.as_dict() == {"name": "x", "residual": 0.0, "threshold": 1e-12, "passed": True}
