from __future__ import annotations

import math

import pytest

from verification import CHECKS, CheckResult, run_checks


@pytest.mark.parametrize("name", sorted(CHECKS))
def test_quick_check_passes(name):
    (result,) = run_checks([name], quick=True)
    assert result.name == name
    assert result.passed, f"{name}: {result.value:.3e} vs {result.tolerance:.1e} ({result.detail})"


def test_unknown_check_is_refused():
    with pytest.raises(ValueError):
        run_checks(["chern", "hall_conductance"])


def test_check_result_record():
    record = CheckResult("chern", 1e-9, 1e-6, True, "ok").as_record()
    assert record == {"check": "chern", "value": 1e-9, "tolerance": 1e-6, "passed": True, "detail": "ok"}


def test_physics_errors_become_failed_results(monkeypatch):
    from errors import SingularityError

    def broken(quick=False, seed=0):
        raise SingularityError("H1 = 0")

    monkeypatch.setitem(CHECKS, "chern", broken)
    (result,) = run_checks(["chern"])
    assert not result.passed
    assert math.isnan(result.value)
    assert "SingularityError" in result.detail
