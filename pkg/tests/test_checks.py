"""Invariant suite."""

import json

import pytest

from checks import CHECKS, CheckResult, run_checks
from cli import main
from config import RunConfig


def test_check_result_pass_flag():
    assert CheckResult("x", 1e-13, 1e-12).passed
    assert not CheckResult("x", 1e-11, 1e-12).passed
    assert CheckResult("x", 0.5, 1.0).as_dict() == {"name": "x", "measured": 0.5, "bound": 1.0, "passed": True}


@pytest.mark.parametrize("seed", [0, 7])
def test_all_checks_pass(seed):
    results = run_checks(RunConfig(seed=seed))
    assert len(results) == len(CHECKS)
    failed = [r.name for r in results if not r.passed]
    assert failed == []


def test_check_command(capsys):
    assert main(["check", "--seed", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert report["seed"] == 3
    assert len(report["checks"]) == len(CHECKS)
