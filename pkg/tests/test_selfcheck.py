# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests the self-check suite"""

# pylint: disable=missing-function-docstring

import json

import numpy as np
import pytest

from mwcnn_restore.selfcheck import (
    BaseCheck,
    GradientCheck,
    SumPoolCheck,
    SelfCheckSuite,
    check_names,
    layer_grad_errors,
)
from mwcnn_restore.tensor import new_rng


def test_check_order() -> None:
    assert check_names() == [
        "reconstruction",
        "sum_pool",
        "dilated_equivalence",
        "conv_oracle",
        "haar_oracle",
        "gradients",
        "wpt_degeneration",
        "architecture",
        "gridding",
    ]


def test_whole_suite_passes() -> None:
    suite = SelfCheckSuite(cases=3, seed=1)
    failed = [(r.name, r.detail) for r in suite.results if not r.passed]
    assert not failed
    assert suite.passed
    assert [r.name for r in suite.results] == check_names()


@pytest.mark.slow
def test_default_case_count_passes() -> None:
    assert SelfCheckSuite().passed


def test_only_subset() -> None:
    suite = SelfCheckSuite(cases=5, only=["haar_oracle", "sum_pool"])
    assert [r.name for r in suite.results] == ["sum_pool", "haar_oracle"]
    assert suite.passed


def test_bad_arguments() -> None:
    with pytest.raises(ValueError):
        SelfCheckSuite(only=["nonexistent"])
    with pytest.raises(ValueError):
        SelfCheckSuite(cases=0)


def test_seed_reproduces_results() -> None:
    a = SelfCheckSuite(cases=4, seed=3, only=["conv_oracle", "reconstruction"])
    b = SelfCheckSuite(cases=4, seed=3, only=["conv_oracle", "reconstruction"])
    assert [r.worst for r in a.results] == [r.worst for r in b.results]


def test_gradient_check_detail() -> None:
    result = GradientCheck(cases=1).run()
    assert result.passed
    assert result.detail.startswith("max relative error")


def test_layer_gradients_cover_every_layer() -> None:
    errors = layer_grad_errors(new_rng(0))
    assert set(errors) == {
        "conv_d1",
        "conv_d2",
        "bn",
        "relu",
        "dwt_haar",
        "iwt_haar",
        "dwt_db2",
        "iwt_db2",
        "sum_pool",
        "unpool",
    }


def test_json_output() -> None:
    suite = SelfCheckSuite(cases=2, only=["sum_pool"])
    result = json.loads(json.dumps(suite.output_json()))
    assert set(result) == {"title", "allPassed", "errors", "checks"}
    assert result["allPassed"] is True
    assert result["checks"][0]["name"] == "sum_pool"
    assert result["checks"][0]["cases"] == 2


def test_table_output(capsys: pytest.CaptureFixture[str]) -> None:
    SelfCheckSuite(cases=2, only=["sum_pool"]).print_table_output(verbose=True)
    out = capsys.readouterr().out
    assert "Self-check Results" in out
    assert "PASS sum_pool: 0 bitwise mismatch(es)" in out
    assert "sum_pool: 2 case(s) in" in out


class _CrashingCheck(BaseCheck):
    NAME = "crashing"
    DESCRIPTION = "Raises outside the library's own errors"

    def run_cases(self, rng: np.random.Generator) -> tuple[bool, float, str]:
        raise FloatingPointError("overflow in reduce")


def test_check_that_cannot_run_is_reported(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    monkeypatch.setattr(SelfCheckSuite, "CHECKS", [_CrashingCheck, SumPoolCheck])
    suite = SelfCheckSuite(cases=2)
    assert [r.name for r in suite.results] == ["sum_pool"]
    assert suite.results[0].passed
    assert suite.errors == ["crashing: overflow in reduce"]
    assert not suite.passed
    assert suite.output_json()["errors"] == ["crashing: overflow in reduce"]
    suite.print_table_output()
    out = capsys.readouterr().out
    assert "could not be completed" in out
    assert "crashing: overflow in reduce" in out
