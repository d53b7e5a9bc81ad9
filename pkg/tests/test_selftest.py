from unittest.mock import patch

import pytest

from src.config import Config, LimitExceededError
from src.evaluator import ConsistencyError
from src.selftest import SelftestRunner


def failing(error: Exception):
    def check() -> str:
        raise error
    return check


class TestSelftestRunner:
    """Test how the runner records passing and failing checks"""

    def test_passing_check(self):
        with patch.object(SelftestRunner, 'checks', return_value=[('ok', lambda: 'fine')]):
            report = SelftestRunner(Config()).run()
        assert report.passed
        assert report.results[0].detail == 'fine'
        assert report.results[0].error is None

    @pytest.mark.parametrize("error", [
        ConsistencyError("methods disagree"), LimitExceededError("lattice", 5040, 40320), AssertionError("wrong count"),
    ])
    def test_failure_keeps_exception_kind(self, error):
        with patch.object(SelftestRunner, 'checks', return_value=[('boom', failing(error))]):
            report = SelftestRunner(Config()).run()
        result = report.results[0]
        assert not result.passed
        assert result.error == type(error).__name__
        assert result.detail == f"{type(error).__name__}: {error}"
        assert report.failed_with(type(error).__name__)

    def test_later_checks_still_run(self):
        catalog = [('boom', failing(ConsistencyError("methods disagree"))), ('ok', lambda: 'fine')]
        with patch.object(SelftestRunner, 'checks', return_value=catalog):
            report = SelftestRunner(Config()).run()
        assert [r.passed for r in report.results] == [False, True]
        assert not report.failed_with('LimitExceededError')

    def test_stretch_adds_s7(self):
        assert 'stretch-s7' not in [name for name, _ in SelftestRunner(Config()).checks()]
        assert 'stretch-s7' in [name for name, _ in SelftestRunner(Config(), stretch=True).checks()]
