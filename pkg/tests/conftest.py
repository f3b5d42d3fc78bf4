from contextlib import contextmanager

import numpy as np
import pytest

_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return np.random.default_rng(20251014)


@pytest.fixture
def criterion(request):
    """Context manager that records one PASS/FAIL line per acceptance criterion."""
    results = request.config.stash.setdefault(_CRITERIA, {})

    @contextmanager
    def check(number, title):
        try:
            yield
        except BaseException:
            results[number] = f"FAIL  criterion {number:2d}: {title}"
            print(results[number])
            raise
        results[number] = f"PASS  criterion {number:2d}: {title}"
        print(results[number])

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_CRITERIA, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
