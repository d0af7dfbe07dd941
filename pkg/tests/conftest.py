import contextlib
import time

import pytest

_RESULTS = []


class Criterion:
    """Times one acceptance criterion and keeps a one-line verdict plus report lines."""

    def __init__(self, number, title, budget_s):
        self.number, self.title, self.budget_s = number, title, budget_s
        self.details = []

    def note(self, text):
        self.details.append(text)


@pytest.fixture
def criterion():
    @contextlib.contextmanager
    def run(number, title, budget_s):
        c = Criterion(number, title, budget_s)
        t0 = time.perf_counter()
        status = "FAIL"
        try:
            yield c
            elapsed = time.perf_counter() - t0
            if elapsed > budget_s:
                c.note(f"took {elapsed:.1f}s, budget {budget_s}s")
                raise AssertionError(f"criterion {number} over its time budget ({elapsed:.1f}s)")
            status = "PASS"
        except BaseException as e:
            c.note(f"{type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''}")
            raise
        finally:
            elapsed = time.perf_counter() - t0
            _RESULTS.append((number, status, c.title, elapsed, c.details))
    return run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, status, title, elapsed, details in sorted(_RESULTS, key=lambda r: r[0]):
        tr.write_line(f"[{status}] {number:2d}. {title} ({elapsed:.1f}s)")
        for d in details:
            tr.write_line(f"        {d}")
