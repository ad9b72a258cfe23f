"""Shared fixtures and the acceptance summary printed after the run."""

import pytest

ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    """Store ``(passed, detail)`` for an acceptance criterion id."""

    def record(cid, passed, detail):
        ACCEPTANCE[cid] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"criterion {cid}: {'PASS' if passed else 'FAIL'}  {detail}")
