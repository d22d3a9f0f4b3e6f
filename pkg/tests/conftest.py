import os
import tempfile

import numpy as np
import pytest

# Keep factorization tables out of the user cache during the test run.
os.environ.setdefault("WEDGECRACK_CACHE", tempfile.mkdtemp(prefix="wedgecrack-test-"))

TABLE_ANGLES = [np.pi / 8, np.pi / 4, np.pi / 3, np.pi / 2, 2 * np.pi / 3, 3 * np.pi / 4, 7 * np.pi / 8]


@pytest.fixture(scope="session")
def table_angles():
    return TABLE_ANGLES


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def report():
    """Record the one-line outcome of an acceptance criterion."""

    def record(number: int, ok: bool, detail: str):
        _CRITERIA[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
