from pathlib import Path

import pytest

from cvlasso import _backend

DATA = Path(__file__).parent / "data"

ACCEPTANCE_RESULTS = []


@pytest.fixture(params=sorted(_backend.BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}")
