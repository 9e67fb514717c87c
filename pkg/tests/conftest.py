import logging

import pytest

from levygal.spaces import Domain, build_basis


@pytest.fixture(autouse=True)
def _quiet_stability_warnings():
    logging.getLogger("levygal").setLevel(logging.ERROR)
    yield


@pytest.fixture
def basis8():
    return build_basis(Domain(), 8)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(k: int, passed: bool, detail: str):
        ACCEPTANCE[k] = (bool(passed), detail)
        print(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'} | {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'} | {detail}")
