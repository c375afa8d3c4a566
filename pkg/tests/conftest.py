import pytest

from andersolve import linalg


@pytest.fixture(autouse=True)
def _default_tolerances():
    """Undo any runtime tolerance changes a test (or the CLI) makes."""
    saved = linalg.Tolerances(**vars(linalg.TOLERANCES))
    yield
    for key, value in vars(saved).items():
        setattr(linalg.TOLERANCES, key, value)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(REPORT, key=lambda k: (int(k.rstrip("abc")), k)):
        ok, detail = REPORT[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} | {detail}")
