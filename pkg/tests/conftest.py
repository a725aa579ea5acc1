import pytest

from etcdelay.backend import available_backends

# One pass/fail line per acceptance criterion, printed after the run.
ACCEPTANCE_RECORDS = []


def record_criterion(num, name, passed, detail=""):
    ACCEPTANCE_RECORDS.append((num, name, passed, detail))


@pytest.fixture(params=available_backends())
def backend_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RECORDS:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, passed, detail in sorted(ACCEPTANCE_RECORDS):
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {num} ({name}): {verdict}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
