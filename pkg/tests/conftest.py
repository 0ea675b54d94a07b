import pytest

_LINES = []


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line; the lines are printed again at session end."""
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _LINES.append((number, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(line)
