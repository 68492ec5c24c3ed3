import pytest

_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; shown in the terminal summary."""

    def _report(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  {detail}" if detail else "")
        _LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance")
        for line in _LINES:
            terminalreporter.write_line(line)
