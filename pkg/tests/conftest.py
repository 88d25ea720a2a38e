import pytest

ACCEPTANCE = []


def record(criterion: str, ok: bool, detail: str = ""):
    """Log one acceptance verdict; printed in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


@pytest.fixture
def verdict():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
