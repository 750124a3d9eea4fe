import pytest


class AcceptanceLog:
    """Collects one verdict line per acceptance criterion for the terminal summary."""

    def __init__(self):
        self.lines: dict[str, str] = {}

    def record(self, criterion: str, passed: bool, detail: str) -> bool:
        self.lines[criterion] = f"{criterion} {'PASS' if passed else 'FAIL'}  {detail}"
        print(self.lines[criterion])
        return passed


_LOG = AcceptanceLog()


@pytest.fixture(scope="session")
def acceptance() -> AcceptanceLog:
    return _LOG


def pytest_terminal_summary(terminalreporter):
    if not _LOG.lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_LOG.lines):
        terminalreporter.write_line(_LOG.lines[key])
