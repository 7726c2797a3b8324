import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def record():
    """Log one acceptance line; the test still asserts on its own."""
    def log(number: int, title: str, ok: bool, detail: str = '') -> bool:
        line = f'[{"PASS" if ok else "FAIL"}] criterion {number}: {title}'
        _CRITERIA.append(line + (f' ({detail})' if detail else ''))
        return ok
    return log


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section('acceptance criteria')
        for line in sorted(_CRITERIA, key=lambda s: int(s.split('criterion ')[1].split(':')[0])):
            terminalreporter.write_line(line)
