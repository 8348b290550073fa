import pytest

_ACCEPTANCE: list[tuple[str, bool, str]] = []


class Checker:
    """Records one pass/fail line per acceptance check, then asserts it."""

    def __call__(self, name: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"


@pytest.fixture
def check() -> Checker:
    return Checker()


def pytest_runtest_logreport(report):
    # errors raised before any check still get a line
    if "test_acceptance" in report.nodeid and report.when == "call" and report.failed:
        recorded_failure = _ACCEPTANCE and not _ACCEPTANCE[-1][1]
        if not recorded_failure:
            name = report.nodeid.split("::")[-1]
            _ACCEPTANCE.append((name, False, str(report.longrepr).splitlines()[-1]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
