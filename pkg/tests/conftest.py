import pytest

_LINES: dict[int, tuple[str, str]] = {}
_OUTCOMES: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    num = getattr(item.function, "criterion", None)
    if num is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _OUTCOMES[num] = "PASS" if rep.passed else "FAIL"


@pytest.fixture
def note(request):
    """Record a one-line summary for the acceptance criterion under test."""
    num = request.function.criterion

    def record(title: str, detail: str = ""):
        _LINES[num] = (title, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_OUTCOMES):
        title, detail = _LINES.get(num, ("", ""))
        line = f"criterion {num:2d}: {_OUTCOMES[num]}  {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
