"""Shared pytest wiring: the acceptance-criteria summary.

Tests marked @pytest.mark.acceptance(num, title) are tallied by criterion and
reported as one PASS/FAIL line each at the end of the run.  A criterion only
passes when every test carrying its number passed; errors and skips count as
failures so a criterion can never look green without having run.
"""
import pytest

_results: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(num, title): tally this test into the acceptance summary",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num, title = marker.args
    if report.when == "setup" and report.skipped:
        _results[num] = (title, False)
    if report.when != "call":
        return
    prev_ok = _results.get(num, (title, True))[1]
    _results[num] = (title, prev_ok and report.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        title, ok = _results[num]
        dots = "." * max(2, 58 - len(title))
        terminalreporter.write_line(
            f"criterion {num:2d}: {title} {dots} {'PASS' if ok else 'FAIL'}"
        )
