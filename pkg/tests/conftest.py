import re
from collections import defaultdict

import pytest

from nvpolar.presets import get_preset

_CRITERION = re.compile(r"test_criterion_(\d+)")


@pytest.fixture(scope="session")
def table_a1():
    """The fitted-coupling parameter set used throughout the suite."""
    return get_preset("table-a1-fit")


@pytest.fixture(scope="session")
def fig4_preset():
    """The weak-drive parameter set with the swept transverse coupling."""
    return get_preset("table-a1-fig4")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per numbered acceptance criterion."""
    outcomes: dict[int, dict[str, int]] = defaultdict(lambda: {"pass": 0, "fail": 0})
    for status, verdict in (("passed", "pass"), ("failed", "fail"), ("error", "fail")):
        for report in terminalreporter.stats.get(status, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if match:
                outcomes[int(match.group(1))][verdict] += 1
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(outcomes):
        counts = outcomes[number]
        total = counts["pass"] + counts["fail"]
        verdict = "PASS" if counts["fail"] == 0 else "FAIL"
        terminalreporter.write_line(
            f"criterion {number}: {verdict} ({counts['pass']}/{total} checks)"
        )
