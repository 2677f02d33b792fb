import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SPIKEBP_LONGRUN") == "1":
        return
    skip = pytest.mark.skip(reason="long run; set SPIKEBP_LONGRUN=1")
    for item in items:
        if "longrun" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(LINES):
        terminalreporter.write_line(LINES[number])
