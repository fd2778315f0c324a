from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


# criterion number -> (title, "PASS" | "FAIL", note), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, status, note = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d} {status}: {title}{'  (' + note + ')' if note else ''}")
