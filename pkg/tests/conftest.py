import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = {}


class AcceptanceLog:
    """Collects one verdict per acceptance criterion for the terminal summary."""

    def __init__(self, store):
        self._store = store

    def record(self, number, title, ok, detail=""):
        self._store[number] = (title, bool(ok), detail)
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else "")
        print(line)
        return ok


@pytest.fixture
def acceptance():
    return AcceptanceLog(_ACCEPTANCE)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {title}"
                                    + (f" ({detail})" if detail else ""))
