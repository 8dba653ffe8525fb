import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("arsim", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "arsim"))

_ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion():
    """``criterion(k, ok, detail)`` records one check of acceptance criterion ``k``."""
    def record(k: int, ok: bool, detail: str):
        _ACCEPTANCE.setdefault(k, []).append((bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        checks = _ACCEPTANCE[k]
        bad = [d for ok, d in checks if not ok]
        tr.write_line(f"criterion {k:2d}: {'PASS' if not bad else 'FAIL'} "
                      f"({len(checks) - len(bad)}/{len(checks)} checks)")
        for d in bad:
            tr.write_line(f"    failed: {d}")
