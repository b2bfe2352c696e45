import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hfdkit.signal import ChannelRegistry, Group, Recording, Style

settings.register_profile("default", max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def reference():
    return json.loads((FIXTURES / "reference_values.json").read_text())


@pytest.fixture
def small_registry():
    return ChannelRegistry(("Fp1", "Fpz", "Fp2", "F7"))


def make_recording(data, labels, rate=256.0, subject="S001", group=Group.EXPERT, pid="1A", style=Style.ALGEBRAIC):
    return Recording.from_array(np.asarray(data, dtype=float), labels, rate, subject_id=subject, group=group,
                                presentation_id=pid, style=style)


# acceptance summary: one line per criterion at the end of the run
_ACCEPTANCE: dict[str, dict] = {}


@pytest.fixture
def criterion(request):
    """Collects a human-readable measurement line for the acceptance summary."""
    entry = _ACCEPTANCE.setdefault(request.node.nodeid, {"notes": []})
    entry["title"] = request.node.function.__doc__.strip().splitlines()[0]
    return entry["notes"]


def pytest_runtest_logreport(report):
    entry = _ACCEPTANCE.get(report.nodeid)
    if entry is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["outcome"] = report.outcome
        entry["duration"] = report.duration


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[nodeid]
        status = "PASS" if e.get("outcome") == "passed" else "FAIL"
        detail = "; ".join(e["notes"])
        terminalreporter.write_line(f"{status}  {e['title']} ({e.get('duration', 0.0):.1f} s)  {detail}")
