from __future__ import annotations

import numpy as np
import pytest

from heavyball.dynamics import exact_risk_trace
from heavyball.problem import QuadraticProblem
from heavyball.schedules import constant_schedule

# (criterion id, status, description, seconds) rows filled by the acceptance tests
ACCEPTANCE: list[tuple[str, str, str, float]] = []


@pytest.fixture(scope="session")
def jit_warm():
    """Compile the risk kernel once so timed sections measure steady-state cost."""
    exact_risk_trace(QuadraticProblem([1.0, 0.5], 1.0), constant_schedule(0.1, 4), 0.5, 1, np.ones(2),
                     record_every=2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, status, desc, secs in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {cid}: {status:<4} {desc} ({secs:.2f}s)")
