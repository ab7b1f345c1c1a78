import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cocylab.cocycle import CocycleSystem, Generator
from cocylab.sft import Metric, TransitionStructure

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def full2():
    return TransitionStructure.full_shift(2)


@pytest.fixture
def golden():
    return TransitionStructure.from_matrix([[1, 1], [1, 0]])


@pytest.fixture
def half():
    return Metric(0.5, 1.0)


@pytest.fixture
def near_identity(full2, half):
    rng = np.random.default_rng(7)
    return CocycleSystem(Generator.random_near(full2, 1, np.eye(2), 0.15, rng), half, "A")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for i in sorted(results):
        ok, detail = results[i]
        terminalreporter.write_line(f"criterion {i:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
