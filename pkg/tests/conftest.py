import os
import random

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=200,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def rows_for(trace, monitor):
    """Predicate matrix of an oracle trace in the monitor's predicate order."""
    return np.asarray(trace.rows(monitor.predicates), dtype=np.uint8).reshape(
        trace.length, len(monitor.predicates))


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(autouse=True)
def _arena_bounds(monkeypatch):
    """Every session created during a test must stay within its arena."""
    from weft.engine import EvalSession

    sessions = []
    original = EvalSession.__init__

    def tracked(self, *args, **kwargs):
        original(self, *args, **kwargs)
        sessions.append(self)

    monkeypatch.setattr(EvalSession, "__init__", tracked)
    yield
    for s in sessions:
        assert s.arena.high_water <= s.arena.capacity, (
            f"arena high water {s.arena.high_water} exceeds capacity {s.arena.capacity}")
    sessions.clear()
