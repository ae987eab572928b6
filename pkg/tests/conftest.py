from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from lossyparity.corpus import random_game

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def bundled(name: str) -> Path:
    return Path(str(resources.files("lossyparity") / "bundled" / name))


@pytest.fixture
def bundled_path():
    return bundled


@st.composite
def games(draw, allow_random=True, max_states=6):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return random_game(
        rng, max_states=max_states, allow_random=allow_random, min_random=1 if allow_random else 0
    )


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
