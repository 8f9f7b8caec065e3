import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
R = 1 / math.sqrt(2)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_ket(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_density(rng, n, rank=None):
    rank = rank or n
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


seeds = st.integers(min_value=0, max_value=2**32 - 1)
small_dims = st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=3).filter(
    lambda d: math.prod(d) <= 16
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def scenario_files():
    return sorted(SCENARIOS.glob("*.scn"))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
