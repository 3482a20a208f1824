import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bosetele.fock import PureNumberState, ResourceState

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def random_state(rng, n):
    return PureNumberState.normalized(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))


def random_resource(rng, nu, rank=None):
    dim = nu + 1
    rank = int(rng.integers(1, dim + 1)) if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return ResourceState(nu, rho / np.trace(rho).real)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
